#include "marketsim/stats/probe.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "marketsim/rl/checkpoint.hpp"

namespace marketsim::stats {

namespace fs = std::filesystem;

ProbeLog load_probe_log(const std::string& run_dir,
                        std::optional<std::pair<Step, Step>> step_range) {
  const fs::path dir(run_dir);
  ProbeLog log;
  log.step_range = step_range;

  nlohmann::json manifest;
  {
    std::ifstream in(dir / "run_manifest.json");
    if (!in)
      throw std::runtime_error("no run_manifest.json under " + run_dir);
    in >> manifest;
  }
  const double initial_price = manifest.value("initial_price", 100.0);
  log.scales.initial_price_ticks = initial_price * 100.0;
  if (manifest.contains("config") && manifest["config"].contains("scales")) {
    const auto& s = manifest["config"]["scales"];
    log.scales.depth_scale_shares =
        s.value("depth_shares", log.scales.depth_scale_shares);
    log.scales.inventory_scale_shares =
        s.value("inventory_shares", log.scales.inventory_scale_shares);
  }
  for (const auto& a : manifest.value("agents", nlohmann::json::array())) {
    log.initial_cash_dollars[a.at("id").get<AgentId>()] =
        a.at("initial_cash_cents").get<double>() / 100.0;
  }

  // accounts.csv: step,agent_id,cash,inventory,...
  std::map<Step, std::map<AgentId, std::pair<double, Shares>>> accounts;
  {
    std::ifstream in(dir / "accounts.csv");
    if (!in) throw std::runtime_error("no accounts.csv under " + run_dir);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string cell;
      std::getline(row, cell, ',');
      const Step step = std::stoll(cell);
      std::getline(row, cell, ',');
      const AgentId id = static_cast<AgentId>(std::stoul(cell));
      std::getline(row, cell, ',');
      const double cash = std::stod(cell);
      std::getline(row, cell, ',');
      const Shares inv = std::stoll(cell);
      accounts[step][id] = {cash, inv};
    }
  }

  std::ifstream in(dir / "snapshots.jsonl");
  if (!in) throw std::runtime_error("no snapshots.jsonl under " + run_dir);
  std::deque<double> mid_history;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json row = nlohmann::json::parse(line);
    if (row["mid"].is_null()) continue;
    const Step step = row.at("step").get<Step>();

    ProbeState st;
    st.step = step;
    const auto fill_side = [](const nlohmann::json& levels,
                              std::vector<lob::DepthLevel>& out) {
      for (const auto& l : levels) {
        lob::DepthLevel level;
        level.price = l[0].get<Ticks>();
        level.quantity = l[1].get<Shares>();
        out.push_back(level);
      }
    };
    fill_side(row.value("bids", nlohmann::json::array()), st.depth.bids);
    fill_side(row.value("asks", nlohmann::json::array()), st.depth.asks);
    if (st.depth.bids.empty() || st.depth.asks.empty()) continue;
    st.depth.step = step;
    st.depth.best_bid = st.depth.bids.front().price;
    st.depth.best_ask = st.depth.asks.front().price;
    st.depth.mid_ticks =
        (static_cast<double>(st.depth.best_bid) + st.depth.best_ask) / 2.0;
    st.depth.spread_ticks = st.depth.best_ask - st.depth.best_bid;
    st.imbalance = st.depth.imbalance();

    mid_history.push_back(st.depth.mid_ticks);
    if (mid_history.size() > 5) mid_history.pop_front();
    st.mid_history_ticks = mid_history;

    if (step_range && (step < step_range->first || step >= step_range->second))
      continue;

    // per-MM resting shares over the captured levels -> provision fractions
    double total = 0.0;
    if (row.contains("mm")) {
      for (const auto& [key, shares] : row["mm"].items()) {
        const AgentId id = static_cast<AgentId>(std::stoul(key));
        st.provision[id] = shares.get<double>();
        total += shares.get<double>();
      }
      for (auto& [id, v] : st.provision) v = total > 0.0 ? v / total : 0.0;
    }

    auto it = accounts.find(step);
    if (it != accounts.end()) {
      for (const auto& [id, cashinv] : it->second) {
        st.cash_dollars[id] = cashinv.first;
        st.inventory[id] = cashinv.second;
      }
    }
    log.states.push_back(std::move(st));
  }
  return log;
}

std::vector<ProbeRow> probe_policies(
    const ProbeLog& log,
    const std::map<std::string, std::string>& group_checkpoint_dirs,
    double imbalance_threshold) {
  std::vector<const ProbeState*> balanced;
  std::vector<const ProbeState*> imbalanced;
  for (const auto& st : log.states) {
    (std::abs(st.imbalance) <= imbalance_threshold ? balanced : imbalanced)
        .push_back(&st);
  }
  if (balanced.empty())
    throw NoStatesInPartition("balanced partition is empty");
  if (imbalanced.empty())
    throw NoStatesInPartition("imbalanced partition is empty");

  std::vector<ProbeRow> rows;
  for (const auto& [group, ckpt_dir] : group_checkpoint_dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(ckpt_dir)) {
      if (entry.path().extension() == ".ckpt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      rl::LoadedCheckpoint ckpt = rl::load_checkpoint(file.string());
      if (ckpt.metadata.value("class", "") != "mm") continue;
      const AgentId id = ckpt.metadata.at("agent_id").get<AgentId>();
      agents::MmParams params;
      const auto& pj = ckpt.metadata.at("params");
      params.omega = pj.at("omega");
      params.gamma_inv = pj.at("gamma");
      params.alpha = pj.at("alpha");
      params.target_provision = pj.at("target_provision");
      params.eps_s_lo = pj.at("eps_s")[0];
      params.eps_s_hi = pj.at("eps_s")[1];
      params.eps_a_lo = pj.at("eps_a")[0];
      params.eps_a_hi = pj.at("eps_a")[1];

      agents::ObsScales scales = log.scales;
      auto cash0 = log.initial_cash_dollars.find(id);
      scales.initial_cash_dollars =
          cash0 != log.initial_cash_dollars.end()
              ? std::max(1.0, cash0->second)
              : 1e6;

      const auto run_partition = [&](const char* label,
                                     const std::vector<const ProbeState*>&
                                         states) {
        ProbeRow row;
        row.group = group;
        row.partition = label;
        row.agent = ckpt.metadata.value("name", file.stem().string());
        std::mt19937_64 unused_rng(0);
        std::vector<double> raw;
        double logp;
        for (const ProbeState* st : states) {
          double provision = 0.0;
          if (auto it = st->provision.find(id); it != st->provision.end())
            provision = it->second;
          Shares inv = 0;
          if (auto it = st->inventory.find(id); it != st->inventory.end())
            inv = it->second;
          double bp = scales.initial_cash_dollars;
          if (auto it = st->cash_dollars.find(id); it != st->cash_dollars.end())
            bp = it->second;
          const std::vector<double> obs =
              agents::mm_observation(st->mid_history_ticks, st->depth,
                                     provision, inv, bp, params, scales);
          ckpt.nets.policy.act(obs, unused_rng, raw, logp,
                               /*deterministic=*/true);
          row.eps_s.push_back(
              agents::tanh_affine(raw[1], params.eps_s_lo, params.eps_s_hi));
          row.eps_a.push_back(
              agents::tanh_affine(raw[2], params.eps_a_lo, params.eps_a_hi));
          row.mean_u += agents::tanh_affine(raw[0], 0.0, 1.0);
        }
        row.n_states = states.size();
        const double n = static_cast<double>(row.n_states);
        row.mean_u /= n;
        for (const double v : row.eps_s) row.mean_eps_s += v;
        for (const double v : row.eps_a) row.mean_eps_a += v;
        row.mean_eps_s /= n;
        row.mean_eps_a /= n;
        rows.push_back(std::move(row));
      };
      run_partition("balanced", balanced);
      run_partition("imbalanced", imbalanced);
    }
  }
  return rows;
}

}  // namespace marketsim::stats
