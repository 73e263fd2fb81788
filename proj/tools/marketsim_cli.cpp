// Command-line front end: pretrain | simulate | analyze | probe | replay.
// Exit codes: 0 success, 1 config error, 2 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "marketsim/sim/simulation.hpp"
#include "marketsim/stats/analysis.hpp"
#include "marketsim/stats/probe.hpp"

namespace fs = std::filesystem;
using namespace marketsim;

#ifndef MARKETSIM_PRESET_DIR
#define MARKETSIM_PRESET_DIR ""
#endif

namespace {

fs::path resolve_config(const std::string& name) {
  if (fs::exists(name)) return name;
  const std::vector<fs::path> roots = {MARKETSIM_PRESET_DIR, "configs",
                                       "../configs"};
  for (const auto& root : roots) {
    if (root.empty()) continue;
    const fs::path p = root / fs::path(name + ".json");
    if (fs::exists(p)) return p;
  }
  throw sim::ConfigInvalid("config not found (path or preset): " + name);
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw sim::ConfigInvalid("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw sim::ConfigInvalid("parse error in " + path.string() + ": " +
                             e.what());
  }
  return j;
}

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long long> steps;
  std::optional<std::string> group;
  std::optional<std::string> checkpoints;
  std::string out;
  bool force = false;
};

sim::ExperimentConfig build_config(const RunFlags& f, bool pretrain) {
  nlohmann::json j = read_json(resolve_config(f.config));
  if (f.seed) j["seed"] = *f.seed;
  if (f.steps) j["n_steps"] = *f.steps;
  if (f.group) j["group"] = *f.group;
  if (f.checkpoints) j["checkpoints"] = *f.checkpoints;
  if (pretrain) {
    // the manifest echo must reflect the run exactly, so override the
    // json before parsing rather than the parsed struct
    if (!f.steps)
      j["n_steps"] = j.value("pretrain_steps", static_cast<Step>(5000));
    j.erase("checkpoints");
    j["group"] = "untrained";
  }
  return sim::parse_config(j);
}

void print_run_summary(const sim::RunResult& r) {
  std::cerr << "run: " << r.steps << " steps, " << r.n_trades << " trades"
            << ", cash drift " << (r.cash_after - r.cash_before)
            << "c, inventory drift " << (r.inventory_after - r.inventory_before)
            << ", residual reserved " << r.residual_reserved << "c/"
            << r.residual_reserved_shares << "sh -> " << r.out_dir << "\n";
}

std::vector<double> csv_column(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    values.push_back(std::stod(line));
  }
  return values;
}

// mid per step from snapshots.jsonl; null mids carry the previous value.
std::vector<double> load_mid_series(const fs::path& run_dir, double fallback) {
  std::ifstream in(run_dir / "snapshots.jsonl");
  if (!in)
    throw std::runtime_error("no snapshots.jsonl under " + run_dir.string());
  std::vector<double> mids;
  double last = fallback;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json row = nlohmann::json::parse(line);
    if (!row["mid"].is_null()) last = row["mid"].get<double>();
    mids.push_back(last);
  }
  return mids;
}

void write_acf_csv(const fs::path& path, const std::vector<double>& values) {
  std::ofstream out(path);
  out << "lag,acf\n";
  for (std::size_t k = 0; k < values.size(); ++k)
    out << k << ',' << values[k] << '\n';
}

int cmd_simulate(const RunFlags& flags, bool pretrain) {
  sim::ExperimentConfig config = build_config(flags, pretrain);
  std::cerr << (pretrain ? "pretrain" : "simulate") << ": seed=" << config.seed
            << " steps=" << config.n_steps
            << " group=" << sim::to_string(config.group) << "\n";
  sim::Simulation simulation(config, /*fresh_training=*/pretrain);
  const sim::RunResult result = simulation.run(flags.out, flags.force);
  print_run_summary(result);
  return 0;
}

int cmd_analyze(const std::string& run_dir_s, const std::string& out_s,
                const std::string& reference, int impact_horizon) {
  const fs::path run_dir(run_dir_s);
  const fs::path out_dir = out_s.empty() ? run_dir / "analysis" : fs::path(out_s);
  fs::create_directories(out_dir);
  const nlohmann::json manifest = read_json(run_dir / "run_manifest.json");
  const double initial_price = manifest.value("initial_price", 100.0);

  const std::vector<double> mids = load_mid_series(run_dir, initial_price);
  std::vector<double> reference_returns;
  if (!reference.empty()) reference_returns = csv_column(reference);

  nlohmann::json report;
  report["run"] = run_dir.string();
  report["n_steps"] = mids.size();

  const stats::StylizedFactsReport facts =
      stats::stylized_facts_report(mids, reference_returns);
  {
    std::ofstream out(out_dir / "kurtosis_table.csv");
    out << "dt,excess_kurtosis\n";
    for (std::size_t i = 0; i < facts.dt_grid.size(); ++i)
      out << facts.dt_grid[i] << ',' << facts.kurtosis[i] << '\n';
  }
  write_acf_csv(out_dir / "acf_returns.csv", facts.acf_returns);
  write_acf_csv(out_dir / "acf_abs.csv", facts.acf_abs);
  write_acf_csv(out_dir / "acf_sq.csv", facts.acf_sq);
  {
    std::ofstream out(out_dir / "qq.csv");
    out << "reference,sample\n";
    for (const auto& [a, b] : facts.qq) out << a << ',' << b << '\n';
  }
  report["dt_grid"] = facts.dt_grid;
  report["kurtosis"] = facts.kurtosis;
  report["acf_returns_lag1"] =
      facts.acf_returns.size() > 1 ? facts.acf_returns[1] : 0.0;

  // inventory percentile bands across agents, per step
  {
    std::ifstream in(run_dir / "accounts.csv");
    if (in) {
      std::map<Step, std::vector<double>> inventories;
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        const Step step = std::stoll(cell);
        std::getline(row, cell, ',');  // agent_id
        std::getline(row, cell, ',');  // cash
        std::getline(row, cell, ',');  // inventory
        inventories[step].push_back(std::stod(cell));
      }
      std::ofstream out(out_dir / "inventory_bands.csv");
      out << "step,p20,p50,p80\n";
      for (const auto& [step, values] : inventories) {
        out << step << ',' << stats::percentile(values, 20.0) << ','
            << stats::percentile(values, 50.0) << ','
            << stats::percentile(values, 80.0) << '\n';
      }
    }
  }

  if (manifest.contains("flash_event_starts") &&
      !manifest["flash_event_starts"].empty()) {
    std::vector<Step> starts;
    for (const auto& s : manifest["flash_event_starts"])
      starts.push_back(s.get<Step>() - 1);  // reference price one step before
    const stats::ImpactCurve curve =
        stats::price_impact(mids, starts, impact_horizon);
    std::ofstream out(out_dir / "impact.csv");
    out << "k,mean_relative_price\n";
    for (std::size_t k = 0; k < curve.mean_path.size(); ++k)
      out << k << ',' << curve.mean_path[k] << '\n';
    report["impact"] = {{"trough", curve.trough},
                        {"trough_index", curve.trough_index},
                        {"terminal", curve.terminal},
                        {"n_events", curve.n_events}};
  }

  std::ofstream out(out_dir / "report.json");
  out << report.dump(2) << '\n';
  std::cerr << "analyze: wrote " << out_dir.string() << "\n";
  return 0;
}

int cmd_probe(const std::string& run_dir, const std::vector<std::string>& groups,
              double threshold, const std::string& range,
              const std::string& out_s) {
  std::optional<std::pair<Step, Step>> step_range;
  if (!range.empty()) {
    const auto colon = range.find(':');
    if (colon == std::string::npos)
      throw sim::ConfigInvalid("--steps-range must be LO:HI");
    step_range = {std::stoll(range.substr(0, colon)),
                  std::stoll(range.substr(colon + 1))};
  }
  std::map<std::string, std::string> group_dirs;
  for (const std::string& g : groups) {
    const auto eq = g.find('=');
    if (eq == std::string::npos)
      throw sim::ConfigInvalid("--group must be NAME=CHECKPOINT_DIR");
    group_dirs[g.substr(0, eq)] = g.substr(eq + 1);
  }

  const stats::ProbeLog log = stats::load_probe_log(run_dir, step_range);
  const std::vector<stats::ProbeRow> rows =
      stats::probe_policies(log, group_dirs, threshold);

  const fs::path out_dir =
      out_s.empty() ? fs::path(run_dir) / "analysis" : fs::path(out_s);
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "probe.csv");
  out << "group,partition,agent,n_states,mean_u,mean_eps_s,mean_eps_a\n";
  for (const auto& r : rows) {
    out << r.group << ',' << r.partition << ',' << r.agent << ','
        << r.n_states << ',' << r.mean_u << ',' << r.mean_eps_s << ','
        << r.mean_eps_a << '\n';
  }
  std::cerr << "probe: " << rows.size() << " rows -> "
            << (out_dir / "probe.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agent-based limit order book market simulator"};
  app.require_subcommand(1);

  RunFlags flags;
  const auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config, "config file path or preset name")
        ->required();
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--steps", flags.steps, "override n_steps");
    cmd->add_option("--group", flags.group, "train | test | untrained");
    cmd->add_option("--checkpoints", flags.checkpoints,
                    "checkpoint directory to load");
    cmd->add_option("--out", flags.out, "output directory")->required();
    cmd->add_flag("--force", flags.force, "overwrite an existing run");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run one experiment");
  add_run_flags(simulate);
  CLI::App* pretrain = app.add_subcommand(
      "pretrain", "train from scratch for pretrain_steps and save checkpoints");
  add_run_flags(pretrain);

  std::string run_dir, out_dir, reference, range;
  int impact_horizon = 30;
  CLI::App* analyze =
      app.add_subcommand("analyze", "stylized facts and impact curves");
  analyze->add_option("--run", run_dir, "run directory")->required();
  analyze->add_option("--out", out_dir, "output directory (default run/analysis)");
  analyze->add_option("--reference", reference,
                      "reference returns CSV for the QQ comparison");
  analyze->add_option("--impact-horizon", impact_horizon,
                      "steps past each flash event");

  std::vector<std::string> probe_groups;
  double threshold = 0.2;
  CLI::App* probe =
      app.add_subcommand("probe", "evaluate checkpoints on logged states");
  probe->add_option("--run", run_dir, "run directory with the event log")
      ->required();
  probe->add_option("--group", probe_groups, "NAME=CHECKPOINT_DIR (repeatable)")
      ->required();
  probe->add_option("--threshold", threshold, "imbalance threshold");
  probe->add_option("--steps-range", range, "LO:HI step filter");
  probe->add_option("--out", out_dir, "output directory (default run/analysis)");

  CLI::App* replay =
      app.add_subcommand("replay", "re-run a manifest and compare trade tapes");
  replay->add_option("--run", run_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(flags, false);
    if (pretrain->parsed()) return cmd_simulate(flags, true);
    if (analyze->parsed())
      return cmd_analyze(run_dir, out_dir, reference, impact_horizon);
    if (probe->parsed())
      return cmd_probe(run_dir, probe_groups, threshold, range, out_dir);
    if (replay->parsed()) {
      if (sim::replay_matches(run_dir)) {
        std::cerr << "replay: trade tape reproduced bitwise\n";
        return 0;
      }
      std::cerr << "replay: trade tape MISMATCH\n";
      return 2;
    }
  } catch (const sim::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
