#include "marketsim/sim/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "marketsim/io/hash.hpp"

namespace marketsim::sim {

namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr AgentId kUtilAgent = 0;
constexpr const char* kVersion = "0.1.0";

}  // namespace

void seed_book(exch::Exchange& exchange, Ticks initial_price_ticks,
               AgentId util_id) {
  for (int level = 1; level <= 5; ++level) {
    exchange.route(util_id,
                   exch::SubmitIntent{Side::Bid, OrderKind::Limit,
                                      initial_price_ticks - level,
                                      10 * kLotShares},
                   0, /*immediate=*/true);
    exchange.route(util_id,
                   exch::SubmitIntent{Side::Ask, OrderKind::Limit,
                                      initial_price_ticks + level,
                                      10 * kLotShares},
                   0, /*immediate=*/true);
  }
  exchange.match_until(0);
}

// Buffered writers for the run's output files.
struct RunWriters {
  std::ofstream trades;
  std::ofstream accounts;
  std::ofstream snapshots;
  std::ofstream rewards;
  std::ofstream training;

  explicit RunWriters(const fs::path& dir) {
    trades.open(dir / "trades.csv");
    trades << "step,price_ticks,quantity,taker_agent,maker_agent,self_trade_flag\n";
    accounts.open(dir / "accounts.csv");
    accounts << "step,agent_id,cash,inventory,pnl_total,pnl_inventory,pnl_spread\n";
    snapshots.open(dir / "snapshots.jsonl");
    rewards.open(dir / "rewards.csv");
    rewards << "step,agent_id,obs_hash,action0,action1,action2,reward\n";
    training.open(dir / "training_log.csv");
    training << "step,agent_id,mean_ratio,clip_fraction,policy_loss,value_loss,"
                "entropy,aborted\n";
  }
};

Simulation::Simulation(ExperimentConfig config, bool fresh_training)
    : config_(std::move(config)),
      fresh_training_(fresh_training),
      shuffle_rng_(config_.seed ^ 0x5851f42d4c957f2dULL) {
  training_ = fresh_training_ || config_.training;
  exchange_ = std::make_unique<exch::Exchange>(config_.seed ^ 0xa24baed4963ee407ULL,
                                               config_.latency);
  mid_carry_ticks_ = static_cast<double>(config_.initial_price_ticks());
  build_agents();
  seed_book(*exchange_, config_.initial_price_ticks(), kUtilAgent);
  // Anchor the decomposition at the endowment so that
  // pnl_total == pnl_inventory + pnl_spread holds from the first row.
  for (const auto& [id, acct] : exchange_->accounts()) {
    auto& tracker = trackers_[id];
    tracker.init = true;
    tracker.last_pnl = 0.0;
    tracker.last_mid_ticks = static_cast<double>(config_.initial_price_ticks());
    tracker.last_inventory = acct.inventory;
  }
  if (!fresh_training_ && config_.checkpoint_dir)
    load_checkpoints(*config_.checkpoint_dir);
}

Simulation::~Simulation() = default;

void Simulation::build_agents() {
  std::mt19937_64 endow_rng(config_.seed ^ 0x94d049bb133111ebULL);
  std::mt19937_64 jitter_rng(config_.seed ^ 0xbf58476d1ce4e5b9ULL);

  // utility account backing the genesis ladder; it never acts
  {
    const Cents ladder_cost =
        5 * (config_.initial_price_ticks() + 5) * 10 * kLotShares;
    auto& acct =
        exchange_->add_account(kUtilAgent, 2 * ladder_cost, 50 * kLotShares, 0,
                               config_.initial_price_ticks());
    agent_manifest_.push_back({{"id", kUtilAgent},
                               {"name", "util"},
                               {"class", "util"},
                               {"initial_cash_cents", acct.initial_cash},
                               {"initial_inventory", acct.inventory}});
  }

  const auto draw_cash = [&]() -> Cents {
    const double u = rl::uniform01(endow_rng);
    const double d = config_.initial_cash_range.first +
                     u * (config_.initial_cash_range.second -
                          config_.initial_cash_range.first);
    return static_cast<Cents>(std::llround(d * 100.0));
  };
  const auto draw_inventory = [&]() -> Shares {
    const auto [lo, hi] = config_.initial_inventory_lots_range;
    const Shares span = hi - lo + 1;
    const Shares lots =
        lo + static_cast<Shares>(endow_rng() % static_cast<std::uint64_t>(span));
    return lots * kLotShares;
  };
  const auto jitter = [&](double v) {
    if (config_.hyperparameter_jitter <= 0.0) return v;
    const double u = 2.0 * rl::uniform01(jitter_rng) - 1.0;
    return v * (1.0 + config_.hyperparameter_jitter * u);
  };

  AgentId next_id = 1;
  for (agents::MmParams params : config_.mm_agents) {
    params.omega = std::min(1.0, jitter(params.omega));
    params.gamma_inv = jitter(params.gamma_inv);
    params.alpha = jitter(params.alpha);
    const AgentId id = next_id++;
    const auto& acct = exchange_->add_account(id, draw_cash(), draw_inventory(),
                                              config_.short_bound_shares,
                                              config_.initial_price_ticks());
    auto agent = std::make_unique<agents::MarketMaker>(
        id, params, config_.ppo, config_.scales,
        config_.seed ^ (0x100000001b3ULL * id));
    mm_ids_.push_back(id);
    agent_manifest_.push_back(
        {{"id", id},
         {"name", agent->name()},
         {"class", "mm"},
         {"initial_cash_cents", acct.initial_cash},
         {"initial_inventory", acct.inventory},
         {"params",
          {{"omega", params.omega},
           {"gamma", params.gamma_inv},
           {"alpha", params.alpha},
           {"target_provision", params.target_provision},
           {"eps_s", {params.eps_s_lo, params.eps_s_hi}},
           {"eps_a", {params.eps_a_lo, params.eps_a_hi}}}}});
    agents_.push_back(std::move(agent));
  }
  for (agents::LtParams params : config_.lt_agents) {
    params.omega = std::min(1.0, jitter(params.omega));
    params.gamma_inv = jitter(params.gamma_inv);
    params.alpha = jitter(params.alpha);
    const AgentId id = next_id++;
    const auto& acct = exchange_->add_account(id, draw_cash(), draw_inventory(),
                                              config_.short_bound_shares,
                                              config_.initial_price_ticks());
    auto agent = std::make_unique<agents::LiquidityTaker>(
        id, params, config_.ppo, config_.scales,
        config_.seed ^ (0x100000001b3ULL * id), config_.lt_reward_mode);
    lt_agents_.push_back(agent.get());
    agent_manifest_.push_back({{"id", id},
                               {"name", agent->name()},
                               {"class", "lt"},
                               {"initial_cash_cents", acct.initial_cash},
                               {"initial_inventory", acct.inventory},
                               {"params",
                                {{"omega", params.omega},
                                 {"gamma", params.gamma_inv},
                                 {"alpha", params.alpha},
                                 {"f_buy", params.f_buy},
                                 {"f_sell", params.f_sell},
                                 {"tau", params.tau},
                                 {"order_size", params.order_size_lots}}}});
    agents_.push_back(std::move(agent));
  }
  for (int i = 0; i < config_.zi.count; ++i) {
    const AgentId id = next_id++;
    const auto& acct = exchange_->add_account(id, draw_cash(), draw_inventory(),
                                              config_.short_bound_shares,
                                              config_.initial_price_ticks());
    agents_.push_back(std::make_unique<agents::ZeroIntelligence>(
        id, config_.zi.params, config_.seed ^ (0x100000001b3ULL * id),
        config_.initial_price_ticks()));
    agent_manifest_.push_back({{"id", id},
                               {"name", agents_.back()->name()},
                               {"class", "zi"},
                               {"initial_cash_cents", acct.initial_cash},
                               {"initial_inventory", acct.inventory}});
  }
  if (config_.flash) {
    const AgentId id = next_id++;
    // endowed with the full schedule's inventory so the sales never short
    const auto& sched = config_.flash->schedule;
    const Shares stock = static_cast<Shares>(sched.n_events) *
                         sched.active_steps * sched.lots_per_order * kLotShares;
    const auto& acct = exchange_->add_account(id, draw_cash(), stock, 0,
                                              config_.initial_price_ticks());
    agents_.push_back(std::make_unique<agents::FlashSaleAgent>(id, sched));
    agent_manifest_.push_back({{"id", id},
                               {"name", agents_.back()->name()},
                               {"class", "flash"},
                               {"initial_cash_cents", acct.initial_cash},
                               {"initial_inventory", acct.inventory}});
  }
}

void Simulation::load_checkpoints(const std::string& dir) {
  for (auto& agent : agents_) {
    if (!agent->is_rl()) continue;
    const std::string path =
        (fs::path(dir) / (agent->name() + ".ckpt")).string();
    if (!fs::exists(path))
      throw ConfigInvalid("missing checkpoint for agent " + agent->name() +
                          ": " + path);
    rl::LoadedCheckpoint loaded = rl::load_checkpoint(path);
    static_cast<agents::RlAgentBase*>(agent.get())
        ->load_nets(std::move(loaded.nets));
    loaded_checkpoint_hashes_[agent->name() + ".ckpt"] = io::hash_file(path);
  }
}

void Simulation::step_once(Step step, RunWriters& writers, RunResult& result) {
  const auto snapshot_pre = exchange_->book().snapshot(step);
  const bool mid_defined = snapshot_pre.has_value();
  if (mid_defined) {
    mid_carry_ticks_ = snapshot_pre->mid_ticks;
    provision_pre_ =
        agents::liquidity_provision(*snapshot_pre, mm_ids_).provision;
  }

  if (config_.informed) {
    const auto [fb, fs_target] = config_.informed->schedule.fractions_at(step);
    for (auto* lt : lt_agents_) {
      lt->params().f_buy = fb;
      lt->params().f_sell = fs_target;
    }
  }

  agents::StepContext ctx;
  ctx.step = step;
  ctx.snapshot = &snapshot_pre;
  ctx.mid_ticks = mid_carry_ticks_;
  ctx.mid_defined = mid_defined;
  ctx.exchange = exchange_.get();
  ctx.mm_provision = &provision_pre_;
  ctx.training = training_;

  std::vector<std::size_t> order(agents_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), shuffle_rng_);
  for (auto& agent : agents_) agent->record() = agents::StepRecord{};
  for (const std::size_t i : order) agents_[i]->act(ctx);

  const std::vector<exch::TradeRecord> trades = exchange_->match_until(step);
  result.n_trades += trades.size();

  const auto snapshot_post = exchange_->book().snapshot(step);
  const bool post_defined = snapshot_post.has_value();
  if (post_defined) {
    mid_carry_ticks_ = snapshot_post->mid_ticks;
    provision_post_ =
        agents::liquidity_provision(*snapshot_post, mm_ids_).provision;
  }

  agents::PostStepContext post;
  post.step = step;
  post.mid_ticks = mid_carry_ticks_;
  post.mid_defined = post_defined;
  post.trades = trades;
  post.exchange = exchange_.get();
  post.mm_provision = &provision_post_;
  for (auto& agent : agents_) agent->post_step(post);

  // ---- logging ----
  for (const auto& t : trades) {
    writers.trades << t.step << ',' << t.price << ',' << t.quantity << ','
                   << t.taker_agent << ',' << t.maker_agent << ','
                   << (t.self_trade ? 1 : 0) << '\n';
  }

  nlohmann::json snap_row;
  snap_row["step"] = step;
  if (post_defined) {
    snap_row["mid"] = tick_dollars(snapshot_post->mid_ticks);
    snap_row["spread"] = tick_dollars(
        static_cast<double>(snapshot_post->spread_ticks));
    const auto levels = [](const std::vector<lob::DepthLevel>& ls) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& l : ls) arr.push_back({l.price, l.quantity});
      return arr;
    };
    snap_row["bids"] = levels(snapshot_post->bids);
    snap_row["asks"] = levels(snapshot_post->asks);
    nlohmann::json mm = nlohmann::json::object();
    for (const AgentId id : mm_ids_) {
      Shares shares = 0;
      for (const auto& side : {snapshot_post->bids, snapshot_post->asks})
        for (const auto& level : side) {
          auto it = level.by_agent.find(id);
          if (it != level.by_agent.end()) shares += it->second;
        }
      mm[std::to_string(id)] = shares;
    }
    snap_row["mm"] = mm;
  } else {
    snap_row["mid"] = nullptr;
  }
  writers.snapshots << snap_row.dump() << '\n';

  const double mid_ticks = mid_carry_ticks_;
  for (const auto& [id, acct] : exchange_->accounts()) {
    auto& tracker = trackers_[id];
    const double pnl = exchange_->mark_to_mid(id, mid_ticks);
    if (tracker.init) {
      const double d_total = pnl - tracker.last_pnl;
      const double d_inv = static_cast<double>(tracker.last_inventory) *
                           tick_dollars(mid_ticks - tracker.last_mid_ticks);
      tracker.cum_inventory += d_inv;
      tracker.cum_spread += d_total - d_inv;
    }
    tracker.init = true;
    tracker.last_pnl = pnl;
    tracker.last_mid_ticks = mid_ticks;
    tracker.last_inventory = acct.inventory;
    writers.accounts << step << ',' << id << ',' << fmt_double(dollars(acct.cash))
                     << ',' << acct.inventory << ',' << fmt_double(pnl) << ','
                     << fmt_double(tracker.cum_inventory) << ','
                     << fmt_double(tracker.cum_spread) << '\n';
  }

  for (auto& agent : agents_) {
    const auto& rec = agent->record();
    if (!rec.acted) continue;
    writers.rewards << step << ',' << agent->id() << ','
                    << io::hex64(rec.obs_hash);
    for (int k = 0; k < 3; ++k) {
      writers.rewards << ',';
      if (k < static_cast<int>(rec.action.size()))
        writers.rewards << fmt_double(rec.action[k]);
    }
    writers.rewards << ',' << fmt_double(rec.reward) << '\n';
  }
  for (auto& agent : agents_) {
    for (const auto& ev : agent->training_events()) {
      writers.training << ev.step << ',' << agent->id() << ','
                       << fmt_double(ev.diag.mean_ratio) << ','
                       << fmt_double(ev.diag.clip_fraction) << ','
                       << fmt_double(ev.diag.policy_loss) << ','
                       << fmt_double(ev.diag.value_loss) << ','
                       << fmt_double(ev.diag.entropy) << ','
                       << (ev.diag.aborted ? 1 : 0) << '\n';
      if (ev.diag.aborted)
        throw std::runtime_error("non-finite PPO loss for agent " +
                                 agent->name());
    }
    agent->training_events().clear();
  }

  result.mid_series_dollars.push_back(tick_dollars(mid_ticks));
}

void Simulation::run_stepped(RunWriters& writers, RunResult& result) {
  for (Step step = 0; step < config_.n_steps; ++step)
    step_once(step, writers, result);
}

void Simulation::run_realtime(RunWriters& writers, RunResult& result) {
  // Same per-step semantics, but agents act from their own free-running
  // threads while the matcher paces the clock. Excluded from the bitwise
  // determinism contract.
  std::mutex mtx;
  std::atomic<Step> clock{0};
  std::atomic<bool> done{false};

  std::vector<std::thread> workers;
  workers.reserve(agents_.size());
  for (auto& agent : agents_) {
    workers.emplace_back([&, a = agent.get()]() {
      Step last_acted = -1;
      while (!done.load(std::memory_order_acquire)) {
        const Step now = clock.load(std::memory_order_acquire);
        if (now == last_acted || now >= config_.n_steps) {
          std::this_thread::yield();
          continue;
        }
        std::lock_guard<std::mutex> lock(mtx);
        const Step step = clock.load(std::memory_order_relaxed);
        if (step == last_acted || step >= config_.n_steps) continue;
        last_acted = step;
        const auto snapshot = exchange_->book().snapshot(step);
        agents::StepContext ctx;
        ctx.step = step;
        ctx.snapshot = &snapshot;
        ctx.mid_defined = snapshot.has_value();
        ctx.mid_ticks = snapshot ? snapshot->mid_ticks : mid_carry_ticks_;
        ctx.exchange = exchange_.get();
        ctx.mm_provision = &provision_pre_;
        ctx.training = training_;
        a->act(ctx);
      }
    });
  }

  const auto pace =
      std::chrono::duration<double>(config_.realtime_step_seconds);
  for (Step step = 0; step < config_.n_steps; ++step) {
    clock.store(step, std::memory_order_release);
    std::this_thread::sleep_for(pace);
    std::lock_guard<std::mutex> lock(mtx);
    const std::vector<exch::TradeRecord> trades = exchange_->match_until(step);
    result.n_trades += trades.size();
    const auto snap = exchange_->book().snapshot(step);
    if (snap) {
      mid_carry_ticks_ = snap->mid_ticks;
      provision_pre_ = agents::liquidity_provision(*snap, mm_ids_).provision;
    }
    agents::PostStepContext post;
    post.step = step;
    post.mid_ticks = mid_carry_ticks_;
    post.mid_defined = snap.has_value();
    post.trades = trades;
    post.exchange = exchange_.get();
    post.mm_provision = &provision_pre_;
    for (auto& agent : agents_) agent->post_step(post);
    for (const auto& t : trades) {
      writers.trades << t.step << ',' << t.price << ',' << t.quantity << ','
                     << t.taker_agent << ',' << t.maker_agent << ','
                     << (t.self_trade ? 1 : 0) << '\n';
    }
    result.mid_series_dollars.push_back(tick_dollars(mid_carry_ticks_));
  }
  done.store(true, std::memory_order_release);
  for (auto& w : workers) w.join();
}

RunResult Simulation::run(const std::string& out_dir, bool force) {
  const fs::path dir(out_dir);
  if (fs::exists(dir / "run_manifest.json") && !force)
    throw ConfigInvalid("output directory already holds a run (use force): " +
                        out_dir);
  fs::create_directories(dir);
  fs::create_directories(dir / "checkpoints");

  RunResult result;
  result.out_dir = out_dir;
  result.cash_before = exchange_->total_cash();
  result.inventory_before = exchange_->total_inventory();
  if (config_.flash)
    result.flash_event_starts = config_.flash->schedule.event_starts();

  {
    RunWriters writers(dir);
    if (config_.mode == RunMode::Stepped) {
      run_stepped(writers, result);
    } else {
      run_realtime(writers, result);
    }
  }
  result.steps = config_.n_steps;

  // run-end audit: every reservation must unwind exactly
  exchange_->cancel_all();
  for (const auto& [id, acct] : exchange_->accounts()) {
    result.residual_reserved += acct.reserved;
    result.residual_reserved_shares += acct.reserved_shares;
  }
  result.cash_after = exchange_->total_cash();
  result.inventory_after = exchange_->total_inventory();

  write_checkpoints((dir / "checkpoints").string());
  write_manifest(out_dir, result);
  return result;
}

void Simulation::write_checkpoints(const std::string& dir) {
  for (auto& agent : agents_) {
    auto* nets = agent->nets();
    if (nets == nullptr) continue;
    nlohmann::json meta;
    meta["agent_id"] = agent->id();
    meta["name"] = agent->name();
    if (auto* mm = dynamic_cast<agents::MarketMaker*>(agent.get())) {
      meta["class"] = "mm";
      meta["params"] = {{"omega", mm->params().omega},
                        {"gamma", mm->params().gamma_inv},
                        {"alpha", mm->params().alpha},
                        {"target_provision", mm->params().target_provision},
                        {"eps_s", {mm->params().eps_s_lo, mm->params().eps_s_hi}},
                        {"eps_a", {mm->params().eps_a_lo, mm->params().eps_a_hi}}};
    } else {
      meta["class"] = "lt";
    }
    rl::save_checkpoint((fs::path(dir) / (agent->name() + ".ckpt")).string(),
                        *nets,
                        static_cast<agents::RlAgentBase*>(agent.get())->ppo_config(),
                        meta);
  }
}

void Simulation::write_manifest(const std::string& out_dir,
                                const RunResult& result) {
  const fs::path dir(out_dir);
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["seed"] = config_.seed;
  manifest["n_steps"] = config_.n_steps;
  manifest["group"] = fresh_training_ ? "pretrain" : to_string(config_.group);
  manifest["config"] = config_.echo;
  manifest["agents"] = agent_manifest_;
  manifest["flash_event_starts"] = result.flash_event_starts;
  manifest["initial_price"] = config_.initial_price_dollars;

  nlohmann::json outputs = nlohmann::json::object();
  for (const char* name :
       {"trades.csv", "accounts.csv", "snapshots.jsonl", "rewards.csv"}) {
    outputs[name] = io::hash_file((dir / name).string());
  }
  manifest["outputs"] = outputs;

  nlohmann::json ckpts = nlohmann::json::object();
  for (auto& agent : agents_) {
    if (!agent->is_rl()) continue;
    const fs::path p = dir / "checkpoints" / (agent->name() + ".ckpt");
    ckpts[agent->name()] = io::hash_file(p.string());
  }
  manifest["checkpoints"] = ckpts;
  manifest["loaded_checkpoints"] = loaded_checkpoint_hashes_;

  std::ofstream out(dir / "run_manifest.json");
  out << manifest.dump(2) << '\n';
}

bool replay_matches(const std::string& run_dir) {
  const fs::path dir(run_dir);
  std::ifstream in(dir / "run_manifest.json");
  if (!in) throw ConfigInvalid("no run_manifest.json in " + run_dir);
  nlohmann::json manifest;
  in >> manifest;
  ExperimentConfig config = parse_config(manifest.at("config"));
  if (config.mode != RunMode::Stepped)
    throw ConfigInvalid("replay is defined for stepped-mode runs only");
  const bool fresh = manifest.value("group", "") == "pretrain";

  const fs::path tmp = dir / "replay_tmp";
  fs::remove_all(tmp);
  Simulation sim(config, fresh);
  sim.run(tmp.string(), /*force=*/true);
  // Compare against the artifact itself, not the recorded hash, so a
  // tampered tape is caught as well as a non-reproducing config echo.
  const bool same = io::hash_file((tmp / "trades.csv").string()) ==
                    io::hash_file((dir / "trades.csv").string());
  fs::remove_all(tmp);
  return same;
}

}  // namespace marketsim::sim
