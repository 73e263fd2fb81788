#include "marketsim/sim/config.hpp"

#include <cmath>
#include <fstream>

namespace marketsim::sim {

namespace {

agents::MmParams parse_mm(const nlohmann::json& j) {
  agents::MmParams p;
  p.omega = j.value("omega", p.omega);
  p.gamma_inv = j.value("gamma", p.gamma_inv);
  p.alpha = j.value("alpha", p.alpha);
  p.target_provision = j.value("target_provision", p.target_provision);
  if (j.contains("eps_s")) {
    p.eps_s_lo = j["eps_s"][0];
    p.eps_s_hi = j["eps_s"][1];
  }
  if (j.contains("eps_a")) {
    p.eps_a_lo = j["eps_a"][0];
    p.eps_a_hi = j["eps_a"][1];
  }
  if (p.omega < 0.0 || p.omega > 1.0)
    throw ConfigInvalid("mm omega must be in [0,1]");
  if (p.eps_s_hi <= -1.0)
    throw ConfigInvalid("eps_s range must contain a value > -1");
  return p;
}

agents::LtParams parse_lt(const nlohmann::json& j) {
  agents::LtParams p;
  p.omega = j.value("omega", p.omega);
  p.gamma_inv = j.value("gamma", p.gamma_inv);
  p.alpha = j.value("alpha", p.alpha);
  p.f_buy = j.value("f_buy", p.f_buy);
  p.f_sell = j.value("f_sell", p.f_sell);
  p.tau = j.value("tau", p.tau);
  p.order_size_lots = j.value("order_size", p.order_size_lots);
  if (p.omega < 0.0 || p.omega > 1.0)
    throw ConfigInvalid("lt omega must be in [0,1]");
  if (p.f_buy < 0.0 || p.f_buy > 1.0 || p.f_sell < 0.0 || p.f_sell > 1.0)
    throw ConfigInvalid("lt target fractions must be in [0,1]");
  if (p.tau < 1) throw ConfigInvalid("lt tau must be >= 1");
  return p;
}

rl::PpoConfig parse_ppo(const nlohmann::json& j, rl::PpoConfig c) {
  c.clip_epsilon = j.value("clip_epsilon", c.clip_epsilon);
  c.discount = j.value("discount", c.discount);
  c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
  c.epochs = j.value("epochs", c.epochs);
  c.minibatch = j.value("minibatch", c.minibatch);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.value_coef = j.value("value_coef", c.value_coef);
  c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
  c.buffer_capacity = j.value("buffer_capacity", c.buffer_capacity);
  if (c.discount <= 0.0 || c.discount >= 1.0)
    throw ConfigInvalid("ppo discount must be in (0,1)");
  return c;
}

}  // namespace

Group group_from_string(const std::string& s) {
  if (s == "train" || s == "continual_training") return Group::ContinualTraining;
  if (s == "test" || s == "testing") return Group::Testing;
  if (s == "untrained") return Group::Untrained;
  throw ConfigInvalid("unknown group: " + s);
}

std::string to_string(Group g) {
  switch (g) {
    case Group::ContinualTraining: return "train";
    case Group::Testing: return "test";
    default: return "untrained";
  }
}

void ExperimentConfig::validate() const {
  if (n_steps < 0) throw ConfigInvalid("n_steps must be >= 0");
  if (initial_price_dollars <= 0.0)
    throw ConfigInvalid("initial_price must be > 0");
  if (latency.lo < 0 || latency.hi < latency.lo)
    throw ConfigInvalid("latency delays must satisfy 0 <= lo <= hi");
  const double psum = zi.params.p_market + zi.params.p_limit + zi.params.p_cancel;
  if (psum > 1.0 + 1e-12) throw ConfigInvalid("zi probabilities must sum <= 1");
  if (has_rl_agents()) {
    switch (group) {
      case Group::Untrained:
        if (training)
          throw ConfigInvalid("untrained group must not train");
        if (checkpoint_dir)
          throw ConfigInvalid("untrained group must not load checkpoints");
        break;
      case Group::Testing:
        if (training) throw ConfigInvalid("testing group must not train");
        if (!checkpoint_dir)
          throw ConfigInvalid("testing group requires a checkpoint dir");
        break;
      case Group::ContinualTraining:
        if (!training)
          throw ConfigInvalid("continual-training group must train");
        if (!checkpoint_dir)
          throw ConfigInvalid("continual-training group requires a checkpoint dir");
        break;
    }
  }
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig c;
  c.seed = j.value("seed", 0ULL);
  c.n_steps = j.value("n_steps", 0LL);
  const std::string mode = j.value("mode", "stepped");
  if (mode == "stepped") {
    c.mode = RunMode::Stepped;
  } else if (mode == "realtime") {
    c.mode = RunMode::Realtime;
  } else {
    throw ConfigInvalid("unknown mode: " + mode);
  }
  c.group = group_from_string(j.value("group", "untrained"));
  c.pretrain_steps = j.value("pretrain_steps", c.pretrain_steps);
  c.initial_price_dollars = j.value("initial_price", c.initial_price_dollars);
  if (j.contains("initial_cash_range")) {
    c.initial_cash_range = {j["initial_cash_range"][0],
                            j["initial_cash_range"][1]};
  }
  if (j.contains("initial_inventory_lots_range")) {
    c.initial_inventory_lots_range = {j["initial_inventory_lots_range"][0],
                                      j["initial_inventory_lots_range"][1]};
  }
  c.short_bound_shares = j.value("short_bound_shares", c.short_bound_shares);
  c.hyperparameter_jitter = j.value("jitter", c.hyperparameter_jitter);
  if (j.contains("latency")) {
    const auto& l = j["latency"];
    if (l.value("kind", "none") == "uniform") {
      c.latency.lo = l.value("lo", 0LL);
      c.latency.hi = l.value("hi", 0LL);
    }
  }
  if (j.contains("ppo")) c.ppo = parse_ppo(j["ppo"], c.ppo);
  if (j.contains("scales")) {
    const auto& s = j["scales"];
    c.scales.depth_scale_shares =
        s.value("depth_shares", c.scales.depth_scale_shares);
    c.scales.inventory_scale_shares =
        s.value("inventory_shares", c.scales.inventory_scale_shares);
    c.scales.tau_scale = s.value("tau", c.scales.tau_scale);
  }
  c.scales.initial_price_ticks =
      static_cast<double>(c.initial_price_ticks());
  const std::string lt_mode = j.value("lt_reward_mode", "change");
  if (lt_mode == "change") {
    c.lt_reward_mode = agents::LtRewardMode::DeviationChange;
  } else if (lt_mode == "level") {
    c.lt_reward_mode = agents::LtRewardMode::DeviationLevel;
  } else {
    throw ConfigInvalid("unknown lt_reward_mode: " + lt_mode);
  }
  c.realtime_step_seconds = j.value("realtime_step_seconds", c.realtime_step_seconds);

  const auto agents_j = j.value("agents", nlohmann::json::object());
  if (agents_j.contains("zi")) {
    const auto& z = agents_j["zi"];
    c.zi.count = z.value("count", 0);
    c.zi.params.p_market = z.value("p_market", c.zi.params.p_market);
    c.zi.params.p_limit = z.value("p_limit", c.zi.params.p_limit);
    c.zi.params.p_cancel = z.value("p_cancel", c.zi.params.p_cancel);
    c.zi.params.window_ticks = z.value("window_ticks", c.zi.params.window_ticks);
    c.zi.params.order_lots = z.value("order_lots", c.zi.params.order_lots);
    const std::string anchor = z.value("anchor", "book");
    if (anchor == "book") {
      c.zi.params.anchor = agents::ZiParams::Anchor::Book;
    } else if (anchor == "fundamental") {
      c.zi.params.anchor = agents::ZiParams::Anchor::Fundamental;
    } else {
      throw ConfigInvalid("unknown zi anchor: " + anchor);
    }
  }
  for (const auto& m : agents_j.value("mm", nlohmann::json::array()))
    c.mm_agents.push_back(parse_mm(m));
  for (const auto& l : agents_j.value("lt", nlohmann::json::array()))
    c.lt_agents.push_back(parse_lt(l));
  if (agents_j.contains("flash")) {
    const auto& f = agents_j["flash"];
    FlashConfig fc;
    fc.schedule.start_step = f.value("start_step", 0LL);
    fc.schedule.active_steps = f.value("active_steps", 5LL);
    fc.schedule.idle_steps = f.value("idle_steps", 400LL);
    fc.schedule.n_events = f.value("events", 0);
    fc.schedule.lots_per_order = f.value("lots_per_order", 300LL);
    c.flash = fc;
  }
  if (agents_j.contains("informed")) {
    const auto& inf = agents_j["informed"];
    InformedConfig ic;
    ic.schedule.phase_steps = inf.value("phase_steps", 10000LL);
    if (inf.contains("phases")) {
      ic.schedule.phases.clear();
      for (const auto& ph : inf["phases"])
        ic.schedule.phases.emplace_back(ph[0], ph[1]);
    }
    c.informed = ic;
  }
  if (j.contains("checkpoints")) c.checkpoint_dir = j["checkpoints"];

  c.training = c.has_rl_agents() && c.group == Group::ContinualTraining;
  c.echo = j;
  c.validate();
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace marketsim::sim
