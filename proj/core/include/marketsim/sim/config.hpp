#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "marketsim/agents/agents.hpp"
#include "marketsim/exch/exchange.hpp"

namespace marketsim::sim {

struct ConfigInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RunMode { Stepped, Realtime };
enum class Group { ContinualTraining, Testing, Untrained };

struct ZiGroupConfig {
  int count = 0;
  agents::ZiParams params;
};

struct FlashConfig {
  agents::FlashSaleSchedule schedule;
};

struct InformedConfig {
  agents::InformedSchedule schedule;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  Step n_steps = 0;
  RunMode mode = RunMode::Stepped;
  Group group = Group::Untrained;
  bool training = false;  // derived from group when RL agents are present
  Step pretrain_steps = 5000;

  double initial_price_dollars = 100.0;
  std::pair<double, double> initial_cash_range = {0.5e6, 2e6};
  std::pair<Shares, Shares> initial_inventory_lots_range = {-100, 100};
  Shares short_bound_shares = 10000;
  double hyperparameter_jitter = 0.0;  // +-fraction on omega, gamma, alpha

  exch::LatencyModel latency;
  rl::PpoConfig ppo;
  agents::ObsScales scales;
  agents::LtRewardMode lt_reward_mode = agents::LtRewardMode::DeviationChange;

  std::vector<agents::MmParams> mm_agents;
  std::vector<agents::LtParams> lt_agents;
  ZiGroupConfig zi;
  std::optional<FlashConfig> flash;
  std::optional<InformedConfig> informed;

  std::optional<std::string> checkpoint_dir;  // load source for train/test
  double realtime_step_seconds = 0.01;

  nlohmann::json echo;  // the resolved config, for the manifest

  Ticks initial_price_ticks() const {
    return static_cast<Ticks>(std::llround(initial_price_dollars * 100.0));
  }
  bool has_rl_agents() const { return !mm_agents.empty() || !lt_agents.empty(); }

  // Enforces the group/training/checkpoint invariants; throws ConfigInvalid.
  void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

Group group_from_string(const std::string& s);
std::string to_string(Group g);

}  // namespace marketsim::sim
