#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "marketsim/sim/config.hpp"

namespace marketsim::sim {

struct RunResult {
  Step steps = 0;
  Cents cash_before = 0;
  Cents cash_after = 0;
  Shares inventory_before = 0;
  Shares inventory_after = 0;
  Cents residual_reserved = 0;
  Shares residual_reserved_shares = 0;
  std::size_t n_trades = 0;
  std::vector<double> mid_series_dollars;  // one entry per step, post-match
  std::vector<Step> flash_event_starts;
  std::string out_dir;
};

// Symmetric genesis ladder owned by a passive utility account: 5 levels a
// side, one tick apart around the initial price, 10 lots per level.
void seed_book(exch::Exchange& exchange, Ticks initial_price_ticks,
               AgentId util_id);

class Simulation {
 public:
  // `fresh_training` runs with training on from random initialization
  // regardless of the configured group (the pretraining path).
  explicit Simulation(ExperimentConfig config, bool fresh_training = false);
  ~Simulation();

  // Executes the configured run and writes trades.csv, accounts.csv,
  // snapshots.jsonl, rewards.csv, training_log.csv, checkpoints/ and
  // run_manifest.json under out_dir.
  RunResult run(const std::string& out_dir, bool force = false);

  exch::Exchange& exchange() { return *exchange_; }
  const std::vector<std::unique_ptr<agents::Agent>>& agent_list() const {
    return agents_;
  }

 private:
  struct PnlTracker {
    bool init = false;
    double last_pnl = 0.0;
    double last_mid_ticks = 0.0;
    Shares last_inventory = 0;
    double cum_inventory = 0.0;
    double cum_spread = 0.0;
  };

  void build_agents();
  void load_checkpoints(const std::string& dir);
  void step_once(Step step, struct RunWriters& writers, RunResult& result);
  void run_stepped(struct RunWriters& writers, RunResult& result);
  void run_realtime(struct RunWriters& writers, RunResult& result);
  void write_checkpoints(const std::string& dir);
  void write_manifest(const std::string& out_dir, const RunResult& result);

  ExperimentConfig config_;
  bool fresh_training_ = false;
  bool training_ = false;
  std::unique_ptr<exch::Exchange> exchange_;
  std::vector<std::unique_ptr<agents::Agent>> agents_;
  std::vector<AgentId> mm_ids_;
  std::vector<agents::LiquidityTaker*> lt_agents_;
  std::mt19937_64 shuffle_rng_;
  double mid_carry_ticks_ = 0.0;
  std::map<AgentId, double> provision_pre_;
  std::map<AgentId, double> provision_post_;
  std::map<AgentId, PnlTracker> trackers_;
  std::map<std::string, std::string> loaded_checkpoint_hashes_;
  nlohmann::json agent_manifest_ = nlohmann::json::array();
};

// Re-runs the manifest's config and compares the trade tape hash.
// Returns true when the replay reproduces the original bitwise.
bool replay_matches(const std::string& run_dir);

}  // namespace marketsim::sim
