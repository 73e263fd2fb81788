#pragma once

#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "marketsim/agents/observation.hpp"
#include "marketsim/lob/order_book.hpp"

namespace marketsim::stats {

struct NoStatesInPartition : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One logged market state reconstructed from a run directory, enough to
// rebuild any market maker's observation vector.
struct ProbeState {
  Step step = 0;
  lob::DepthSnapshot depth;
  std::deque<double> mid_history_ticks;  // trailing window, newest last
  double imbalance = 0.0;
  std::map<AgentId, double> provision;       // per MM agent
  std::map<AgentId, Shares> inventory;       // per agent, from accounts.csv
  std::map<AgentId, double> cash_dollars;    // per agent, from accounts.csv
};

struct ProbeLog {
  std::vector<ProbeState> states;
  agents::ObsScales scales;  // initial price from the manifest
  std::map<AgentId, double> initial_cash_dollars;
  std::optional<std::pair<Step, Step>> step_range;  // applied filter, if any
};

// Reads run_manifest.json, snapshots.jsonl and accounts.csv under run_dir.
// `step_range`, when set, keeps only states with step in [lo, hi).
ProbeLog load_probe_log(const std::string& run_dir,
                        std::optional<std::pair<Step, Step>> step_range = {});

struct ProbeRow {
  std::string group;      // caller's label for the checkpoint set
  std::string partition;  // "balanced" | "imbalanced"
  std::string agent;      // checkpoint name
  std::size_t n_states = 0;
  double mean_u = 0.0;
  double mean_eps_s = 0.0;
  double mean_eps_a = 0.0;
  std::vector<double> eps_s;  // per-state deterministic actions
  std::vector<double> eps_a;
};

// Feeds every logged state in each imbalance partition to every market
// maker checkpoint under each group's directory, sampling noise off, and
// returns the mapped action distributions. Throws NoStatesInPartition when
// a partition is empty.
std::vector<ProbeRow> probe_policies(
    const ProbeLog& log,
    const std::map<std::string, std::string>& group_checkpoint_dirs,
    double imbalance_threshold = 0.2);

}  // namespace marketsim::stats
