#pragma once

#include <map>
#include <optional>
#include <string>

#include "marketsim/stats/series.hpp"

namespace marketsim::stats {

struct StylizedFactsReport {
  std::vector<int> dt_grid;
  std::vector<double> kurtosis;        // aligned with dt_grid
  std::vector<double> acf_returns;     // lags 0..max_lag at dt = 1
  std::vector<double> acf_abs;
  std::vector<double> acf_sq;
  std::vector<std::pair<double, double>> qq;  // empty without a reference
};

// mid prices sampled once per step, in dollars. Uses the full dt grid
// {1,30,60,120} for runs of at least two simulated hours, else {1,10,30}.
StylizedFactsReport stylized_facts_report(
    std::span<const double> mid_series,
    std::span<const double> reference_returns = {}, int max_lag = 50);

struct PnlDecomposition {
  std::vector<double> d_total;      // per step
  std::vector<double> d_inventory;  // inv_{t-1} * (mid_t - mid_{t-1})
  std::vector<double> d_spread;     // d_total - d_inventory
  std::vector<double> cum_total;
  std::vector<double> cum_inventory;
  std::vector<double> cum_spread;
};

// Exact per-step identity: d_total = d_spread + d_inventory.
PnlDecomposition pnl_decompose(std::span<const double> cash_dollars,
                               std::span<const double> inventory_shares,
                               std::span<const double> mid_dollars);

struct ImpactCurve {
  std::vector<double> mean_path;  // k = 0..horizon, value 1.0 at k = 0
  double trough = 1.0;
  int trough_index = 0;
  double terminal = 1.0;
  std::size_t n_events = 0;
};

// event_starts are the reference steps t0; the path is p_{t0+k}/p_{t0}
// averaged over events.
ImpactCurve price_impact(std::span<const double> mid_series,
                         std::span<const Step> event_starts, int horizon);

}  // namespace marketsim::stats
