#include "marketsim/stats/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace marketsim::stats {

StylizedFactsReport stylized_facts_report(
    std::span<const double> mid_series,
    std::span<const double> reference_returns, int max_lag) {
  if (mid_series.size() < 2000)
    throw DegenerateSeries("stylized facts need >= 2000 steps of mids");
  StylizedFactsReport report;
  report.dt_grid = mid_series.size() >= 7200 ? std::vector<int>{1, 30, 60, 120}
                                             : std::vector<int>{1, 10, 30};
  for (const int dt : report.dt_grid)
    report.kurtosis.push_back(excess_kurtosis(log_returns(mid_series, dt)));

  const std::vector<double> r1 = log_returns(mid_series, 1);
  std::vector<double> r_abs(r1.size()), r_sq(r1.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    r_abs[i] = std::abs(r1[i]);
    r_sq[i] = r1[i] * r1[i];
  }
  report.acf_returns = acf(r1, max_lag);
  report.acf_abs = acf(r_abs, max_lag);
  report.acf_sq = acf(r_sq, max_lag);

  if (!reference_returns.empty()) report.qq = qq_pairs(reference_returns, r1);
  return report;
}

PnlDecomposition pnl_decompose(std::span<const double> cash_dollars,
                               std::span<const double> inventory_shares,
                               std::span<const double> mid_dollars) {
  const std::size_t n = cash_dollars.size();
  if (inventory_shares.size() != n || mid_dollars.size() != n)
    throw MisalignedSeries("pnl_decompose: series lengths differ");
  PnlDecomposition d;
  if (n == 0) return d;
  double cum_t = 0.0, cum_i = 0.0, cum_s = 0.0;
  for (std::size_t t = 1; t < n; ++t) {
    const double d_total = (cash_dollars[t] - cash_dollars[t - 1]) +
                           inventory_shares[t] * mid_dollars[t] -
                           inventory_shares[t - 1] * mid_dollars[t - 1];
    const double d_inv =
        inventory_shares[t - 1] * (mid_dollars[t] - mid_dollars[t - 1]);
    const double d_spread = d_total - d_inv;
    cum_t += d_total;
    cum_i += d_inv;
    cum_s += d_spread;
    d.d_total.push_back(d_total);
    d.d_inventory.push_back(d_inv);
    d.d_spread.push_back(d_spread);
    d.cum_total.push_back(cum_t);
    d.cum_inventory.push_back(cum_i);
    d.cum_spread.push_back(cum_s);
  }
  return d;
}

ImpactCurve price_impact(std::span<const double> mid_series,
                         std::span<const Step> event_starts, int horizon) {
  ImpactCurve curve;
  if (event_starts.empty()) return curve;
  curve.mean_path.assign(static_cast<std::size_t>(horizon) + 1, 0.0);
  for (const Step t0 : event_starts) {
    if (t0 < 0 || static_cast<std::size_t>(t0 + horizon) >= mid_series.size())
      throw WindowOutOfRange("price_impact: event window exceeds series");
    const double base = mid_series[static_cast<std::size_t>(t0)];
    for (int k = 0; k <= horizon; ++k)
      curve.mean_path[static_cast<std::size_t>(k)] +=
          mid_series[static_cast<std::size_t>(t0 + k)] / base;
  }
  for (double& v : curve.mean_path)
    v /= static_cast<double>(event_starts.size());
  curve.n_events = event_starts.size();
  const auto min_it =
      std::min_element(curve.mean_path.begin(), curve.mean_path.end());
  curve.trough = *min_it;
  curve.trough_index =
      static_cast<int>(min_it - curve.mean_path.begin());
  curve.terminal = curve.mean_path.back();
  return curve;
}

}  // namespace marketsim::stats
