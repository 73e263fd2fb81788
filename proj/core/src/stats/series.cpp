#include "marketsim/stats/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace marketsim::stats {

std::vector<double> log_returns(std::span<const double> prices, int dt) {
  std::vector<double> r;
  if (dt < 1) throw std::invalid_argument("dt must be >= 1");
  for (std::size_t i = static_cast<std::size_t>(dt); i < prices.size();
       i += static_cast<std::size_t>(dt)) {
    r.push_back(std::log(prices[i] / prices[i - static_cast<std::size_t>(dt)]));
  }
  return r;
}

double excess_kurtosis(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 4) throw DegenerateSeries("kurtosis needs length >= 4");
  const double mean =
      std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double m2 = 0.0, m4 = 0.0;
  for (const double x : series) {
    const double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  if (m2 <= 0.0) throw DegenerateSeries("kurtosis of constant series");
  return m4 / (m2 * m2) - 3.0;
}

std::vector<double> acf(std::span<const double> series, int max_lag) {
  const std::size_t n = series.size();
  if (n < 2 || max_lag >= static_cast<int>(n))
    throw DegenerateSeries("acf needs max_lag < length");
  const double mean =
      std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double denom = 0.0;
  for (const double x : series) denom += (x - mean) * (x - mean);
  if (denom <= 0.0) throw DegenerateSeries("acf of constant series");
  std::vector<double> rho(static_cast<std::size_t>(max_lag) + 1);
  for (int k = 0; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(k) < n; ++t)
      num += (series[t] - mean) * (series[t + static_cast<std::size_t>(k)] - mean);
    rho[static_cast<std::size_t>(k)] = num / denom;
  }
  return rho;
}

namespace {
double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DegenerateSeries("quantile of empty series");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}
}  // namespace

std::vector<std::pair<double, double>> qq_pairs(
    std::span<const double> reference, std::span<const double> sample,
    int n_quantiles) {
  std::vector<double> ref(reference.begin(), reference.end());
  std::vector<double> smp(sample.begin(), sample.end());
  std::sort(ref.begin(), ref.end());
  std::sort(smp.begin(), smp.end());
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < n_quantiles; ++i) {
    const double p = static_cast<double>(i) / (n_quantiles - 1);
    pairs.emplace_back(quantile_sorted(ref, p), quantile_sorted(smp, p));
  }
  return pairs;
}

double percentile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p / 100.0);
}

}  // namespace marketsim::stats
