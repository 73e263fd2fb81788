#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "marketsim/types.hpp"

namespace marketsim::stats {

struct DegenerateSeries : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MisalignedSeries : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct WindowOutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Log returns of a price series sampled every dt points.
std::vector<double> log_returns(std::span<const double> prices, int dt);

// Sample fourth standardized moment minus 3. Throws DegenerateSeries for
// zero variance or length < 4.
double excess_kurtosis(std::span<const double> series);

// rho(k) = sum (x_t - xbar)(x_{t+k} - xbar) / sum (x_t - xbar)^2, k = 0..max_lag
std::vector<double> acf(std::span<const double> series, int max_lag);

// q equally spaced quantile pairs (reference, sample), both sorted via
// linear interpolation.
std::vector<std::pair<double, double>> qq_pairs(
    std::span<const double> reference, std::span<const double> sample,
    int n_quantiles = 101);

double percentile(std::vector<double> values, double p);

}  // namespace marketsim::stats
