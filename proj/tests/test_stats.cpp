#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "marketsim/stats/analysis.hpp"
#include "marketsim/stats/series.hpp"

using namespace marketsim;
using namespace marketsim::stats;

namespace {

// direct-formula oracle, no shortcuts shared with the implementation
double kurtosis_oracle(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (const double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (const double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  return m4 / (m2 * m2) - 3.0;
}

}  // namespace

TEST_CASE("log returns definition and sampling step") {
  std::vector<double> prices{100.0, 110.0, 121.0, 133.1};
  const auto r1 = log_returns(prices, 1);
  REQUIRE(r1.size() == 3);
  CHECK(r1[0] == doctest::Approx(std::log(1.1)).epsilon(1e-12));
  const auto r2 = log_returns(prices, 2);
  REQUIRE(r2.size() == 1);
  CHECK(r2[0] == doctest::Approx(std::log(1.21)).epsilon(1e-12));
}

TEST_CASE("excess kurtosis matches the direct-formula oracle") {
  std::vector<double> spiky(100, 0.0);
  spiky[4] = 10.0;
  spiky[9] = -10.0;
  CHECK(excess_kurtosis(spiky) ==
        doctest::Approx(kurtosis_oracle(spiky)).epsilon(1e-12));

  std::mt19937_64 rng(123);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> gaussian(100000);
  for (double& v : gaussian) v = normal(rng);
  CHECK(std::abs(excess_kurtosis(gaussian)) < 0.1);
  CHECK(excess_kurtosis(gaussian) ==
        doctest::Approx(kurtosis_oracle(gaussian)).epsilon(1e-12));
}

TEST_CASE("kurtosis degenerate inputs throw") {
  CHECK_THROWS_AS(excess_kurtosis(std::vector<double>{1, 1, 1, 1}),
                  DegenerateSeries);
  CHECK_THROWS_AS(excess_kurtosis(std::vector<double>{1, 2, 3}),
                  DegenerateSeries);
}

TEST_CASE("kurtosis is invariant under affine transforms") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(5000);
  for (double& v : x) v = normal(rng) + 0.3 * normal(rng) * normal(rng);
  const double base = excess_kurtosis(x);
  std::vector<double> y = x;
  for (double& v : y) v = -3.7 * v + 11.0;
  CHECK(excess_kurtosis(y) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("acf basics and white-noise bands") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> noise(10000);
  for (double& v : noise) v = normal(rng);
  const auto rho = acf(noise, 20);
  CHECK(rho[0] == doctest::Approx(1.0));
  int inside = 0;
  const double band = 2.0 / std::sqrt(10000.0);
  for (int k = 1; k <= 20; ++k) {
    CHECK(rho[k] >= -1.0);
    CHECK(rho[k] <= 1.0);
    if (std::abs(rho[k]) < band) ++inside;
  }
  CHECK(inside >= 19);  // 95% of lags

  CHECK_THROWS_AS(acf(std::vector<double>{2, 2, 2, 2}, 2), DegenerateSeries);
}

TEST_CASE("acf of simulated AR(1) matches phi^k") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double phi = 0.5;
  std::vector<double> x(100000);
  double prev = 0.0;
  for (double& v : x) {
    prev = phi * prev + normal(rng);
    v = prev;
  }
  const auto rho = acf(x, 5);
  for (int k = 1; k <= 5; ++k)
    CHECK(std::abs(rho[k] - std::pow(phi, k)) < 0.02);
}

TEST_CASE("qq pairs of a distribution against itself lie on the diagonal") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(50000), b(50000);
  for (double& v : a) v = normal(rng);
  for (double& v : b) v = normal(rng);
  const auto pairs = qq_pairs(a, b);
  CHECK(pairs.size() == 101);
  // extreme sample quantiles are high-variance; check the interior
  for (std::size_t i = 1; i + 1 < pairs.size(); ++i)
    CHECK(std::abs(pairs[i].first - pairs[i].second) < 0.1);
}

TEST_CASE("pnl decomposition identity is exact") {
  // buy one lot at mid, mid rises one tick next step
  std::vector<double> cash{0.0, -10000.0, -10000.0};
  std::vector<double> inventory{0.0, 100.0, 100.0};
  std::vector<double> mid{100.0, 100.0, 100.01};
  const auto d = pnl_decompose(cash, inventory, mid);
  // element k covers the step from k to k+1, so index 1 is the mid move
  CHECK(d.d_inventory[1] == doctest::Approx(100.0 * 0.01).epsilon(1e-12));
  CHECK(d.d_spread[1] == doctest::Approx(0.0));
  for (std::size_t t = 0; t < d.d_total.size(); ++t)
    CHECK(d.d_total[t] == d.d_inventory[t] + d.d_spread[t]);  // exact
  // always-flat inventory: inventory component identically zero
  std::vector<double> flat(3, 0.0);
  const auto d2 = pnl_decompose(cash, flat, mid);
  for (const double v : d2.d_inventory) CHECK(v == 0.0);

  CHECK_THROWS_AS(pnl_decompose(cash, inventory, std::vector<double>{1.0}),
                  MisalignedSeries);
}

TEST_CASE("price impact on a constructed path") {
  // flat at 100, drop 1% over 5 steps, recover to -0.2%
  std::vector<double> mid(200, 100.0);
  for (int k = 0; k < 5; ++k) mid[50 + 1 + k] = 100.0 - 0.2 * (k + 1);
  for (int k = 0; k < 20; ++k)
    mid[56 + k] = 99.0 + (99.8 - 99.0) * (k + 1) / 20.0;
  for (int k = 76; k < 200; ++k) mid[k] = 99.8;

  std::vector<Step> starts{50};
  const auto curve = price_impact(mid, starts, 30);
  CHECK(curve.mean_path[0] == 1.0);  // exact
  CHECK(curve.trough == doctest::Approx(0.99).epsilon(1e-9));
  CHECK(curve.trough_index == 5);
  CHECK(curve.terminal == doctest::Approx(0.998).epsilon(1e-9));

  // constant price: curve identically one
  std::vector<double> flat(100, 50.0);
  const auto unit = price_impact(flat, std::vector<Step>{10, 40}, 20);
  CHECK(unit.n_events == 2);
  for (const double v : unit.mean_path) CHECK(v == doctest::Approx(1.0));

  // event window past the end of the series
  CHECK_THROWS_AS(price_impact(flat, std::vector<Step>{95}, 20),
                  WindowOutOfRange);
  // no events
  CHECK(price_impact(flat, std::vector<Step>{}, 20).n_events == 0);
}

TEST_CASE("stylized facts report shape") {
  // random walk long enough for the short grid
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal(0.0, 0.05);
  std::vector<double> mid(3000, 100.0);
  for (std::size_t i = 1; i < mid.size(); ++i) mid[i] = mid[i - 1] + normal(rng);
  const auto report = stylized_facts_report(mid);
  CHECK(report.dt_grid == std::vector<int>{1, 10, 30});
  CHECK(report.kurtosis.size() == 3);
  CHECK(report.acf_returns.size() == 51);
  CHECK(report.acf_returns[0] == doctest::Approx(1.0));
  CHECK(report.qq.empty());  // no reference series given

  // gaussian random walk: kurtosis near zero at dt = 1
  CHECK(std::abs(report.kurtosis[0]) < 0.3);

  CHECK_THROWS(stylized_facts_report(std::vector<double>(100, 1.0)));
}

TEST_CASE("percentile interpolates") {
  std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(percentile(v, 0.0) == doctest::Approx(1.0));
  CHECK(percentile(v, 50.0) == doctest::Approx(3.0));
  CHECK(percentile(v, 100.0) == doctest::Approx(5.0));
  CHECK(percentile(v, 25.0) == doctest::Approx(2.0));
}
