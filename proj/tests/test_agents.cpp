#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "marketsim/agents/agents.hpp"
#include "marketsim/rl/policy.hpp"

using namespace marketsim;
using namespace marketsim::agents;

TEST_CASE("quote price examples") {
  // mid 100.00, spread 1 tick, eps_s = eps_a = 0: half-spread each side of mid
  auto q = mm_quote_prices(10000.0, 1.0, 0.0, 0.0);
  CHECK(q.raw_bid_ticks == doctest::Approx(9999.5));
  CHECK(q.raw_ask_ticks == doctest::Approx(10000.5));
  CHECK(q.bid == 9999);
  CHECK(q.ask == 10001);

  // eps_s = 1 doubles the quoted spread
  q = mm_quote_prices(10000.0, 1.0, 1.0, 0.0);
  CHECK(q.raw_bid_ticks == doctest::Approx(9999.0));
  CHECK(q.raw_ask_ticks == doctest::Approx(10001.0));

  // eps_a shifts both quotes by s * eps_a
  q = mm_quote_prices(10000.0, 2.0, 0.0, 0.5);
  CHECK(q.raw_bid_ticks == doctest::Approx(10000.0));
  CHECK(q.raw_ask_ticks == doctest::Approx(10002.0));
}

TEST_CASE("quote algebra property: spread and midpoint shift") {
  std::mt19937_64 rng(17);
  const auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * rl::uniform01(rng);
  };
  for (int i = 0; i < 1000; ++i) {
    const double mid = uniform(5000.0, 20000.0);
    const double s = uniform(0.5, 20.0);
    const double eps_s = uniform(-0.9, 1.0);
    const double eps_a = uniform(-1.0, 1.0);
    const auto q = mm_quote_prices(mid, s, eps_s, eps_a);
    // quoted spread s * (1 + eps_s)
    CHECK(q.raw_ask_ticks - q.raw_bid_ticks ==
          doctest::Approx(s * (1.0 + eps_s)).epsilon(1e-9));
    // midpoint shifted by s * eps_a
    CHECK((q.raw_ask_ticks + q.raw_bid_ticks) / 2.0 - mid ==
          doctest::Approx(s * eps_a).epsilon(1e-9));
    // rounded quotes never cross
    CHECK(q.bid < q.ask);
  }
}

TEST_CASE("liquidity provision examples") {
  lob::DepthSnapshot depth;
  lob::DepthLevel bid;
  bid.price = 9999;
  bid.quantity = 400;
  bid.by_agent = {{1, 100}, {9, 300}};
  lob::DepthLevel ask;
  ask.price = 10001;
  ask.quantity = 300;
  ask.by_agent = {{2, 300}};
  depth.bids = {bid};
  depth.asks = {ask};

  const auto result = liquidity_provision(depth, {1, 2});
  CHECK(result.any);
  CHECK(result.provision.at(1) == doctest::Approx(0.25));
  CHECK(result.provision.at(2) == doctest::Approx(0.75));

  // no MM liquidity resting: all zero, flagged
  const auto none = liquidity_provision(depth, {5, 6});
  CHECK(!none.any);
  CHECK(none.provision.at(5) == 0.0);
}

TEST_CASE("mm reward formula including the preset-parameter case") {
  MmParams p;  // omega 0.5, gamma 0.15, alpha 0.09
  p.target_provision = 0.25;
  // d_pnl 100, d_pnl_inv 20, provision 0.25:
  // 0.5 * 0.09 * (100 - 0.15 * 20) - 0.5 * 0 = 4.365
  CHECK(mm_reward(100.0, 20.0, 0.25, p) == doctest::Approx(4.365).epsilon(1e-12));
  // inventory pnl enters as absolute value
  CHECK(mm_reward(100.0, -20.0, 0.25, p) == doctest::Approx(4.365).epsilon(1e-12));
  // provision deviation costs (1 - omega) * |P - P*|
  CHECK(mm_reward(0.0, 0.0, 0.75, p) == doctest::Approx(-0.25).epsilon(1e-12));
  // linear in d_pnl with slope omega * alpha
  const double r1 = mm_reward(10.0, 0.0, 0.25, p);
  const double r2 = mm_reward(11.0, 0.0, 0.25, p);
  CHECK(r2 - r1 == doctest::Approx(p.omega * p.alpha).epsilon(1e-12));
}

TEST_CASE("lt reward formula in both deviation modes") {
  LtParams p;  // omega 0.5, gamma 0.9, alpha 0.01
  // pnl term alone: 0.5 * 0.01 * (20 - 0.9 * 10) = 0.055
  CHECK(lt_reward(20.0, 10.0, 0.0, 0.0, 0.0, 0.0, p) ==
        doctest::Approx(0.055).epsilon(1e-12));
  // deviation-change mode: improving both deviations by 0.1 adds
  // (1 - omega) / 2 * 0.2 = 0.05
  CHECK(lt_reward(0.0, 0.0, 0.1, 0.2, 0.3, 0.4, p,
                  LtRewardMode::DeviationChange) ==
        doctest::Approx(0.05).epsilon(1e-12));
  // level mode penalizes the current deviations directly
  CHECK(lt_reward(0.0, 0.0, 0.1, 0.2, 0.3, 0.4, p,
                  LtRewardMode::DeviationLevel) ==
        doctest::Approx(-0.25 * (0.1 + 0.3)).epsilon(1e-12));
}

TEST_CASE("tanh affine maps into the configured range") {
  CHECK(tanh_affine(0.0, -1.0, 1.0) == doctest::Approx(0.0));
  CHECK(tanh_affine(0.0, 0.0, 1.0) == doctest::Approx(0.5));
  CHECK(tanh_affine(100.0, -0.5, 2.0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(tanh_affine(-100.0, -0.5, 2.0) == doctest::Approx(-0.5).epsilon(1e-6));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const double v = tanh_affine(10.0 * rl::gauss(rng), -0.25, 0.75);
    CHECK(v >= -0.25);
    CHECK(v <= 0.75);
  }
}

TEST_CASE("observation dimensions and padding") {
  ObsScales scales;
  scales.initial_price_ticks = 10000.0;
  lob::DepthSnapshot depth;
  lob::DepthLevel bid;
  bid.price = 9999;
  bid.quantity = 300;
  lob::DepthLevel ask;
  ask.price = 10001;
  ask.quantity = 200;
  depth.bids = {bid};
  depth.asks = {ask};
  depth.best_bid = 9999;
  depth.best_ask = 10001;
  depth.mid_ticks = 10000.0;
  depth.spread_ticks = 2;

  std::deque<double> mids{10000.0};  // padded to five entries
  MmParams mp;
  const auto mm_obs = mm_observation(mids, depth, 0.25, 500, 1e6, mp, scales);
  CHECK(mm_obs.size() == kMmObsDim);
  for (int i = 0; i < 5; ++i) CHECK(mm_obs[i] == doctest::Approx(1.0));
  // missing levels 2..5 are zeros
  CHECK(mm_obs[6] == 0.0);

  LtParams lp;
  const auto lt_obs = lt_observation(mids, depth, 500, 1e6, lp, scales);
  CHECK(lt_obs.size() == kLtObsDim);
  CHECK(lt_obs.back() == doctest::Approx(lp.tau / scales.tau_scale));
}

TEST_CASE("flash sale schedule") {
  FlashSaleSchedule s;
  s.start_step = 0;
  s.active_steps = 5;
  s.idle_steps = 400;
  s.n_events = 3;
  for (Step t = 0; t < 5; ++t) CHECK(s.active_at(t));
  for (Step t = 5; t < 405; ++t) CHECK(!s.active_at(t));
  CHECK(s.active_at(405));
  CHECK(s.active_at(409));
  CHECK(!s.active_at(410));
  CHECK(s.event_starts() == std::vector<Step>{0, 405, 810});
  CHECK(!s.active_at(810 + 5));  // after the last event
}

TEST_CASE("informed schedule phases hold the last phase") {
  InformedSchedule s;
  s.phase_steps = 100;
  CHECK(s.fractions_at(0) == std::pair{0.3, 0.4});
  CHECK(s.fractions_at(99) == std::pair{0.3, 0.4});
  CHECK(s.fractions_at(100) == std::pair{0.4, 0.35});
  CHECK(s.fractions_at(250) == std::pair{0.4, 0.4});
  CHECK(s.fractions_at(399) == std::pair{0.4, 0.3});
  CHECK(s.fractions_at(100000) == std::pair{0.4, 0.3});
}

TEST_CASE("market maker cancel-replaces at most one order per side") {
  exch::Exchange ex;
  ex.add_account(1, 100'000'000, 0);
  ex.add_account(99, 100'000'000, 10000, 0);
  // passive background book
  ex.route(99, exch::SubmitIntent{Side::Bid, OrderKind::Limit, 9999, 500}, 0,
           true);
  ex.route(99, exch::SubmitIntent{Side::Ask, OrderKind::Limit, 10001, 500}, 0,
           true);
  ex.match_until(0);

  MarketMaker mm(1, MmParams{}, rl::PpoConfig{}, ObsScales{}, 42);
  for (Step step = 1; step <= 20; ++step) {
    const auto snap = ex.book().snapshot(step);
    StepContext ctx;
    ctx.step = step;
    ctx.snapshot = &snap;
    ctx.mid_defined = snap.has_value();
    ctx.mid_ticks = snap ? snap->mid_ticks : 10000.0;
    ctx.exchange = &ex;
    ctx.training = false;
    mm.act(ctx);
    ex.match_until(step);
    CHECK(ex.book().resting_ids(1).size() <= 2);
  }
}

TEST_CASE("zero intelligence agents stay within account limits") {
  exch::Exchange ex;
  Cents total = 0;
  for (AgentId a = 1; a <= 5; ++a) {
    ex.add_account(a, 2'000'000, 500, 1000);
    total += 2'000'000;
  }
  ZiParams params;
  std::vector<ZeroIntelligence> agents;
  for (AgentId a = 1; a <= 5; ++a) agents.emplace_back(a, params, 100 + a, 10000);
  for (Step step = 0; step < 2000; ++step) {
    const auto snap = ex.book().snapshot(step);
    StepContext ctx;
    ctx.step = step;
    ctx.snapshot = &snap;
    ctx.mid_defined = snap.has_value();
    ctx.mid_ticks = snap ? snap->mid_ticks : 10000.0;
    ctx.exchange = &ex;
    for (auto& agent : agents) agent.act(ctx);
    ex.match_until(step);
    for (const auto& [id, acct] : ex.accounts()) {
      CHECK(acct.buying_power() >= 0);
      CHECK(acct.inventory - acct.reserved_shares >= -acct.short_bound);
    }
  }
  CHECK(ex.total_cash() == total);
}
