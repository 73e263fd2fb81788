#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "marketsim/exch/exchange.hpp"

using namespace marketsim;
using exch::Exchange;
using exch::RouteStatus;
using exch::SubmitIntent;

TEST_CASE("margin check blocks bids beyond buying power") {
  Exchange ex;
  ex.add_account(1, 100 * 100 * 100, 0);  // exactly one lot at 100 ticks... in cents
  // account holds 1,000,000 cents; a bid of 100 shares at price 10000 ticks
  // costs 100 * 10000 = 1,000,000 cents: accepted
  auto ack = ex.route(1, SubmitIntent{Side::Bid, OrderKind::Limit, 10000, 100}, 0);
  CHECK(ack.status == RouteStatus::Accepted);
  // the reservation now consumes all cash
  CHECK(ex.account(1).buying_power() == 0);
  ack = ex.route(1, SubmitIntent{Side::Bid, OrderKind::Limit, 1, 100}, 0);
  CHECK(ack.status == RouteStatus::InsufficientBuyingPower);
}

TEST_CASE("short bound blocks excess asks") {
  Exchange ex;
  ex.add_account(1, 1'000'000, 0, /*short_bound=*/200);
  auto ack = ex.route(1, SubmitIntent{Side::Ask, OrderKind::Limit, 10000, 200}, 0);
  CHECK(ack.status == RouteStatus::Accepted);
  ack = ex.route(1, SubmitIntent{Side::Ask, OrderKind::Limit, 10000, 100}, 0);
  CHECK(ack.status == RouteStatus::ShortBoundExceeded);
}

TEST_CASE("unknown account and malformed orders are rejected") {
  Exchange ex;
  ex.add_account(1, 1'000'000, 0);
  CHECK(ex.route(9, SubmitIntent{Side::Bid, OrderKind::Limit, 100, 100}, 0).status ==
        RouteStatus::UnknownAccount);
  CHECK(ex.route(1, SubmitIntent{Side::Bid, OrderKind::Limit, 100, 50}, 0).status ==
        RouteStatus::RejectedOrder);
  CHECK(ex.route(1, SubmitIntent{Side::Bid, OrderKind::Limit, 0, 100}, 0).status ==
        RouteStatus::RejectedOrder);
}

TEST_CASE("settlement moves exact integer cents and shares") {
  Exchange ex;
  ex.add_account(1, 10'000'000, 0);
  ex.add_account(2, 10'000'000, 1000);
  ex.route(2, SubmitIntent{Side::Ask, OrderKind::Limit, 10000, 300}, 0);
  ex.route(1, SubmitIntent{Side::Bid, OrderKind::Limit, 10000, 300}, 0);
  const auto trades = ex.match_until(10);
  REQUIRE(trades.size() == 1);
  CHECK(trades[0].price == 10000);
  CHECK(trades[0].quantity == 300);
  // 300 shares * 10000 ticks = 3,000,000 cents
  CHECK(ex.account(1).cash == 10'000'000 - 3'000'000);
  CHECK(ex.account(2).cash == 10'000'000 + 3'000'000);
  CHECK(ex.account(1).inventory == 300);
  CHECK(ex.account(2).inventory == 700);
  CHECK(ex.account(1).reserved == 0);
  CHECK(ex.account(2).reserved_shares == 0);
}

TEST_CASE("cancel releases the exact reservation") {
  Exchange ex;
  ex.add_account(1, 1'000'000, 0);
  const auto ack =
      ex.route(1, SubmitIntent{Side::Bid, OrderKind::Limit, 5000, 100}, 0);
  ex.match_until(5);
  CHECK(ex.account(1).reserved == 5000 * 100);
  ex.route(1, exch::CancelIntent{ack.order_id}, 6);
  ex.match_until(6);
  CHECK(ex.account(1).reserved == 0);
  CHECK(ex.account(1).cash == 1'000'000);
}

TEST_CASE("market buy reserves at the admission-time best ask") {
  Exchange ex;
  ex.add_account(1, 2'000'000, 0);
  ex.add_account(2, 0, 1000);
  ex.route(2, SubmitIntent{Side::Ask, OrderKind::Limit, 10000, 100}, 0);
  ex.match_until(0);
  ex.route(1, SubmitIntent{Side::Bid, OrderKind::Market, 0, 100}, 1);
  CHECK(ex.account(1).reserved == 10000 * 100);
  ex.match_until(5);
  CHECK(ex.account(1).reserved == 0);
  CHECK(ex.account(1).inventory == 100);
}

TEST_CASE("conservation and zero residual reservations over random flow") {
  exch::LatencyModel latency{0, 3};
  Exchange ex(99, latency);
  Cents total_cash = 0;
  Shares total_inv = 0;
  for (AgentId a = 1; a <= 6; ++a) {
    ex.add_account(a, 5'000'000, 500);
    total_cash += 5'000'000;
    total_inv += 500;
  }
  std::mt19937_64 rng(7);
  for (Step step = 0; step < 3000; ++step) {
    const AgentId agent = 1 + static_cast<AgentId>(rng() % 6);
    const double u = static_cast<double>(rng() % 100) / 100.0;
    if (u < 0.75) {
      const Side side = (rng() & 1) ? Side::Bid : Side::Ask;
      const Ticks price = 9950 + static_cast<Ticks>(rng() % 101);
      const Shares qty = 100 * (1 + static_cast<Shares>(rng() % 4));
      ex.route(agent, SubmitIntent{side, OrderKind::Limit, price, qty}, step);
    } else if (u < 0.9) {
      const Side side = (rng() & 1) ? Side::Bid : Side::Ask;
      ex.route(agent, SubmitIntent{side, OrderKind::Market, 0, 100}, step);
    } else {
      const auto ids = ex.book().resting_ids(agent);
      if (!ids.empty())
        ex.route(agent, exch::CancelIntent{ids[rng() % ids.size()]}, step);
    }
    ex.match_until(step);
    CHECK(ex.total_cash() == total_cash);
    CHECK(ex.total_inventory() == total_inv);
  }
  ex.cancel_all();
  for (const auto& [id, acct] : ex.accounts()) {
    CHECK(acct.reserved == 0);
    CHECK(acct.reserved_shares == 0);
  }
  CHECK(ex.total_cash() == total_cash);
  CHECK(ex.total_inventory() == total_inv);
}

TEST_CASE("same latency seed reproduces the trade tape") {
  const auto run = [](std::uint64_t seed) {
    exch::LatencyModel latency{0, 4};
    Exchange ex(seed, latency);
    ex.add_account(1, 50'000'000, 5000);
    ex.add_account(2, 50'000'000, 5000);
    std::mt19937_64 rng(123);
    for (Step step = 0; step < 500; ++step) {
      const AgentId agent = 1 + static_cast<AgentId>(rng() % 2);
      const Side side = (rng() & 1) ? Side::Bid : Side::Ask;
      const Ticks price = 9990 + static_cast<Ticks>(rng() % 21);
      ex.route(agent, SubmitIntent{side, OrderKind::Limit, price, 100}, step);
      ex.match_until(step);
    }
    return ex.tape();
  };
  const auto a = run(42);
  const auto b = run(42);
  const auto c = run(43);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].maker_order_id == b[i].maker_order_id);
    CHECK(a[i].price == b[i].price);
    CHECK(a[i].quantity == b[i].quantity);
    CHECK(a[i].step == b[i].step);
  }
  // different latency draws virtually always permute some matches
  CHECK((a.size() != c.size() || [&] {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].maker_order_id != c[i].maker_order_id) return true;
    return false;
  }()));
}

TEST_CASE("mark to mid is cash plus marked inventory minus initial") {
  Exchange ex;
  ex.add_account(1, 1'000'000, 200);
  // no trades: pnl is inventory marked at mid minus nothing else
  const double pnl = ex.mark_to_mid(1, 10000.0);
  CHECK(pnl == doctest::Approx(200 * 100.0));  // 200 shares at $100
}
