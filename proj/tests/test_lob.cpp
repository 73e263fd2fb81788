#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "marketsim/lob/order_book.hpp"

#include "reference_book.hpp"

using namespace marketsim;
using lob::Order;
using lob::OrderBook;
using lob::Trade;

TEST_CASE("validate rejects malformed orders") {
  CHECK(OrderBook::validate(testutil::make_order(1, 1, Side::Bid, OrderKind::Limit, 100, 100, 1)) ==
        lob::Reject::None);
  CHECK(OrderBook::validate(testutil::make_order(1, 1, Side::Bid, OrderKind::Limit, 100, 0, 1)) ==
        lob::Reject::NonPositiveSize);
  CHECK(OrderBook::validate(testutil::make_order(1, 1, Side::Bid, OrderKind::Limit, 100, -100, 1)) ==
        lob::Reject::NonPositiveSize);
  CHECK(OrderBook::validate(testutil::make_order(1, 1, Side::Bid, OrderKind::Limit, 100, 150, 1)) ==
        lob::Reject::NotLotMultiple);
  CHECK(OrderBook::validate(testutil::make_order(1, 1, Side::Bid, OrderKind::Limit, 0, 100, 1)) ==
        lob::Reject::BadPrice);
  CHECK(OrderBook::validate(testutil::make_order(1, 1, Side::Ask, OrderKind::Market, 0, 100, 1)) ==
        lob::Reject::None);
}

TEST_CASE("fifo at one price level") {
  OrderBook book;
  book.submit(testutil::make_order(1, 1, Side::Ask, OrderKind::Limit, 100, 100, book.next_seq()), 0);
  book.submit(testutil::make_order(2, 2, Side::Ask, OrderKind::Limit, 100, 100, book.next_seq()), 0);
  const auto result =
      book.submit(testutil::make_order(3, 3, Side::Bid, OrderKind::Limit, 100, 100, book.next_seq()), 0);
  REQUIRE(result.trades.size() == 1);
  CHECK(result.trades[0].maker_order_id == 1);  // earlier order first
  CHECK(book.find(2) != nullptr);
}

TEST_CASE("price priority beats time priority") {
  OrderBook book;
  book.submit(testutil::make_order(1, 1, Side::Ask, OrderKind::Limit, 101, 100, book.next_seq()), 0);
  book.submit(testutil::make_order(2, 2, Side::Ask, OrderKind::Limit, 100, 100, book.next_seq()), 0);
  const auto result =
      book.submit(testutil::make_order(3, 3, Side::Bid, OrderKind::Limit, 101, 100, book.next_seq()), 0);
  REQUIRE(result.trades.size() == 1);
  CHECK(result.trades[0].maker_order_id == 2);
  CHECK(result.trades[0].price == 100);  // maker's price
}

TEST_CASE("market remainder is discarded") {
  OrderBook book;
  book.submit(testutil::make_order(1, 1, Side::Ask, OrderKind::Limit, 100, 100, book.next_seq()), 0);
  const auto result =
      book.submit(testutil::make_order(2, 2, Side::Bid, OrderKind::Market, 0, 300, book.next_seq()), 0);
  CHECK(result.trades.size() == 1);
  CHECK(result.discarded == 200);
  CHECK(result.rested == 0);
  CHECK(!book.best_bid().has_value());
}

TEST_CASE("book never rests crossed") {
  OrderBook book;
  std::mt19937_64 rng(42);
  OrderId next_id = 1;
  for (int i = 0; i < 2000; ++i) {
    const Side side = (rng() & 1) ? Side::Bid : Side::Ask;
    const Ticks price = 90 + static_cast<Ticks>(rng() % 21);
    book.submit(testutil::make_order(next_id++, 1 + static_cast<AgentId>(rng() % 5), side,
                     OrderKind::Limit, price, 100 * (1 + static_cast<Shares>(rng() % 3)),
                     book.next_seq()),
                i);
    const auto bb = book.best_bid();
    const auto ba = book.best_ask();
    if (bb && ba) CHECK(*bb < *ba);
  }
}

TEST_CASE("self trades execute and are flagged") {
  OrderBook book;
  book.submit(testutil::make_order(1, 7, Side::Ask, OrderKind::Limit, 100, 100, book.next_seq()), 0);
  const auto result =
      book.submit(testutil::make_order(2, 7, Side::Bid, OrderKind::Limit, 100, 100, book.next_seq()), 0);
  REQUIRE(result.trades.size() == 1);
  CHECK(result.trades[0].self_trade);
}

TEST_CASE("cancel removes exactly one resting order") {
  OrderBook book;
  book.submit(testutil::make_order(1, 1, Side::Bid, OrderKind::Limit, 99, 100, book.next_seq()), 0);
  book.submit(testutil::make_order(2, 1, Side::Bid, OrderKind::Limit, 99, 100, book.next_seq()), 0);
  CHECK(book.cancel(1));
  CHECK(!book.cancel(1));  // idempotent
  CHECK(book.find(1) == nullptr);
  CHECK(book.find(2) != nullptr);
  CHECK(book.order_count() == 1);
}

TEST_CASE("snapshot aggregates by level and agent") {
  OrderBook book;
  book.submit(testutil::make_order(1, 1, Side::Bid, OrderKind::Limit, 99, 200, book.next_seq()), 0);
  book.submit(testutil::make_order(2, 2, Side::Bid, OrderKind::Limit, 99, 100, book.next_seq()), 0);
  book.submit(testutil::make_order(3, 3, Side::Ask, OrderKind::Limit, 101, 100, book.next_seq()), 0);
  const auto snap = book.snapshot(5);
  REQUIRE(snap.has_value());
  CHECK(snap->best_bid == 99);
  CHECK(snap->best_ask == 101);
  CHECK(snap->mid_ticks == doctest::Approx(100.0));
  CHECK(snap->spread_ticks == 2);
  REQUIRE(snap->bids.size() == 1);
  CHECK(snap->bids[0].quantity == 300);
  CHECK(snap->bids[0].by_agent.at(1) == 200);
  CHECK(snap->imbalance() == doctest::Approx((300.0 - 100.0) / 400.0));
}

TEST_CASE("snapshot undefined while one side is empty") {
  OrderBook book;
  CHECK(!book.snapshot(0).has_value());
  book.submit(testutil::make_order(1, 1, Side::Bid, OrderKind::Limit, 99, 100, book.next_seq()), 0);
  CHECK(!book.snapshot(0).has_value());
  CHECK(!book.mid_ticks().has_value());
}

TEST_CASE("10k-event random stream matches the reference matcher") {
  OrderBook book;
  testutil::ReferenceBook reference;
  std::mt19937_64 rng(20240817);
  std::vector<OrderId> live;
  OrderId next_id = 1;

  for (int event = 0; event < 10000; ++event) {
    const double u = static_cast<double>(rng() % 1000) / 1000.0;
    if (u < 0.15 && !live.empty()) {
      const std::size_t pick = rng() % live.size();
      const OrderId id = live[pick];
      const bool a = book.cancel(id);
      const bool b = reference.cancel(id);
      CHECK(a == b);
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(pick));
      continue;
    }
    const Side side = (rng() & 1) ? Side::Bid : Side::Ask;
    const bool market = u > 0.85;
    const Ticks price = 9950 + static_cast<Ticks>(rng() % 101);
    const Shares qty = 100 * (1 + static_cast<Shares>(rng() % 10));
    const Order order = testutil::make_order(next_id++, 1 + static_cast<AgentId>(rng() % 8), side,
                             market ? OrderKind::Market : OrderKind::Limit,
                             market ? 0 : price, qty, book.next_seq());
    const auto result = book.submit(order, event);
    const auto ref_trades = reference.submit(order, event);
    REQUIRE(result.trades.size() == ref_trades.size());
    for (std::size_t i = 0; i < ref_trades.size(); ++i)
      CHECK(testutil::same_trade(result.trades[i], ref_trades[i]));
    if (result.rested > 0) live.push_back(order.id);
    // drop ids the trades fully consumed
    std::erase_if(live, [&](OrderId id) { return book.find(id) == nullptr; });
  }

  // final book states must agree exactly
  const std::vector<Order> ref_book = reference.sorted_book();
  CHECK(ref_book.size() == book.order_count());
  for (const Order& o : ref_book) {
    const Order* mine = book.find(o.id);
    REQUIRE(mine != nullptr);
    CHECK(mine->price == o.price);
    CHECK(mine->remaining == o.remaining);
    CHECK(mine->side == o.side);
  }
}
