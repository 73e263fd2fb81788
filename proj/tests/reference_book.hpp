#pragma once

#include <algorithm>
#include <vector>

#include "marketsim/lob/order_book.hpp"

namespace marketsim::testutil {

// Naive O(n^2) reference matcher: flat vectors, rescan for the best
// opposite order on every fill. Price-time priority by (price, seq).
class ReferenceBook {
 public:
  std::vector<lob::Trade> submit(lob::Order order, Step step) {
    std::vector<lob::Trade> trades;
    order.remaining = order.quantity;
    while (order.remaining > 0) {
      auto& opposite = order.side == Side::Bid ? asks_ : bids_;
      auto best = opposite.end();
      for (auto it = opposite.begin(); it != opposite.end(); ++it) {
        if (best == opposite.end()) {
          best = it;
          continue;
        }
        const bool better =
            order.side == Side::Bid
                ? (it->price < best->price ||
                   (it->price == best->price && it->seq < best->seq))
                : (it->price > best->price ||
                   (it->price == best->price && it->seq < best->seq));
        if (better) best = it;
      }
      if (best == opposite.end()) break;
      if (order.kind == OrderKind::Limit) {
        const bool crosses = order.side == Side::Bid
                                 ? best->price <= order.price
                                 : best->price >= order.price;
        if (!crosses) break;
      }
      const Shares qty = std::min(order.remaining, best->remaining);
      lob::Trade t;
      t.taker_order_id = order.id;
      t.maker_order_id = best->id;
      t.taker_agent = order.agent_id;
      t.maker_agent = best->agent_id;
      t.price = best->price;
      t.quantity = qty;
      t.step = step;
      t.self_trade = order.agent_id == best->agent_id;
      trades.push_back(t);
      order.remaining -= qty;
      best->remaining -= qty;
      if (best->remaining == 0) opposite.erase(best);
    }
    // market remainder is discarded; limit remainder rests
    if (order.remaining > 0 && order.kind == OrderKind::Limit) {
      (order.side == Side::Bid ? bids_ : asks_).push_back(order);
    }
    return trades;
  }

  bool cancel(OrderId id) {
    for (auto* side : {&bids_, &asks_}) {
      for (auto it = side->begin(); it != side->end(); ++it) {
        if (it->id == id) {
          side->erase(it);
          return true;
        }
      }
    }
    return false;
  }

  std::vector<lob::Order> sorted_book() const {
    std::vector<lob::Order> all = bids_;
    all.insert(all.end(), asks_.begin(), asks_.end());
    std::sort(all.begin(), all.end(),
              [](const lob::Order& a, const lob::Order& b) { return a.id < b.id; });
    return all;
  }

 private:
  std::vector<lob::Order> bids_;
  std::vector<lob::Order> asks_;
};

inline bool same_trade(const lob::Trade& a, const lob::Trade& b) {
  return a.taker_order_id == b.taker_order_id &&
         a.maker_order_id == b.maker_order_id && a.price == b.price &&
         a.quantity == b.quantity && a.self_trade == b.self_trade;
}

inline lob::Order make_order(OrderId id, AgentId agent, Side side,
                             OrderKind kind, Ticks price, Shares qty,
                             std::uint64_t seq) {
  lob::Order o;
  o.id = id;
  o.agent_id = agent;
  o.side = side;
  o.kind = kind;
  o.price = price;
  o.quantity = qty;
  o.remaining = qty;
  o.seq = seq;
  return o;
}

}  // namespace marketsim::testutil
