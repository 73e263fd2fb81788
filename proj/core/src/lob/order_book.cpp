#include "marketsim/lob/order_book.hpp"

#include <algorithm>
#include <cassert>

namespace marketsim::lob {

Shares DepthSnapshot::bid_volume() const {
  Shares v = 0;
  for (const auto& l : bids) v += l.quantity;
  return v;
}

Shares DepthSnapshot::ask_volume() const {
  Shares v = 0;
  for (const auto& l : asks) v += l.quantity;
  return v;
}

double DepthSnapshot::imbalance() const {
  const double vb = static_cast<double>(bid_volume());
  const double va = static_cast<double>(ask_volume());
  if (vb + va == 0.0) return 0.0;
  return (vb - va) / (vb + va);
}

Reject OrderBook::validate(const Order& order) {
  if (order.quantity <= 0) return Reject::NonPositiveSize;
  if (order.quantity % kLotShares != 0) return Reject::NotLotMultiple;
  if (order.kind == OrderKind::Limit && order.price < 1) return Reject::BadPrice;
  return Reject::None;
}

template <typename Levels>
void OrderBook::match_against(Levels& levels, Order& taker, Step step,
                              std::vector<Trade>& trades) {
  while (taker.remaining > 0 && !levels.empty()) {
    auto level_it = levels.begin();
    const Ticks level_price = level_it->first;
    if (taker.kind == OrderKind::Limit) {
      const bool crosses = taker.side == Side::Bid ? taker.price >= level_price
                                                   : taker.price <= level_price;
      if (!crosses) break;
    }
    auto& queue = level_it->second;
    while (taker.remaining > 0 && !queue.empty()) {
      Order& maker = queue.front();
      const Shares qty = std::min(taker.remaining, maker.remaining);
      trades.push_back(Trade{taker.id, maker.id, taker.agent_id, maker.agent_id,
                             maker.price, qty, step,
                             taker.agent_id == maker.agent_id});
      taker.remaining -= qty;
      maker.remaining -= qty;
      if (maker.remaining == 0) {
        index_.erase(maker.id);
        queue.pop_front();
      }
    }
    if (queue.empty()) levels.erase(level_it);
  }
}

void OrderBook::rest(Order order) {
  index_.emplace(order.id, std::make_pair(order.side, order.price));
  if (order.side == Side::Bid) {
    bids_[order.price].push_back(order);
  } else {
    asks_[order.price].push_back(order);
  }
}

SubmitResult OrderBook::submit(Order order, Step step) {
  assert(validate(order) == Reject::None);
  order.remaining = order.quantity;
  order.seq = next_seq();

  SubmitResult result;
  result.order_id = order.id;
  if (order.side == Side::Bid) {
    match_against(asks_, order, step, result.trades);
  } else {
    match_against(bids_, order, step, result.trades);
  }
  if (order.remaining > 0) {
    if (order.kind == OrderKind::Limit) {
      rest(order);
      result.rested = order.remaining;
    } else {
      result.discarded = order.remaining;
    }
  }
  return result;
}

bool OrderBook::cancel(OrderId id) {
  auto it = index_.find(id);
  if (it == index_.end()) return false;
  const auto [side, price] = it->second;
  const auto erase_from = [&](auto& levels) {
    auto level_it = levels.find(price);
    assert(level_it != levels.end());
    auto& queue = level_it->second;
    auto pos = std::find_if(queue.begin(), queue.end(),
                            [&](const Order& o) { return o.id == id; });
    assert(pos != queue.end());
    queue.erase(pos);
    if (queue.empty()) levels.erase(level_it);
  };
  if (side == Side::Bid) {
    erase_from(bids_);
  } else {
    erase_from(asks_);
  }
  index_.erase(it);
  return true;
}

std::optional<Ticks> OrderBook::best_bid() const {
  if (bids_.empty()) return std::nullopt;
  return bids_.begin()->first;
}

std::optional<Ticks> OrderBook::best_ask() const {
  if (asks_.empty()) return std::nullopt;
  return asks_.begin()->first;
}

std::optional<double> OrderBook::mid_ticks() const {
  const auto bb = best_bid();
  const auto ba = best_ask();
  if (!bb || !ba) return std::nullopt;
  return (static_cast<double>(*bb) + static_cast<double>(*ba)) / 2.0;
}

std::optional<Ticks> OrderBook::spread_ticks() const {
  const auto bb = best_bid();
  const auto ba = best_ask();
  if (!bb || !ba) return std::nullopt;
  return *ba - *bb;
}

std::optional<DepthSnapshot> OrderBook::snapshot(Step step, int depth) const {
  if (bids_.empty() || asks_.empty()) return std::nullopt;
  DepthSnapshot snap;
  snap.step = step;
  const auto collect = [&](const auto& levels, std::vector<DepthLevel>& out) {
    int n = 0;
    for (const auto& [price, queue] : levels) {
      if (n++ == depth) break;
      DepthLevel level;
      level.price = price;
      for (const Order& o : queue) {
        level.quantity += o.remaining;
        level.by_agent[o.agent_id] += o.remaining;
      }
      out.push_back(std::move(level));
    }
  };
  collect(bids_, snap.bids);
  collect(asks_, snap.asks);
  snap.best_bid = snap.bids.front().price;
  snap.best_ask = snap.asks.front().price;
  snap.mid_ticks =
      (static_cast<double>(snap.best_bid) + static_cast<double>(snap.best_ask)) / 2.0;
  snap.spread_ticks = snap.best_ask - snap.best_bid;
  return snap;
}

const Order* OrderBook::find(OrderId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return nullptr;
  const auto [side, price] = it->second;
  const auto scan = [&](const auto& levels) -> const Order* {
    auto level_it = levels.find(price);
    if (level_it == levels.end()) return nullptr;
    for (const Order& o : level_it->second) {
      if (o.id == id) return &o;
    }
    return nullptr;
  };
  return side == Side::Bid ? scan(bids_) : scan(asks_);
}

std::vector<OrderId> OrderBook::resting_ids(AgentId agent) const {
  std::vector<OrderId> ids;
  const auto scan = [&](const auto& levels) {
    for (const auto& [price, queue] : levels) {
      for (const Order& o : queue) {
        if (o.agent_id == agent) ids.push_back(o.id);
      }
    }
  };
  scan(bids_);
  scan(asks_);
  return ids;
}

}  // namespace marketsim::lob
