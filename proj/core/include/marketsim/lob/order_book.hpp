#pragma once

#include <deque>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "marketsim/types.hpp"

namespace marketsim::lob {

struct Order {
  OrderId id = 0;
  AgentId agent_id = 0;
  Side side = Side::Bid;
  OrderKind kind = OrderKind::Limit;
  Ticks price = 0;  // unused for Market
  Shares quantity = 0;
  Shares remaining = 0;
  std::uint64_t seq = 0;
};

struct Trade {
  OrderId taker_order_id = 0;
  OrderId maker_order_id = 0;
  AgentId taker_agent = 0;
  AgentId maker_agent = 0;
  Ticks price = 0;  // maker's resting limit price
  Shares quantity = 0;
  Step step = 0;
  bool self_trade = false;
};

enum class Reject {
  None,
  NonPositiveSize,
  NotLotMultiple,
  BadPrice,
};

struct SubmitResult {
  std::vector<Trade> trades;
  Shares rested = 0;     // remainder left resting (limit only)
  Shares discarded = 0;  // market-order remainder against an exhausted side
  OrderId order_id = 0;
};

// Aggregated top-of-book view. Levels are ordered best-first; missing levels
// are simply absent. by_agent uses an ordered map so iteration is
// deterministic.
struct DepthLevel {
  Ticks price = 0;
  Shares quantity = 0;
  std::map<AgentId, Shares> by_agent;
};

struct DepthSnapshot {
  Step step = 0;
  std::vector<DepthLevel> bids;  // descending price
  std::vector<DepthLevel> asks;  // ascending price
  Ticks best_bid = 0;
  Ticks best_ask = 0;
  double mid_ticks = 0.0;  // (best_bid + best_ask) / 2
  Ticks spread_ticks = 0;

  Shares bid_volume() const;
  Shares ask_volume() const;
  // (V_bid - V_ask) / (V_bid + V_ask) over the captured levels.
  double imbalance() const;
};

// Price-time-priority book for one asset. Mutated only by the exchange's
// serialized matching loop; snapshots are immutable values.
class OrderBook {
 public:
  static Reject validate(const Order& order);

  // Matches then rests per price-time priority. `order` must pass validate().
  SubmitResult submit(Order order, Step step);

  // Removes a resting order. Returns false for unknown (filled/cancelled) ids.
  bool cancel(OrderId id);

  std::optional<Ticks> best_bid() const;
  std::optional<Ticks> best_ask() const;
  // Defined only when both sides are nonempty.
  std::optional<double> mid_ticks() const;
  std::optional<Ticks> spread_ticks() const;

  // Top-`depth` aggregation; nullopt while either side is empty.
  std::optional<DepthSnapshot> snapshot(Step step, int depth = 5) const;

  const Order* find(OrderId id) const;
  std::vector<OrderId> resting_ids(AgentId agent) const;
  std::uint64_t next_seq() { return seq_counter_++; }
  std::size_t order_count() const { return index_.size(); }

 private:
  using BidLevels = std::map<Ticks, std::deque<Order>, std::greater<Ticks>>;
  using AskLevels = std::map<Ticks, std::deque<Order>, std::less<Ticks>>;

  template <typename Levels>
  void match_against(Levels& levels, Order& taker, Step step,
                     std::vector<Trade>& trades);
  void rest(Order order);

  BidLevels bids_;
  AskLevels asks_;
  std::unordered_map<OrderId, std::pair<Side, Ticks>> index_;
  std::uint64_t seq_counter_ = 1;
};

}  // namespace marketsim::lob
