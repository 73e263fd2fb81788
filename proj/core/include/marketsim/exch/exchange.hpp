#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "marketsim/lob/order_book.hpp"
#include "marketsim/types.hpp"

namespace marketsim::exch {

struct Account {
  AgentId agent_id = 0;
  Cents cash = 0;
  Cents initial_cash = 0;
  Cents initial_inventory_value = 0;  // endowed shares marked at the endowment price
  Shares inventory = 0;
  Cents reserved = 0;          // held against open bids
  Shares reserved_shares = 0;  // held against open asks
  Shares short_bound = 10000;  // max shares short

  Cents buying_power() const { return cash - reserved; }
};

struct SubmitIntent {
  Side side = Side::Bid;
  OrderKind kind = OrderKind::Limit;
  Ticks price = 0;
  Shares quantity = 0;
};

struct CancelIntent {
  OrderId order_id = 0;
};

using OrderIntent = std::variant<SubmitIntent, CancelIntent>;

enum class RouteStatus {
  Accepted,
  UnknownAccount,
  RejectedOrder,  // failed book validation
  InsufficientBuyingPower,
  ShortBoundExceeded,
};

struct Ack {
  RouteStatus status = RouteStatus::Accepted;
  OrderId order_id = 0;
};

// None or Uniform(lo, hi) whole-step delays per submitted order.
struct LatencyModel {
  Step lo = 0;
  Step hi = 0;

  Step sample(std::mt19937_64& rng) const {
    if (hi <= lo) return lo;
    return lo + static_cast<Step>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

struct TradeRecord : lob::Trade {};

// Matching engine plus brokerage: admits intents against account margins,
// delays them per the latency model, matches serially in (arrival, seq)
// order, and settles every trade. All mutation happens on the caller's
// (matcher) context.
class Exchange {
 public:
  explicit Exchange(std::uint64_t latency_seed = 0, LatencyModel latency = {})
      : latency_(latency), latency_rng_(latency_seed) {}

  Account& add_account(AgentId id, Cents cash, Shares inventory,
                       Shares short_bound = 10000, Ticks mark_ticks = 0);
  const Account& account(AgentId id) const;
  const std::map<AgentId, Account>& accounts() const { return accounts_; }

  // Margin-checks, assigns an id, and enqueues with sampled latency.
  // Cancels are enqueued with zero delay. `immediate` bypasses the latency
  // model (book seeding).
  Ack route(AgentId agent, const OrderIntent& intent, Step now,
            bool immediate = false);

  // Drains everything with arrival_step <= now, matching and settling.
  // Returns the trades executed by this call.
  std::vector<TradeRecord> match_until(Step now);

  lob::OrderBook& book() { return book_; }
  const lob::OrderBook& book() const { return book_; }

  std::optional<double> mid_ticks() const { return book_.mid_ticks(); }

  // Profit and loss versus the endowment: change in cash plus inventory
  // marked at mid, minus the endowed shares marked at the endowment price.
  // Returned in dollars.
  double mark_to_mid(AgentId id, double mid_ticks) const;

  // Cancels every resting order and releases its reservation; used by
  // run-end audits.
  void cancel_all();

  const std::vector<TradeRecord>& tape() const { return tape_; }

  Cents total_cash() const;
  Shares total_inventory() const;

 private:
  struct PendingOrder {
    Step arrival = 0;
    std::uint64_t admit_seq = 0;
    AgentId agent = 0;
    bool is_cancel = false;
    lob::Order order;     // for submits
    OrderId cancel_id = 0;
    Cents reserve_per_share = 0;  // bid reservation rate fixed at admission
  };
  struct Reservation {
    AgentId agent = 0;
    Side side = Side::Bid;
    Cents per_share = 0;  // bids
  };

  void release(const Reservation& r, Shares qty);
  void settle(const TradeRecord& trade);
  void execute(PendingOrder& pending, Step now, std::vector<TradeRecord>& out);

  lob::OrderBook book_;
  std::map<AgentId, Account> accounts_;
  LatencyModel latency_;
  std::mt19937_64 latency_rng_;
  std::map<std::pair<Step, std::uint64_t>, PendingOrder> pending_;
  std::unordered_map<OrderId, Reservation> open_;
  std::vector<TradeRecord> tape_;
  OrderId next_order_id_ = 1;
  std::uint64_t next_admit_seq_ = 1;
  double last_mid_ticks_ = 0.0;
};

}  // namespace marketsim::exch
