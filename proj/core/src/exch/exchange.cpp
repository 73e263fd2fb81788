#include "marketsim/exch/exchange.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace marketsim::exch {

Account& Exchange::add_account(AgentId id, Cents cash, Shares inventory,
                               Shares short_bound, Ticks mark_ticks) {
  Account acct;
  acct.agent_id = id;
  acct.cash = cash;
  acct.initial_cash = cash;
  acct.inventory = inventory;
  // One tick is one cent, so shares * ticks is the position value in cents.
  acct.initial_inventory_value = static_cast<Cents>(inventory) * mark_ticks;
  acct.short_bound = short_bound;
  auto [it, inserted] = accounts_.insert_or_assign(id, acct);
  return it->second;
}

const Account& Exchange::account(AgentId id) const {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) throw std::out_of_range("unknown account");
  return it->second;
}

Ack Exchange::route(AgentId agent, const OrderIntent& intent, Step now,
                    bool immediate) {
  auto acct_it = accounts_.find(agent);
  if (acct_it == accounts_.end()) return {RouteStatus::UnknownAccount, 0};
  Account& acct = acct_it->second;

  if (const auto* cancel = std::get_if<CancelIntent>(&intent)) {
    PendingOrder p;
    p.arrival = now;  // cancels skip the latency model
    p.admit_seq = next_admit_seq_++;
    p.agent = agent;
    p.is_cancel = true;
    p.cancel_id = cancel->order_id;
    pending_.emplace(std::make_pair(p.arrival, p.admit_seq), p);
    return {RouteStatus::Accepted, cancel->order_id};
  }

  const auto& sub = std::get<SubmitIntent>(intent);
  lob::Order order;
  order.id = next_order_id_;
  order.agent_id = agent;
  order.side = sub.side;
  order.kind = sub.kind;
  order.price = sub.price;
  order.quantity = sub.quantity;
  order.remaining = sub.quantity;
  if (lob::OrderBook::validate(order) != lob::Reject::None)
    return {RouteStatus::RejectedOrder, 0};

  Cents reserve_per_share = 0;
  if (sub.side == Side::Bid) {
    if (sub.kind == OrderKind::Limit) {
      reserve_per_share = sub.price;
    } else {
      // No limit price on a market buy: reserve at the current best ask,
      // falling back to the last seen mid.
      const auto ba = book_.best_ask();
      reserve_per_share = ba ? *ba : static_cast<Cents>(std::ceil(last_mid_ticks_));
      if (reserve_per_share <= 0) return {RouteStatus::InsufficientBuyingPower, 0};
    }
    const Cents need = cents_of(reserve_per_share, sub.quantity);
    if (need > acct.buying_power()) return {RouteStatus::InsufficientBuyingPower, 0};
    acct.reserved += need;
  } else {
    if (acct.inventory - acct.reserved_shares - sub.quantity < -acct.short_bound)
      return {RouteStatus::ShortBoundExceeded, 0};
    acct.reserved_shares += sub.quantity;
  }

  next_order_id_++;
  PendingOrder p;
  p.arrival = immediate ? now : now + latency_.sample(latency_rng_);
  p.admit_seq = next_admit_seq_++;
  p.agent = agent;
  p.order = order;
  p.reserve_per_share = reserve_per_share;
  open_.emplace(order.id, Reservation{agent, sub.side, reserve_per_share});
  pending_.emplace(std::make_pair(p.arrival, p.admit_seq), p);
  return {RouteStatus::Accepted, order.id};
}

void Exchange::release(const Reservation& r, Shares qty) {
  Account& acct = accounts_.at(r.agent);
  if (r.side == Side::Bid) {
    acct.reserved -= cents_of(r.per_share, qty);
  } else {
    acct.reserved_shares -= qty;
  }
}

void Exchange::settle(const TradeRecord& trade) {
  Account& buyer_side = accounts_.at(trade.taker_agent);
  Account& seller_side = accounts_.at(trade.maker_agent);
  // Identify buyer/seller from the maker's resting side recorded in open_.
  const auto maker_res = open_.at(trade.maker_order_id);
  Account& buyer = maker_res.side == Side::Ask ? buyer_side : seller_side;
  Account& seller = maker_res.side == Side::Ask ? seller_side : buyer_side;

  const Cents value = cents_of(trade.price, trade.quantity);
  buyer.cash -= value;
  buyer.inventory += trade.quantity;
  seller.cash += value;
  seller.inventory -= trade.quantity;

  // Release both parties' reservations for the filled quantity.
  release(maker_res, trade.quantity);
  release(open_.at(trade.taker_order_id), trade.quantity);
}

void Exchange::execute(PendingOrder& pending, Step now,
                       std::vector<TradeRecord>& out) {
  if (pending.is_cancel) {
    const lob::Order* resting = book_.find(pending.cancel_id);
    if (resting == nullptr) return;  // already filled or cancelled
    auto res_it = open_.find(pending.cancel_id);
    assert(res_it != open_.end());
    release(res_it->second, resting->remaining);
    open_.erase(res_it);
    book_.cancel(pending.cancel_id);
    return;
  }

  lob::SubmitResult result = book_.submit(pending.order, now);
  for (const lob::Trade& t : result.trades) {
    TradeRecord record;
    static_cast<lob::Trade&>(record) = t;
    settle(record);
    out.push_back(record);
    tape_.push_back(record);
    // Fully filled makers are gone from the book; drop their registry entry.
    if (book_.find(t.maker_order_id) == nullptr) open_.erase(t.maker_order_id);
  }
  if (result.discarded > 0) {
    release(open_.at(pending.order.id), result.discarded);
  }
  // Fully consumed (or discarded) orders no longer hold a reservation.
  if (result.rested == 0) open_.erase(pending.order.id);
  if (const auto mid = book_.mid_ticks()) last_mid_ticks_ = *mid;
}

std::vector<TradeRecord> Exchange::match_until(Step now) {
  std::vector<TradeRecord> out;
  while (!pending_.empty() && pending_.begin()->first.first <= now) {
    PendingOrder p = pending_.begin()->second;
    pending_.erase(pending_.begin());
    execute(p, now, out);
  }
  if (const auto mid = book_.mid_ticks()) last_mid_ticks_ = *mid;
  return out;
}

double Exchange::mark_to_mid(AgentId id, double mid_ticks) const {
  const Account& acct = account(id);
  return dollars(acct.cash - acct.initial_cash - acct.initial_inventory_value) +
         static_cast<double>(acct.inventory) * tick_dollars(mid_ticks);
}

void Exchange::cancel_all() {
  // Queued submits never reached the book; release their full hold.
  for (auto& [key, p] : pending_) {
    if (p.is_cancel) continue;
    auto it = open_.find(p.order.id);
    if (it != open_.end()) {
      release(it->second, p.order.quantity);
      open_.erase(it);
    }
  }
  pending_.clear();
  for (auto& [id, res] : open_) {
    const lob::Order* resting = book_.find(id);
    if (resting != nullptr) {
      release(res, resting->remaining);
      book_.cancel(id);
    }
  }
  open_.clear();
}

Cents Exchange::total_cash() const {
  Cents sum = 0;
  for (const auto& [id, acct] : accounts_) sum += acct.cash;
  return sum;
}

Shares Exchange::total_inventory() const {
  Shares sum = 0;
  for (const auto& [id, acct] : accounts_) sum += acct.inventory;
  return sum;
}

}  // namespace marketsim::exch
