#include "marketsim/agents/agents.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "marketsim/io/hash.hpp"

namespace marketsim::agents {

namespace {

std::uint64_t hash_obs(std::span<const double> obs) {
  return io::fnv1a(obs.data(), obs.size() * sizeof(double));
}

void push_mid(std::deque<double>& history, double mid) {
  history.push_back(mid);
  while (history.size() > 5) history.pop_front();
}

}  // namespace

RlAgentBase::RlAgentBase(AgentId id, std::string name, int obs_dim,
                         int act_dim, rl::PpoConfig ppo, std::uint64_t seed)
    : Agent(id, std::move(name)),
      ppo_(ppo),
      buffer_(obs_dim, act_dim, static_cast<std::size_t>(ppo.buffer_capacity)),
      update_rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
  nets_.rng.seed(seed);
}

void RlAgentBase::maybe_update(std::span<const double> current_obs, Step step,
                               bool training) {
  if (!training || !buffer_.full()) return;
  const double bootstrap = nets_.value.forward(current_obs)[0];
  rl::PpoDiagnostics diag =
      rl::ppo_update(nets_.policy, nets_.value, buffer_, ppo_, bootstrap,
                     update_rng_);
  training_events_.push_back({step, diag});
}

void RlAgentBase::open_transition(std::vector<double> obs,
                                  std::vector<double> action, double logp,
                                  double value) {
  pending_obs_ = std::move(obs);
  pending_action_ = std::move(action);
  pending_logp_ = logp;
  pending_value_ = value;
  has_pending_ = true;
}

void RlAgentBase::close_transition(double reward) {
  if (!has_pending_) return;
  buffer_.push(pending_obs_, pending_action_, pending_logp_, reward,
               pending_value_, false);
  has_pending_ = false;
}

void RlAgentBase::track_pnl(const PostStepContext& ctx, double& d_pnl,
                            double& d_pnl_inventory) {
  const double mid = ctx.mid_defined ? ctx.mid_ticks : last_mid_ticks_;
  const double pnl = ctx.exchange->mark_to_mid(id_, mid);
  const Shares inventory = ctx.exchange->account(id_).inventory;
  if (!pnl_initialized_) {
    last_pnl_ = pnl;
    last_mid_ticks_ = mid;
    last_inventory_ = inventory;
    pnl_initialized_ = true;
    d_pnl = 0.0;
    d_pnl_inventory = 0.0;
    return;
  }
  d_pnl = pnl - last_pnl_;
  d_pnl_inventory =
      static_cast<double>(last_inventory_) * tick_dollars(mid - last_mid_ticks_);
  cum_pnl_inventory += d_pnl_inventory;
  cum_pnl_spread += d_pnl - d_pnl_inventory;
  last_pnl_ = pnl;
  last_mid_ticks_ = mid;
  last_inventory_ = inventory;
}

// ---------------------------------------------------------------------------
// MarketMaker

MarketMaker::MarketMaker(AgentId id, MmParams params, rl::PpoConfig ppo,
                         ObsScales scales, std::uint64_t seed)
    : RlAgentBase(id, "mm" + std::to_string(id), kMmObsDim, 3, ppo, seed),
      params_(params),
      scales_(scales) {
  nets_.policy.net = rl::Mlp({kMmObsDim, 64, 64, 3});
  nets_.policy.head = rl::GaussianHead(3);
  nets_.value = rl::Mlp({kMmObsDim, 64, 64, 1});
  nets_.policy.net.init_random(nets_.rng);
  nets_.value.init_random(nets_.rng);
}

void MarketMaker::act(const StepContext& ctx) {
  if (!ctx.mid_defined) return;  // skip step: no mid to quote around
  push_mid(mid_history_, ctx.mid_ticks);
  const lob::DepthSnapshot& depth = ctx.snapshot->value();

  double provision = 0.0;
  if (ctx.mm_provision != nullptr) {
    auto it = ctx.mm_provision->find(id_);
    if (it != ctx.mm_provision->end()) provision = it->second;
  }
  const exch::Account& acct = ctx.exchange->account(id_);
  const double bp = dollars(acct.buying_power());
  scales_.initial_cash_dollars =
      std::max(1.0, dollars(acct.initial_cash));
  const std::vector<double> obs = mm_observation(
      mid_history_, depth, provision, acct.inventory, bp, params_, scales_);

  maybe_update(obs, ctx.step, ctx.training);

  std::vector<double> raw;
  double logp;
  nets_.policy.act(obs, nets_.rng, raw, logp);
  const double value = nets_.value.forward(obs)[0];

  const double u = tanh_affine(raw[0], 0.0, 1.0);
  const double eps_s = tanh_affine(raw[1], params_.eps_s_lo, params_.eps_s_hi);
  const double eps_a = tanh_affine(raw[2], params_.eps_a_lo, params_.eps_a_hi);

  // cancel-replace: drop last step's quotes before posting new ones
  if (resting_bid_ != 0)
    ctx.exchange->route(id_, exch::CancelIntent{resting_bid_}, ctx.step);
  if (resting_ask_ != 0)
    ctx.exchange->route(id_, exch::CancelIntent{resting_ask_}, ctx.step);
  resting_bid_ = resting_ask_ = 0;

  const double mid_dollars = tick_dollars(ctx.mid_ticks);
  Shares size = static_cast<Shares>(std::floor(u * bp / (2.0 * mid_dollars)));
  size -= size % kLotShares;
  if (size >= kLotShares) {
    const QuotePrices q = mm_quote_prices(
        ctx.mid_ticks, static_cast<double>(depth.spread_ticks), eps_s, eps_a);
    const auto bid_ack = ctx.exchange->route(
        id_, exch::SubmitIntent{Side::Bid, OrderKind::Limit, q.bid, size},
        ctx.step);
    const auto ask_ack = ctx.exchange->route(
        id_, exch::SubmitIntent{Side::Ask, OrderKind::Limit, q.ask, size},
        ctx.step);
    if (bid_ack.status == exch::RouteStatus::Accepted)
      resting_bid_ = bid_ack.order_id;
    if (ask_ack.status == exch::RouteStatus::Accepted)
      resting_ask_ = ask_ack.order_id;
  }

  record_.acted = true;
  record_.obs_hash = hash_obs(obs);
  record_.action = {u, eps_s, eps_a};
  open_transition(obs, std::move(raw), logp, value);
}

void MarketMaker::post_step(const PostStepContext& ctx) {
  double d_pnl, d_pnl_inv;
  track_pnl(ctx, d_pnl, d_pnl_inv);
  double provision = 0.0;
  if (ctx.mm_provision != nullptr) {
    auto it = ctx.mm_provision->find(id_);
    if (it != ctx.mm_provision->end()) provision = it->second;
  }
  const double reward = mm_reward(d_pnl, d_pnl_inv, provision, params_);
  record_.reward = reward;
  close_transition(reward);
}

// ---------------------------------------------------------------------------
// LiquidityTaker

LiquidityTaker::LiquidityTaker(AgentId id, LtParams params, rl::PpoConfig ppo,
                               ObsScales scales, std::uint64_t seed,
                               LtRewardMode mode)
    : RlAgentBase(id, "lt" + std::to_string(id), kLtObsDim, 1, ppo, seed),
      params_(params),
      scales_(scales),
      mode_(mode) {
  nets_.policy.net = rl::Mlp({kLtObsDim, 64, 64, 3});
  nets_.policy.head = rl::CategoricalHead{3};
  nets_.value = rl::Mlp({kLtObsDim, 64, 64, 1});
  nets_.policy.net.init_random(nets_.rng);
  nets_.value.init_random(nets_.rng);
}

int LiquidityTaker::window_buys() const {
  int n = 0;
  for (const auto& [b, s] : exec_window_) n += b ? 1 : 0;
  return n;
}

int LiquidityTaker::window_sells() const {
  int n = 0;
  for (const auto& [b, s] : exec_window_) n += s ? 1 : 0;
  return n;
}

void LiquidityTaker::act(const StepContext& ctx) {
  pending_order_ = 0;
  if (!ctx.mid_defined) return;
  push_mid(mid_history_, ctx.mid_ticks);
  const lob::DepthSnapshot& depth = ctx.snapshot->value();
  const exch::Account& acct = ctx.exchange->account(id_);
  scales_.initial_cash_dollars = std::max(1.0, dollars(acct.initial_cash));
  const std::vector<double> obs =
      lt_observation(mid_history_, depth, acct.inventory,
                     dollars(acct.buying_power()), params_, scales_);

  maybe_update(obs, ctx.step, ctx.training);

  std::vector<double> raw;
  double logp;
  nets_.policy.act(obs, nets_.rng, raw, logp);
  const double value = nets_.value.forward(obs)[0];
  const int choice = static_cast<int>(raw[0]);  // 0 buy, 1 sell, 2 skip

  if (choice == 0 || choice == 1) {
    const Side side = choice == 0 ? Side::Bid : Side::Ask;
    const auto ack = ctx.exchange->route(
        id_,
        exch::SubmitIntent{side, OrderKind::Market, 0,
                           params_.order_size_lots * kLotShares},
        ctx.step);
    if (ack.status == exch::RouteStatus::Accepted) {
      pending_order_ = ack.order_id;
      pending_side_ = side;
    }
  }

  record_.acted = true;
  record_.obs_hash = hash_obs(obs);
  record_.action = {static_cast<double>(choice)};
  open_transition(obs, std::move(raw), logp, value);
}

void LiquidityTaker::post_step(const PostStepContext& ctx) {
  double d_pnl, d_pnl_inv;
  track_pnl(ctx, d_pnl, d_pnl_inv);

  // an order counts as bought/sold once it receives a fill this step
  bool bought = false, sold = false;
  if (pending_order_ != 0) {
    for (const auto& t : ctx.trades) {
      if (t.taker_order_id == pending_order_) {
        (pending_side_ == Side::Bid ? bought : sold) = true;
        break;
      }
    }
  }
  exec_window_.emplace_back(bought, sold);
  while (static_cast<int>(exec_window_.size()) > params_.tau)
    exec_window_.pop_front();

  const double tau = static_cast<double>(params_.tau);
  const double dev_buy = std::abs(params_.f_buy - window_buys() / tau);
  const double dev_sell = std::abs(params_.f_sell - window_sells() / tau);
  const double reward = lt_reward(d_pnl, d_pnl_inv, dev_buy, dev_buy_prev_,
                                  dev_sell, dev_sell_prev_, params_, mode_);
  dev_buy_prev_ = dev_buy;
  dev_sell_prev_ = dev_sell;
  record_.reward = reward;
  close_transition(reward);
}

// ---------------------------------------------------------------------------
// ZeroIntelligence

ZeroIntelligence::ZeroIntelligence(AgentId id, ZiParams params,
                                   std::uint64_t seed,
                                   Ticks fallback_price_ticks)
    : Agent(id, "zi" + std::to_string(id)),
      params_(params),
      rng_(seed),
      fallback_ticks_(fallback_price_ticks),
      fundamental_ticks_(fallback_price_ticks) {}

void ZeroIntelligence::act(const StepContext& ctx) {
  if (ctx.mid_defined) fallback_ticks_ = static_cast<Ticks>(ctx.mid_ticks);
  const double u = rl::uniform01(rng_);
  const Shares qty = params_.order_lots * kLotShares;
  exch::Exchange& ex = *ctx.exchange;

  if (u < params_.p_market) {
    const Side side = (rng_() & 1) ? Side::Bid : Side::Ask;
    ex.route(id_, exch::SubmitIntent{side, OrderKind::Market, 0, qty}, ctx.step);
    return;
  }
  if (u < params_.p_market + params_.p_limit) {
    const Side side = (rng_() & 1) ? Side::Bid : Side::Ask;
    const auto bb = ex.book().best_bid();
    const auto ba = ex.book().best_ask();
    Ticks lo, hi;
    if (params_.anchor == ZiParams::Anchor::Fundamental) {
      // symmetric window around the fixed fundamental price
      lo = side == Side::Bid ? fundamental_ticks_ - params_.window_ticks
                             : fundamental_ticks_ + 1;
      hi = side == Side::Bid ? fundamental_ticks_ - 1
                             : fundamental_ticks_ + params_.window_ticks;
    } else if (side == Side::Bid) {
      // same-side best minus the window up to one tick inside the opposite
      // best; fall back to the last seen mid when a side is empty
      const Ticks same = bb ? *bb : (ba ? *ba - 1 : fallback_ticks_);
      const Ticks opp = ba ? *ba : same + 1;
      lo = same - params_.window_ticks;
      hi = opp - 1;
    } else {
      const Ticks same = ba ? *ba : (bb ? *bb + 1 : fallback_ticks_);
      const Ticks opp = bb ? *bb : same - 1;
      lo = opp + 1;
      hi = same + params_.window_ticks;
    }
    lo = std::max<Ticks>(1, lo);
    if (hi < lo) hi = lo;
    const Ticks price =
        lo + static_cast<Ticks>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
    ex.route(id_, exch::SubmitIntent{side, OrderKind::Limit, price, qty},
             ctx.step);
    return;
  }
  if (u < params_.p_market + params_.p_limit + params_.p_cancel) {
    const std::vector<OrderId> own = ex.book().resting_ids(id_);
    if (own.empty()) return;
    const std::size_t pick = static_cast<std::size_t>(
        rng_() % static_cast<std::uint64_t>(own.size()));
    ex.route(id_, exch::CancelIntent{own[pick]}, ctx.step);
  }
  // remaining mass: do nothing
}

// ---------------------------------------------------------------------------
// FlashSaleAgent

bool FlashSaleSchedule::active_at(Step step) const {
  if (n_events <= 0 || step < start_step) return false;
  const Step period = active_steps + idle_steps;
  const Step offset = step - start_step;
  if (offset >= static_cast<Step>(n_events) * period) return false;
  return offset % period < active_steps;
}

std::vector<Step> FlashSaleSchedule::event_starts() const {
  std::vector<Step> starts;
  const Step period = active_steps + idle_steps;
  for (int i = 0; i < n_events; ++i)
    starts.push_back(start_step + static_cast<Step>(i) * period);
  return starts;
}

FlashSaleAgent::FlashSaleAgent(AgentId id, FlashSaleSchedule schedule)
    : Agent(id, "flash" + std::to_string(id)), schedule_(schedule) {}

void FlashSaleAgent::act(const StepContext& ctx) {
  if (!schedule_.active_at(ctx.step)) return;
  ctx.exchange->route(
      id_,
      exch::SubmitIntent{Side::Ask, OrderKind::Market, 0,
                         schedule_.lots_per_order * kLotShares},
      ctx.step);
}

// ---------------------------------------------------------------------------
// InformedSchedule

std::pair<double, double> InformedSchedule::fractions_at(Step step) const {
  if (phases.empty()) return {0.5, 0.5};
  std::size_t phase = static_cast<std::size_t>(step / phase_steps);
  if (phase >= phases.size()) phase = phases.size() - 1;  // hold last
  return phases[phase];
}

}  // namespace marketsim::agents
