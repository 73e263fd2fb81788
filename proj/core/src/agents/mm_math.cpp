#include "marketsim/agents/mm_math.hpp"

#include <cmath>

namespace marketsim::agents {

QuotePrices mm_quote_prices(double mid_ticks, double spread_ticks, double eps_s,
                            double eps_a) {
  QuotePrices q;
  const double half = (1.0 + eps_s) / 2.0;
  q.raw_ask_ticks = mid_ticks + spread_ticks * (half + eps_a);
  q.raw_bid_ticks = mid_ticks - spread_ticks * (half - eps_a);
  q.bid = static_cast<Ticks>(std::floor(q.raw_bid_ticks));
  q.ask = static_cast<Ticks>(std::ceil(q.raw_ask_ticks));
  if (q.bid >= q.ask) {
    q.bid -= 1;
    q.ask += 1;
  }
  if (q.bid < 1) q.bid = 1;
  if (q.ask <= q.bid) q.ask = q.bid + 1;
  return q;
}

ProvisionResult liquidity_provision(const lob::DepthSnapshot& depth,
                                    const std::vector<AgentId>& mm_ids) {
  ProvisionResult result;
  for (const AgentId id : mm_ids) result.provision[id] = 0.0;
  double total = 0.0;
  const auto accumulate = [&](const std::vector<lob::DepthLevel>& levels) {
    for (const auto& level : levels) {
      for (const AgentId id : mm_ids) {
        auto it = level.by_agent.find(id);
        if (it == level.by_agent.end()) continue;
        result.provision[id] += static_cast<double>(it->second);
        total += static_cast<double>(it->second);
      }
    }
  };
  accumulate(depth.bids);
  accumulate(depth.asks);
  if (total <= 0.0) return result;  // all zeros, any = false
  for (auto& [id, v] : result.provision) v /= total;
  result.any = true;
  return result;
}

double mm_reward(double d_pnl, double d_pnl_inventory, double provision,
                 const MmParams& p) {
  return p.omega * p.alpha * (d_pnl - p.gamma_inv * std::abs(d_pnl_inventory)) -
         (1.0 - p.omega) * std::abs(provision - p.target_provision);
}

double lt_reward(double d_pnl, double d_pnl_inventory, double dev_buy,
                 double dev_buy_prev, double dev_sell, double dev_sell_prev,
                 const LtParams& p, LtRewardMode mode) {
  const double pnl_term =
      p.omega * p.alpha * (d_pnl - p.gamma_inv * std::abs(d_pnl_inventory));
  double penalty;
  if (mode == LtRewardMode::DeviationChange) {
    penalty = (dev_buy - dev_buy_prev) + (dev_sell - dev_sell_prev);
  } else {
    penalty = dev_buy + dev_sell;
  }
  return pnl_term - (1.0 - p.omega) / 2.0 * penalty;
}

}  // namespace marketsim::agents
