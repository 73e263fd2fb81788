#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "marketsim/lob/order_book.hpp"
#include "marketsim/types.hpp"

namespace marketsim::agents {

struct MmParams {
  double omega = 0.5;       // PnL weight in [0, 1]
  double gamma_inv = 0.15;  // inventory risk sensitivity
  double alpha = 0.09;      // PnL normalizer
  double target_provision = 0.5;
  double eps_s_lo = -1.0, eps_s_hi = 1.0;
  double eps_a_lo = -1.0, eps_a_hi = 1.0;
};

struct LtParams {
  double omega = 0.5;
  double gamma_inv = 0.9;
  double alpha = 0.01;
  double f_buy = 0.5;   // target buy fraction
  double f_sell = 0.5;  // target sell fraction
  int tau = 100;        // frequency window, steps
  Shares order_size_lots = 18;
};

// How the leading delta in the LT frequency penalty is read: as the
// step-to-step change of each deviation (default) or as the deviation
// level itself.
enum class LtRewardMode { DeviationChange, DeviationLevel };

struct QuotePrices {
  double raw_bid_ticks = 0.0;  // pre-rounding, for algebra checks
  double raw_ask_ticks = 0.0;
  Ticks bid = 0;  // rounded outward; widened one tick per side if crossed
  Ticks ask = 0;
};

// p_ask = mid + s*((1+eps_s)/2 + eps_a); p_bid = mid - s*((1+eps_s)/2 - eps_a)
QuotePrices mm_quote_prices(double mid_ticks, double spread_ticks, double eps_s,
                            double eps_a);

// Per-MM share of all MM-resting depth over the snapshot's levels.
// When no MM liquidity rests, all values are 0 and `any` is false.
struct ProvisionResult {
  std::map<AgentId, double> provision;
  bool any = false;
};
ProvisionResult liquidity_provision(const lob::DepthSnapshot& depth,
                                    const std::vector<AgentId>& mm_ids);

// omega*alpha*(dPnL - gamma*|dPnL_inv|) - (1-omega)*|P - P*|
double mm_reward(double d_pnl, double d_pnl_inventory, double provision,
                 const MmParams& p);

// omega*alpha*(dPnL - gamma*|dPnL_inv|)
//   - ((1-omega)/2)*((dev_buy_t - dev_buy_prev) + (dev_sell_t - dev_sell_prev))
// In DeviationLevel mode the penalty uses the current deviations directly.
double lt_reward(double d_pnl, double d_pnl_inventory, double dev_buy,
                 double dev_buy_prev, double dev_sell, double dev_sell_prev,
                 const LtParams& p,
                 LtRewardMode mode = LtRewardMode::DeviationChange);

// Squash a raw policy output into [lo, hi].
inline double tanh_affine(double raw, double lo, double hi) {
  return lo + (hi - lo) * (std::tanh(raw) + 1.0) / 2.0;
}

}  // namespace marketsim::agents
