#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "marketsim/agents/mm_math.hpp"
#include "marketsim/lob/order_book.hpp"

namespace marketsim::agents {

inline constexpr int kMmObsDim = 32;
inline constexpr int kLtObsDim = 33;

struct ObsScales {
  double initial_price_ticks = 10000.0;
  double initial_cash_dollars = 1e6;
  double depth_scale_shares = 10000.0;
  double inventory_scale_shares = 10000.0;
  double tau_scale = 1000.0;
};

// Shared market block (25 entries): the last 5 mids normalized by the
// initial price, then top-5 bid prices, bid quantities, ask prices, ask
// quantities. Prices enter as offsets from the current mid, relative to
// mid; missing levels are (0, 0).
void append_market_block(std::vector<double>& obs,
                         const std::deque<double>& mid_history_ticks,
                         const lob::DepthSnapshot& depth,
                         const ObsScales& scales);

std::vector<double> mm_observation(const std::deque<double>& mid_history_ticks,
                                   const lob::DepthSnapshot& depth,
                                   double provision, Shares inventory,
                                   double buying_power_dollars,
                                   const MmParams& params,
                                   const ObsScales& scales);

std::vector<double> lt_observation(const std::deque<double>& mid_history_ticks,
                                   const lob::DepthSnapshot& depth,
                                   Shares inventory,
                                   double buying_power_dollars,
                                   const LtParams& params,
                                   const ObsScales& scales);

}  // namespace marketsim::agents
