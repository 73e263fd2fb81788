#include "marketsim/agents/observation.hpp"

#include <cassert>

namespace marketsim::agents {

void append_market_block(std::vector<double>& obs,
                         const std::deque<double>& mid_history_ticks,
                         const lob::DepthSnapshot& depth,
                         const ObsScales& scales) {
  // mids t-4..t, padded at the front with the oldest known value
  assert(!mid_history_ticks.empty());
  const std::size_t n = mid_history_ticks.size();
  for (int i = 0; i < 5; ++i) {
    const std::size_t idx =
        n >= 5 ? n - 5 + static_cast<std::size_t>(i)
               : static_cast<std::size_t>(std::max(0, i - (5 - static_cast<int>(n))));
    obs.push_back(mid_history_ticks[idx] / scales.initial_price_ticks);
  }
  const double mid = depth.mid_ticks;
  const auto push_side = [&](const std::vector<lob::DepthLevel>& levels) {
    for (int l = 0; l < 5; ++l) {
      if (l < static_cast<int>(levels.size())) {
        obs.push_back((static_cast<double>(levels[l].price) - mid) / mid);
      } else {
        obs.push_back(0.0);
      }
    }
    for (int l = 0; l < 5; ++l) {
      if (l < static_cast<int>(levels.size())) {
        obs.push_back(static_cast<double>(levels[l].quantity) /
                      scales.depth_scale_shares);
      } else {
        obs.push_back(0.0);
      }
    }
  };
  push_side(depth.bids);
  push_side(depth.asks);
}

std::vector<double> mm_observation(const std::deque<double>& mid_history_ticks,
                                   const lob::DepthSnapshot& depth,
                                   double provision, Shares inventory,
                                   double buying_power_dollars,
                                   const MmParams& params,
                                   const ObsScales& scales) {
  std::vector<double> obs;
  obs.reserve(kMmObsDim);
  append_market_block(obs, mid_history_ticks, depth, scales);
  obs.push_back(provision);
  obs.push_back(static_cast<double>(inventory) / scales.inventory_scale_shares);
  obs.push_back(buying_power_dollars / scales.initial_cash_dollars);
  obs.push_back(params.omega);
  obs.push_back(params.gamma_inv);
  obs.push_back(params.alpha);
  obs.push_back(params.target_provision);
  assert(static_cast<int>(obs.size()) == kMmObsDim);
  return obs;
}

std::vector<double> lt_observation(const std::deque<double>& mid_history_ticks,
                                   const lob::DepthSnapshot& depth,
                                   Shares inventory,
                                   double buying_power_dollars,
                                   const LtParams& params,
                                   const ObsScales& scales) {
  std::vector<double> obs;
  obs.reserve(kLtObsDim);
  append_market_block(obs, mid_history_ticks, depth, scales);
  obs.push_back(static_cast<double>(inventory) / scales.inventory_scale_shares);
  obs.push_back(buying_power_dollars / scales.initial_cash_dollars);
  obs.push_back(params.omega);
  obs.push_back(params.gamma_inv);
  obs.push_back(params.alpha);
  obs.push_back(params.f_buy);
  obs.push_back(params.f_sell);
  obs.push_back(static_cast<double>(params.tau) / scales.tau_scale);
  assert(static_cast<int>(obs.size()) == kLtObsDim);
  return obs;
}

}  // namespace marketsim::agents
