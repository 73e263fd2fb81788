#pragma once

#include <cstdint>

namespace marketsim {

// Prices are integer ticks (1 tick = $0.01). Quantities are integer shares,
// traded in lots of 100 shares. Cash is kept in integer cents so account
// sums are exact.
using Ticks = std::int64_t;
using Shares = std::int64_t;
using Cents = std::int64_t;
using OrderId = std::uint64_t;
using AgentId = std::uint32_t;
using Step = std::int64_t;

inline constexpr double kTickDollars = 0.01;
inline constexpr Shares kLotShares = 100;

inline constexpr Cents cents_of(Ticks price, Shares qty) { return price * qty; }

inline constexpr double dollars(Cents c) { return static_cast<double>(c) / 100.0; }
inline constexpr double tick_dollars(double ticks) { return ticks * kTickDollars; }

enum class Side : std::uint8_t { Bid, Ask };
enum class OrderKind : std::uint8_t { Limit, Market };

inline constexpr Side opposite(Side s) { return s == Side::Bid ? Side::Ask : Side::Bid; }

}  // namespace marketsim
