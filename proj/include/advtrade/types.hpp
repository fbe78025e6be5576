#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace advtrade {

using OrderId = std::int64_t;
using AgentId = std::int32_t;
using Quantity = std::int64_t;
using RoundIndex = std::int32_t;

enum class Side : std::uint8_t { Bid, Offer };

inline constexpr Side opposite(Side s) { return s == Side::Bid ? Side::Offer : Side::Bid; }
const char* to_string(Side s);

/// Fixed-point price with four fractional digits. All matching and snapshot
/// comparisons happen on the integer tick count so results are bit-exact.
class Price {
public:
    static constexpr std::int64_t kScale = 10000;

    constexpr Price() = default;
    static constexpr Price from_ticks(std::int64_t ticks) { return Price(ticks); }
    /// Rounds to the nearest tick (half away from zero).
    static Price from_double(double value) { return Price(static_cast<std::int64_t>(std::llround(value * kScale))); }

    constexpr std::int64_t ticks() const { return ticks_; }
    constexpr double to_double() const { return static_cast<double>(ticks_) / kScale; }
    constexpr bool positive() const { return ticks_ > 0; }

    constexpr auto operator<=>(const Price&) const = default;

    std::string str() const;

private:
    constexpr explicit Price(std::int64_t ticks) : ticks_(ticks) {}
    std::int64_t ticks_ = 0;
};

std::ostream& operator<<(std::ostream& os, Price p);

} // namespace advtrade
