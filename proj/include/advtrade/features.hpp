#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace advtrade {

/// Book featurization layout: 20 levels per side, four blocks of 20.
inline constexpr std::size_t kBookDepth = 20;
inline constexpr std::size_t kFeatureCount = 4 * kBookDepth;

inline constexpr std::size_t kBidPriceOffset = 0;
inline constexpr std::size_t kBidQtyOffset = kBookDepth;
inline constexpr std::size_t kOfferPriceOffset = 2 * kBookDepth;
inline constexpr std::size_t kOfferQtyOffset = 3 * kBookDepth;

inline constexpr double kMissingPrice = -1.0;
inline constexpr double kMissingQuantity = 0.0;

using FeatureVector = std::array<double, kFeatureCount>;

/// Per-coordinate perturbation directions in the feature layout, each +1 or -1.
using SignVector = std::array<std::int8_t, kFeatureCount>;

inline constexpr bool is_price_coordinate(std::size_t i) {
    return i < kBidQtyOffset || (i >= kOfferPriceOffset && i < kOfferQtyOffset);
}

/// Index of the price paired with a quantity coordinate (and vice versa).
inline constexpr std::size_t paired_coordinate(std::size_t i) {
    return is_price_coordinate(i) ? i + kBookDepth : i - kBookDepth;
}

} // namespace advtrade
