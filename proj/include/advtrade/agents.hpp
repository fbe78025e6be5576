#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "advtrade/features.hpp"
#include "advtrade/lob.hpp"
#include "advtrade/rng.hpp"
#include "advtrade/types.hpp"

namespace advtrade::agents {

enum class Kind { Investor, MarketMaker, Noisy, Adversarial };
enum class Bias { None, Bullish, Bearish };

const char* to_string(Kind k);

struct AgentState {
    AgentId agent_id = 0;
    Kind kind = Kind::Investor;
    Bias bias = Bias::None;
    double stop_loss_level = -50000.0;
    bool stopped = false;
    std::vector<OrderId> live_order_ids;
};

AgentState make_investor(AgentId id, Bias bias, double stop_loss_level);
AgentState make_agent(AgentId id, Kind kind, double stop_loss_level);

/// Bias assignment for n investors with |#bullish - #bearish| <= 1.
std::vector<Bias> balanced_biases(int investors);

struct Quote {
    Side side = Side::Bid;
    Price price;
    Quantity quantity = 0;

    bool operator==(const Quote&) const = default;
};

struct QuoteIntent {
    std::vector<OrderId> cancels;
    std::vector<Quote> quotes;
};

/// Distribution of the investor placement offset u.
///
/// With `levels == 0` u is continuous uniform on [-half_width, half_width].
/// Otherwise u takes `levels` evenly spaced values on that interval, where
/// the k-th value counted from the side nearest the reference price has
/// weight decay^k. decay == 1 is the discrete uniform.
struct PlacementNoise {
    double half_width = 0.005;
    int levels = 0;
    double decay = 1.0;
    double center = 0.0; ///< added to every draw

    double sample(Bias bias, Rng& rng) const;
};

struct SizeRange {
    Quantity min = 1;
    Quantity max = 8;

    Quantity sample(Rng& rng) const { return rng.uniform_int(min, max); }
};

/// Bullish: buy at m * 0.99 * (1 + u). Bearish: sell at m * 1.01 * (1 + u).
/// Cancels every live order first.
QuoteIntent investor_quotes(const AgentState& state, double reference_price, double u, Quantity quantity);

/// Market maker skewed on the book imbalance sign iota:
/// bid b1 * 0.95 * (1 + iota * alpha), offer o1 * 1.05 * (1 + iota * alpha),
/// both for `size` lots. With a one-sided book it only cancels.
QuoteIntent market_maker_quotes(const AgentState& state, const lob::DepthSnapshot& snapshot, double alpha,
                                Quantity size);

/// 80 independent fair +/-1 draws.
SignVector noisy_sign_vector(Rng& rng);

/// Trips the stop when mark_pnl <= stop_loss_level. On the first trip the
/// returned intent cancels every live order; afterwards it is a no-op.
std::optional<QuoteIntent> apply_stop_loss(AgentState& state, double mark_pnl);

} // namespace advtrade::agents
