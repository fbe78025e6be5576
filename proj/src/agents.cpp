#include "advtrade/agents.hpp"

#include <cmath>
#include <stdexcept>

namespace advtrade::agents {

const char* to_string(Kind k) {
    switch (k) {
    case Kind::Investor: return "investor";
    case Kind::MarketMaker: return "market_maker";
    case Kind::Noisy: return "noisy";
    case Kind::Adversarial: return "adversarial";
    }
    return "?";
}

AgentState make_investor(AgentId id, Bias bias, double stop_loss_level) {
    if (bias == Bias::None) throw std::invalid_argument("investors need a bias");
    AgentState s;
    s.agent_id = id;
    s.kind = Kind::Investor;
    s.bias = bias;
    s.stop_loss_level = stop_loss_level;
    return s;
}

AgentState make_agent(AgentId id, Kind kind, double stop_loss_level) {
    if (kind == Kind::Investor) throw std::invalid_argument("use make_investor for investors");
    AgentState s;
    s.agent_id = id;
    s.kind = kind;
    s.stop_loss_level = stop_loss_level;
    return s;
}

std::vector<Bias> balanced_biases(int investors) {
    std::vector<Bias> out;
    out.reserve(static_cast<std::size_t>(std::max(investors, 0)));
    for (int i = 0; i < investors; ++i) out.push_back(i % 2 == 0 ? Bias::Bullish : Bias::Bearish);
    return out;
}

double PlacementNoise::sample(Bias bias, Rng& rng) const {
    if (levels <= 0) return center + rng.uniform(-half_width, half_width);
    if (levels == 1) return center;
    // k counts steps away from the edge closest to the reference price.
    std::int64_t k = 0;
    if (decay == 1.0) {
        k = rng.uniform_int(0, levels - 1);
    } else {
        const double total = (1.0 - std::pow(decay, levels)) / (1.0 - decay);
        double target = rng.uniform01() * total;
        double weight = 1.0;
        while (k < levels - 1 && target >= weight) {
            target -= weight;
            weight *= decay;
            ++k;
        }
    }
    const double step = 2.0 * half_width / (levels - 1);
    const double inward = half_width - static_cast<double>(k) * step;
    return center + (bias == Bias::Bearish ? -inward : inward);
}

QuoteIntent investor_quotes(const AgentState& state, double reference_price, double u, Quantity quantity) {
    QuoteIntent intent;
    intent.cancels = state.live_order_ids;
    if (state.bias == Bias::Bullish) {
        intent.quotes.push_back({Side::Bid, Price::from_double(reference_price * 0.99 * (1.0 + u)), quantity});
    } else if (state.bias == Bias::Bearish) {
        intent.quotes.push_back({Side::Offer, Price::from_double(reference_price * 1.01 * (1.0 + u)), quantity});
    }
    return intent;
}

QuoteIntent market_maker_quotes(const AgentState& state, const lob::DepthSnapshot& snapshot, double alpha,
                                Quantity size) {
    QuoteIntent intent;
    intent.cancels = state.live_order_ids;
    if (!snapshot.two_sided()) return intent;
    const double skew = 1.0 + lob::imbalance(snapshot).sign * alpha;
    const double bid = snapshot.bids.front().price.to_double() * 0.95 * skew;
    const double offer = snapshot.offers.front().price.to_double() * 1.05 * skew;
    intent.quotes.push_back({Side::Bid, Price::from_double(bid), size});
    intent.quotes.push_back({Side::Offer, Price::from_double(offer), size});
    return intent;
}

SignVector noisy_sign_vector(Rng& rng) {
    SignVector eta{};
    for (auto& s : eta) s = rng.coin() ? 1 : -1;
    return eta;
}

std::optional<QuoteIntent> apply_stop_loss(AgentState& state, double mark_pnl) {
    if (state.stopped || mark_pnl > state.stop_loss_level) return std::nullopt;
    state.stopped = true;
    QuoteIntent intent;
    intent.cancels = std::move(state.live_order_ids);
    state.live_order_ids.clear();
    return intent;
}

} // namespace advtrade::agents
