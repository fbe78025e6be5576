#include "advtrade/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace advtrade::pricing {

namespace {

void validate(const ReferencePriceParams& p) {
    if (p.window < 1) throw std::invalid_argument("reference price window must be >= 1");
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

} // namespace

ReferencePrice::ReferencePrice(const ReferencePriceParams& params)
    : ReferencePrice(params, std::vector<double>(static_cast<std::size_t>(std::max(params.window, 1)), params.initial)) {}

ReferencePrice::ReferencePrice(const ReferencePriceParams& params, std::vector<double> history) : params_(params) {
    validate(params_);
    if (history.empty()) throw std::invalid_argument("reference price history must be non-empty");
    for (double m : history) {
        if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("reference prices must be positive");
    }
    const auto n = static_cast<std::size_t>(params_.window);
    if (history.size() > n) history.erase(history.begin(), history.end() - static_cast<std::ptrdiff_t>(n));
    history_.assign(history.begin(), history.end());
}

double ReferencePrice::history_mean() const {
    return std::accumulate(history_.begin(), history_.end(), 0.0) / static_cast<double>(history_.size());
}

double ReferencePrice::update(std::optional<Price> best_bid, std::optional<Price> best_offer) {
    const double prev = history_.back();
    double next = prev;
    if (best_bid && best_offer) {
        const double mid = 0.5 * (best_bid->to_double() + best_offer->to_double());
        const double filtered = std::abs(mid / history_mean() - 1.0) < params_.alpha ? mid : prev;
        next = prev * std::clamp(filtered / prev, 1.0 - params_.alpha, 1.0 + params_.alpha);
    }
    history_.push_back(next);
    if (history_.size() > static_cast<std::size_t>(params_.window)) history_.pop_front();
    return next;
}

} // namespace advtrade::pricing
