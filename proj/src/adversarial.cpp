#include "advtrade/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "advtrade/csv.hpp"

namespace advtrade::adversarial {

Epsilon::Epsilon(double value) : value_(value) {
    if (!(value > 0.0) || !std::isfinite(value)) throw std::invalid_argument("epsilon must be positive");
}

SignVector gradient_signs(const surrogate::LogisticSurrogate& model, const FeatureVector& raw) {
    // sigma - f is negative for f = 1 and positive for f = 0 even where sigma
    // rounds to 0 or 1, so take the sign from the label instead of the float.
    const FeatureVector z = model.standardizer.standardize(raw);
    const int target = surrogate::predict_standardized(model, z).label;
    const double residual_sign = target == 1 ? -1.0 : 1.0;
    SignVector eta{};
    for (std::size_t j = 0; j < kFeatureCount; ++j) eta[j] = residual_sign * model.weights[j] < 0.0 ? -1 : 1;
    return eta;
}

bool is_padding(const FeatureVector& x, std::size_t i) {
    const std::size_t price_index = is_price_coordinate(i) ? i : paired_coordinate(i);
    return x[price_index] == kMissingPrice;
}

FeatureVector perturb(const surrogate::Standardizer& standardizer, const FeatureVector& raw, const SignVector& eta,
                      double epsilon) {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
    constexpr double kMinPrice = 1.0 / static_cast<double>(Price::kScale);
    FeatureVector out = raw;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        if (is_padding(raw, j)) continue;
        const double shifted = raw[j] + epsilon * standardizer.scale[j] * eta[j];
        out[j] = is_price_coordinate(j) ? std::max(shifted, kMinPrice) : std::max(shifted, 0.0);
    }
    return out;
}

FeatureVector noise_perturb(const surrogate::Standardizer& standardizer, const FeatureVector& raw, double epsilon,
                            Rng& rng) {
    return perturb(standardizer, raw, agents::noisy_sign_vector(rng), epsilon);
}

std::vector<double> log_grid(double lo, double hi, int points) {
    if (points < 1 || !(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("bad log grid");
    std::vector<double> grid;
    for (int i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        grid.push_back(lo * std::pow(hi / lo, t));
    }
    return grid;
}

AttackCurve attack_curve(const surrogate::LogisticSurrogate& model, const surrogate::Dataset& data,
                         std::span<const double> epsilons, std::uint64_t seed) {
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
        if (!(epsilons[k] >= 0.0)) throw std::invalid_argument("epsilon grid must be non-negative");
        if (k > 0 && !(epsilons[k] > epsilons[k - 1])) throw std::invalid_argument("epsilon grid must increase");
    }
    std::vector<std::size_t> correct;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (surrogate::predict(model, data.features[i]).label == data.labels[i]) correct.push_back(i);
    }
    if (correct.empty()) throw std::invalid_argument("attack curve: no correctly predicted samples");

    std::vector<SignVector> directions;
    directions.reserve(correct.size());
    for (std::size_t i : correct) directions.push_back(gradient_signs(model, data.features[i]));

    AttackCurve curve;
    curve.samples = correct.size();
    Rng rng(seed);
    for (double eps : epsilons) {
        std::size_t adv_ok = 0, noise_ok = 0;
        for (std::size_t k = 0; k < correct.size(); ++k) {
            const auto& x = data.features[correct[k]];
            const int y = data.labels[correct[k]];
            if (surrogate::predict(model, perturb(model.standardizer, x, directions[k], eps)).label == y) ++adv_ok;
            if (surrogate::predict(model, noise_perturb(model.standardizer, x, eps, rng)).label == y) ++noise_ok;
        }
        const double n = static_cast<double>(correct.size());
        curve.points.push_back({eps, static_cast<double>(adv_ok) / n, static_cast<double>(noise_ok) / n});
    }
    return curve;
}

void write_attack_curve_csv(std::ostream& os, const AttackCurve& curve) {
    os << "epsilon,acc_adversarial,acc_noise\n";
    for (const auto& p : curve.points) {
        os << format_double(p.epsilon) << ',' << format_double(p.accuracy_adversarial) << ','
           << format_double(p.accuracy_noise) << '\n';
    }
}

SignEstimator train_estimator(const surrogate::LogisticSurrogate& model, std::span<const FeatureVector> rows,
                              const ForestParams& params) {
    if (rows.empty()) throw std::invalid_argument("estimator needs at least one row");
    std::vector<SignVector> targets;
    targets.reserve(rows.size());
    for (const auto& x : rows) targets.push_back(gradient_signs(model, x));
    return fit_forest(rows, targets, params);
}

SignVector estimate_signs(const SignEstimator& estimator, const FeatureVector& x) { return estimator.predict(x); }

Agreement estimator_agreement(const SignEstimator& estimator, const surrogate::LogisticSurrogate& model,
                              std::span<const FeatureVector> rows) {
    if (rows.empty()) throw std::invalid_argument("agreement needs at least one row");
    Agreement a;
    a.per_coordinate.assign(kFeatureCount, 0.0);
    std::vector<int> first(kFeatureCount, 0);
    a.non_constant.assign(kFeatureCount, false);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SignVector oracle = gradient_signs(model, rows[i]);
        const SignVector guess = estimator.predict(rows[i]);
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            if (oracle[j] == guess[j]) a.per_coordinate[j] += 1.0;
            if (i == 0) first[j] = oracle[j];
            else if (oracle[j] != first[j]) a.non_constant[j] = true;
        }
    }
    double sum = 0.0;
    int count = 0;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        a.per_coordinate[j] /= static_cast<double>(rows.size());
        if (a.non_constant[j]) {
            sum += a.per_coordinate[j];
            ++count;
        }
    }
    a.mean_non_constant = count == 0 ? 1.0 : sum / count;
    return a;
}

agents::QuoteIntent signs_to_orders(const SignVector& eta, const lob::DepthSnapshot& snapshot,
                                    const agents::AgentState& state) {
    agents::QuoteIntent intent;
    intent.cancels = state.live_order_ids;
    auto add = [&](Side side, std::size_t depth) {
        const auto& ladder = side == Side::Bid ? snapshot.bids : snapshot.offers;
        if (depth < ladder.size()) intent.quotes.push_back({side, ladder[depth].price, 1});
    };
    for (std::size_t d = 0; d < kBookDepth; ++d) {
        add(eta[kBidQtyOffset + d] > 0 ? Side::Bid : Side::Offer, d);
    }
    for (std::size_t d = 0; d < kBookDepth; ++d) {
        add(eta[kOfferQtyOffset + d] > 0 ? Side::Offer : Side::Bid, d);
    }
    return intent;
}

} // namespace advtrade::adversarial
