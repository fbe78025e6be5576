#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "advtrade/agents.hpp"
#include "advtrade/features.hpp"
#include "advtrade/lob.hpp"
#include "advtrade/rng.hpp"
#include "advtrade/surrogate.hpp"

namespace advtrade::adversarial {

/// L-infinity budget in standardized feature units.
class Epsilon {
public:
    explicit Epsilon(double value);
    double value() const { return value_; }

private:
    double value_;
};

/// sign of d L(x, f(x)) / dx in standardized space. For the logistic
/// surrogate this is sign((sigma - f(x)) * w) per coordinate; an exactly zero
/// component maps to +1.
SignVector gradient_signs(const surrogate::LogisticSurrogate& model, const FeatureVector& raw);

/// True when coordinate i of x is padding (absent level).
bool is_padding(const FeatureVector& x, std::size_t i);

/// Shifts every non-padding coordinate by epsilon * eta in standardized space,
/// maps back to raw units and restores feasibility: quantities are floored at
/// zero and prices at one tick. Padding is left untouched. epsilon may be 0.
FeatureVector perturb(const surrogate::Standardizer& standardizer, const FeatureVector& raw, const SignVector& eta,
                      double epsilon);

/// Same amplitude as perturb, random uniform signs.
FeatureVector noise_perturb(const surrogate::Standardizer& standardizer, const FeatureVector& raw, double epsilon,
                            Rng& rng);

struct CurvePoint {
    double epsilon = 0.0;
    double accuracy_adversarial = 1.0;
    double accuracy_noise = 1.0;
};

struct AttackCurve {
    std::vector<CurvePoint> points;
    std::size_t samples = 0; ///< initially correct samples used
};

/// Log-spaced grid of `points` values on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int points);

/// Accuracy of the surrogate on its initially correct samples after FGSM and
/// after amplitude-matched sign noise, for each epsilon. The grid must be
/// non-negative and strictly increasing. Throws std::invalid_argument when no
/// sample is initially correct.
AttackCurve attack_curve(const surrogate::LogisticSurrogate& model, const surrogate::Dataset& data,
                         std::span<const double> epsilons, std::uint64_t seed);

void write_attack_curve_csv(std::ostream& os, const AttackCurve& curve);

struct ForestParams {
    int trees = 50;
    int max_depth = 12;
    int max_features = 0; ///< 0 selects floor(sqrt(80))
    int min_samples_leaf = 1;
    int bins = 256;       ///< histogram bins per feature for split search
    bool bootstrap = true;
    std::uint64_t seed = 1;
};

/// Multi-output random forest: each tree maps a feature vector to a full
/// sign vector; prediction is a per-coordinate majority vote (ties -> +1).
class SignEstimator {
public:
    struct Node {
        int feature = -1; ///< -1 marks a leaf
        double threshold = 0.0;
        int left = -1;  ///< child for x[feature] <= threshold
        int right = -1;
        int leaf = -1;  ///< index into leaves when feature == -1
    };
    struct Tree {
        std::vector<Node> nodes;
        std::vector<SignVector> leaves;
    };

    SignEstimator() = default;
    explicit SignEstimator(std::vector<Tree> trees) : trees_(std::move(trees)) {}

    SignVector predict(const FeatureVector& x) const;
    const std::vector<Tree>& trees() const { return trees_; }

    void save(std::ostream& os) const;
    static SignEstimator load(std::istream& is);

private:
    std::vector<Tree> trees_;
};

/// Generic multi-output fit on explicit sign targets.
SignEstimator fit_forest(std::span<const FeatureVector> rows, std::span<const SignVector> targets,
                         const ForestParams& params);

/// Fits the forest on gradient_signs targets of the surrogate. Throws on an empty input.
SignEstimator train_estimator(const surrogate::LogisticSurrogate& model, std::span<const FeatureVector> rows,
                              const ForestParams& params);

SignVector estimate_signs(const SignEstimator& estimator, const FeatureVector& x);

struct Agreement {
    std::vector<double> per_coordinate;       ///< fraction of rows matching the oracle
    std::vector<bool> non_constant;           ///< oracle target varies across the rows
    double mean_non_constant = 0.0;
};

/// Held-out comparison of the estimator against gradient_signs.
Agreement estimator_agreement(const SignEstimator& estimator, const surrogate::LogisticSurrogate& model,
                              std::span<const FeatureVector> rows);

/// Maps a sign vector onto 1-lot orders at existing book levels. Price
/// coordinates are ignored. Bid-quantity coordinate at depth d: +1 bids at
/// b^d, -1 offers at o^d. Offer-quantity coordinate at depth d: +1 offers at
/// o^d, -1 bids at b^d. Missing depths emit nothing. Cancels all live orders.
agents::QuoteIntent signs_to_orders(const SignVector& eta, const lob::DepthSnapshot& snapshot,
                                    const agents::AgentState& state);

} // namespace advtrade::adversarial
