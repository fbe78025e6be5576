#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advtrade/features.hpp"
#include "advtrade/lob.hpp"

namespace advtrade::surrogate {

inline constexpr const char* kLayoutTag = "bid_px20,bid_qty20,offer_px20,offer_qty20";

/// First 20 levels per side copied into the fixed layout; absent levels are
/// padded with -1 (price) and 0 (quantity), deeper levels are dropped.
FeatureVector featurize(const lob::DepthSnapshot& snapshot);

/// Direction of the next reference-price move: 1 up, 0 down, nullopt on a tie.
std::optional<int> label(double reference_now, double reference_next);

struct Dataset {
    std::vector<FeatureVector> features;
    std::vector<int> labels;
    std::vector<std::int32_t> groups; ///< originating simulation, for group-wise splits

    std::size_t size() const { return features.size(); }
    bool empty() const { return features.empty(); }
    void add(const FeatureVector& x, int y, std::int32_t group) {
        features.push_back(x);
        labels.push_back(y);
        groups.push_back(group);
    }
    void append(const Dataset& other);
};

/// Splits whole groups: roughly `test_fraction` of the distinct groups (picked
/// by a seeded shuffle) go to the test side. Returns {train, test}.
std::pair<Dataset, Dataset> split_by_group(const Dataset& data, double test_fraction, std::uint64_t seed);

void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);

struct Standardizer {
    FeatureVector mean{};
    FeatureVector scale{};

    static Standardizer fit(std::span<const FeatureVector> rows);
    static Standardizer identity();
    FeatureVector standardize(const FeatureVector& raw) const;
    FeatureVector unstandardize(const FeatureVector& z) const;
};

struct TrainParams {
    double l2 = 1.0; ///< penalty on the weights (not the bias) in standardized space
    int max_iterations = 100;
    double tolerance = 1e-9; ///< stop when the max-norm gradient per row drops below this
};

struct TrainReport {
    std::vector<double> objective_trace; ///< penalized objective after every Newton step
    int iterations = 0;
    bool converged = false;
    std::size_t rows = 0;
};

/// Logistic direction classifier f. The weights live in standardized space;
/// the fitted standardizer travels with the model.
struct LogisticSurrogate {
    Standardizer standardizer = Standardizer::identity();
    FeatureVector weights{};
    double bias = 0.0;
    TrainReport report;
};

struct Prediction {
    int label = 0;
    double probability = 0.5; ///< P(up)
};

double sigmoid(double s);

/// Class 1 iff the probability is at least one half.
Prediction predict(const LogisticSurrogate& model, const FeatureVector& raw);
Prediction predict_standardized(const LogisticSurrogate& model, const FeatureVector& z);

/// Negative log-likelihood of one raw sample under label y.
double loss(const LogisticSurrogate& model, const FeatureVector& raw, int y);
double loss_standardized(const LogisticSurrogate& model, const FeatureVector& z, int y);

/// d loss / d z at standardized input z: (sigma - y) * w.
FeatureVector input_gradient(const LogisticSurrogate& model, const FeatureVector& z, int y);

/// Penalized training objective over standardized rows and its gradient
/// with respect to (w, b); the last gradient entry is the bias component.
double training_objective(std::span<const double> weights, double bias, std::span<const FeatureVector> z,
                          std::span<const int> y, double l2);
std::vector<double> training_gradient(std::span<const double> weights, double bias, std::span<const FeatureVector> z,
                                      std::span<const int> y, double l2);

/// Full-batch damped Newton fit. Throws std::invalid_argument on an empty or
/// single-class dataset.
LogisticSurrogate train(const Dataset& data, const TrainParams& params = {});

struct Metrics {
    double precision = 0.0; ///< TP / (TP + FP) for the up class, 0 when nothing is predicted up
    double accuracy = 0.0;
    std::size_t true_positive = 0;
    std::size_t false_positive = 0;
    std::size_t true_negative = 0;
    std::size_t false_negative = 0;
};

Metrics evaluate(const LogisticSurrogate& model, const Dataset& data);

void save_model(std::ostream& os, const LogisticSurrogate& model);
LogisticSurrogate load_model(std::istream& is);

} // namespace advtrade::surrogate
