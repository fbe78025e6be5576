#include "advtrade/surrogate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <json.hpp>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "advtrade/csv.hpp"
#include "advtrade/rng.hpp"

namespace advtrade::surrogate {

using nlohmann::json;

FeatureVector featurize(const lob::DepthSnapshot& snapshot) {
    FeatureVector x{};
    for (std::size_t j = 0; j < kBookDepth; ++j) {
        if (j < snapshot.bids.size()) {
            x[kBidPriceOffset + j] = snapshot.bids[j].price.to_double();
            x[kBidQtyOffset + j] = static_cast<double>(snapshot.bids[j].quantity);
        } else {
            x[kBidPriceOffset + j] = kMissingPrice;
            x[kBidQtyOffset + j] = kMissingQuantity;
        }
        if (j < snapshot.offers.size()) {
            x[kOfferPriceOffset + j] = snapshot.offers[j].price.to_double();
            x[kOfferQtyOffset + j] = static_cast<double>(snapshot.offers[j].quantity);
        } else {
            x[kOfferPriceOffset + j] = kMissingPrice;
            x[kOfferQtyOffset + j] = kMissingQuantity;
        }
    }
    return x;
}

std::optional<int> label(double reference_now, double reference_next) {
    if (reference_next > reference_now) return 1;
    if (reference_next < reference_now) return 0;
    return std::nullopt;
}

void Dataset::append(const Dataset& other) {
    features.insert(features.end(), other.features.begin(), other.features.end());
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    groups.insert(groups.end(), other.groups.begin(), other.groups.end());
}

std::pair<Dataset, Dataset> split_by_group(const Dataset& data, double test_fraction, std::uint64_t seed) {
    std::set<std::int32_t> distinct(data.groups.begin(), data.groups.end());
    std::vector<std::int32_t> order(distinct.begin(), distinct.end());
    Rng rng(seed);
    rng.shuffle(std::span(order));
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(order.size())));
    std::set<std::int32_t> test_groups(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));

    Dataset train, test;
    for (std::size_t i = 0; i < data.size(); ++i) {
        Dataset& dst = test_groups.contains(data.groups[i]) ? test : train;
        dst.add(data.features[i], data.labels[i], data.groups[i]);
    }
    return {std::move(train), std::move(test)};
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
    os << "sim";
    for (std::size_t j = 0; j < kFeatureCount; ++j) os << ",f" << j;
    os << ",label\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        os << data.groups[i];
        for (double v : data.features[i]) os << ',' << format_double(v);
        os << ',' << data.labels[i] << '\n';
    }
}

Dataset read_dataset_csv(std::istream& is) {
    Dataset data;
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("dataset csv: missing header");
    if (split_csv_line(line).size() != kFeatureCount + 2) throw std::invalid_argument("dataset csv: bad header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != kFeatureCount + 2) throw std::invalid_argument("dataset csv: bad row width");
        FeatureVector x{};
        for (std::size_t j = 0; j < kFeatureCount; ++j) x[j] = parse_double(fields[j + 1]);
        data.add(x, static_cast<int>(parse_double(fields.back())), static_cast<std::int32_t>(parse_double(fields[0])));
    }
    return data;
}

Standardizer Standardizer::fit(std::span<const FeatureVector> rows) {
    if (rows.empty()) throw std::invalid_argument("cannot fit a standardizer on no rows");
    Standardizer s;
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows)
        for (std::size_t j = 0; j < kFeatureCount; ++j) s.mean[j] += r[j];
    for (auto& m : s.mean) m /= n;
    for (const auto& r : rows)
        for (std::size_t j = 0; j < kFeatureCount; ++j) s.scale[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
    for (auto& v : s.scale) {
        v = std::sqrt(v / n);
        if (!(v > 1e-12)) v = 1.0;
    }
    return s;
}

Standardizer Standardizer::identity() {
    Standardizer s;
    s.scale.fill(1.0);
    return s;
}

FeatureVector Standardizer::standardize(const FeatureVector& raw) const {
    FeatureVector z;
    for (std::size_t j = 0; j < kFeatureCount; ++j) z[j] = (raw[j] - mean[j]) / scale[j];
    return z;
}

FeatureVector Standardizer::unstandardize(const FeatureVector& z) const {
    FeatureVector raw;
    for (std::size_t j = 0; j < kFeatureCount; ++j) raw[j] = mean[j] + scale[j] * z[j];
    return raw;
}

double sigmoid(double s) {
    if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

namespace {

double softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

double score(std::span<const double> w, double b, const FeatureVector& z) {
    double s = b;
    for (std::size_t j = 0; j < kFeatureCount; ++j) s += w[j] * z[j];
    return s;
}

} // namespace

Prediction predict_standardized(const LogisticSurrogate& model, const FeatureVector& z) {
    const double p = sigmoid(score(model.weights, model.bias, z));
    return {p >= 0.5 ? 1 : 0, p};
}

Prediction predict(const LogisticSurrogate& model, const FeatureVector& raw) {
    return predict_standardized(model, model.standardizer.standardize(raw));
}

double loss_standardized(const LogisticSurrogate& model, const FeatureVector& z, int y) {
    const double s = score(model.weights, model.bias, z);
    return y == 1 ? softplus(-s) : softplus(s);
}

double loss(const LogisticSurrogate& model, const FeatureVector& raw, int y) {
    return loss_standardized(model, model.standardizer.standardize(raw), y);
}

FeatureVector input_gradient(const LogisticSurrogate& model, const FeatureVector& z, int y) {
    // sigma(s) - 1 == -sigma(-s), without the cancellation near saturation.
    const double s = score(model.weights, model.bias, z);
    const double residual = y == 1 ? -sigmoid(-s) : sigmoid(s);
    FeatureVector g;
    for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] = residual * model.weights[j];
    return g;
}

double training_objective(std::span<const double> weights, double bias, std::span<const FeatureVector> z,
                          std::span<const int> y, double l2) {
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double s = score(weights, bias, z[i]);
        total += softplus(s) - (y[i] == 1 ? s : 0.0);
    }
    double norm2 = 0.0;
    for (double w : weights) norm2 += w * w;
    return total + 0.5 * l2 * norm2;
}

std::vector<double> training_gradient(std::span<const double> weights, double bias, std::span<const FeatureVector> z,
                                      std::span<const int> y, double l2) {
    std::vector<double> g(kFeatureCount + 1, 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double r = sigmoid(score(weights, bias, z[i])) - static_cast<double>(y[i]);
        for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] += r * z[i][j];
        g[kFeatureCount] += r;
    }
    for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] += l2 * weights[j];
    return g;
}

LogisticSurrogate train(const Dataset& data, const TrainParams& params) {
    if (data.empty()) throw std::invalid_argument("cannot train on an empty dataset");
    const auto positives = std::count(data.labels.begin(), data.labels.end(), 1);
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(data.size())) {
        throw std::invalid_argument("training data must contain both classes");
    }

    LogisticSurrogate model;
    model.standardizer = Standardizer::fit(data.features);
    std::vector<FeatureVector> z;
    z.reserve(data.size());
    for (const auto& x : data.features) z.push_back(model.standardizer.standardize(x));

    constexpr int kDim = static_cast<int>(kFeatureCount) + 1;
    std::vector<double> theta(kDim, 0.0); // weights then bias
    auto objective = [&](const std::vector<double>& t) {
        return training_objective(std::span(t).first(kFeatureCount), t[kFeatureCount], z, data.labels, params.l2);
    };

    double current = objective(theta);
    model.report.rows = data.size();
    model.report.objective_trace.push_back(current);
    const double n = static_cast<double>(data.size());

    for (int iter = 0; iter < params.max_iterations; ++iter) {
        const auto w = std::span<const double>(theta).first(kFeatureCount);
        const auto grad = training_gradient(w, theta[kFeatureCount], z, data.labels, params.l2);
        double gmax = 0.0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        if (gmax / n < params.tolerance) {
            model.report.converged = true;
            break;
        }

        Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(kDim, kDim);
        Eigen::VectorXd row(kDim);
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double p = sigmoid(score(w, theta[kFeatureCount], z[i]));
            for (std::size_t j = 0; j < kFeatureCount; ++j) row[static_cast<Eigen::Index>(j)] = z[i][j];
            row[kDim - 1] = 1.0;
            hessian.selfadjointView<Eigen::Lower>().rankUpdate(row, p * (1.0 - p));
        }
        hessian = hessian.selfadjointView<Eigen::Lower>();
        for (int j = 0; j < kDim - 1; ++j) hessian(j, j) += params.l2;
        hessian(kDim - 1, kDim - 1) += 1e-10 * n;

        Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(grad.data(), kDim);
        Eigen::VectorXd step = hessian.ldlt().solve(-g);

        // Backtracking keeps the objective monotone non-increasing.
        double t = 1.0;
        const double slope = g.dot(step);
        std::vector<double> candidate(kDim);
        double next = current;
        bool improved = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (int j = 0; j < kDim; ++j) candidate[static_cast<std::size_t>(j)] = theta[static_cast<std::size_t>(j)] + t * step[j];
            next = objective(candidate);
            if (next <= current + 1e-4 * t * slope) {
                improved = true;
                break;
            }
            t *= 0.5;
        }
        model.report.iterations = iter + 1;
        if (!improved) {
            model.report.converged = true; // no further descent available at working precision
            break;
        }
        const double change = current - next;
        theta = candidate;
        current = next;
        model.report.objective_trace.push_back(current);
        if (change <= 1e-14 * std::max(1.0, std::abs(current))) {
            model.report.converged = true;
            break;
        }
    }

    std::copy(theta.begin(), theta.begin() + kFeatureCount, model.weights.begin());
    model.bias = theta[kFeatureCount];
    return model;
}

Metrics evaluate(const LogisticSurrogate& model, const Dataset& data) {
    if (data.empty()) throw std::invalid_argument("cannot evaluate on an empty dataset");
    Metrics m;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int predicted = predict(model, data.features[i]).label;
        const int actual = data.labels[i];
        if (predicted == 1 && actual == 1) ++m.true_positive;
        else if (predicted == 1) ++m.false_positive;
        else if (actual == 0) ++m.true_negative;
        else ++m.false_negative;
    }
    const auto predicted_up = m.true_positive + m.false_positive;
    m.precision = predicted_up == 0 ? 0.0 : static_cast<double>(m.true_positive) / static_cast<double>(predicted_up);
    m.accuracy = static_cast<double>(m.true_positive + m.true_negative) / static_cast<double>(data.size());
    return m;
}

void save_model(std::ostream& os, const LogisticSurrogate& model) {
    json j;
    j["format"] = "advtrade.logistic_surrogate";
    j["version"] = 1;
    j["layout"] = kLayoutTag;
    j["mean"] = model.standardizer.mean;
    j["scale"] = model.standardizer.scale;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["training"] = {{"rows", model.report.rows},
                     {"iterations", model.report.iterations},
                     {"converged", model.report.converged},
                     {"objective", model.report.objective_trace.empty() ? 0.0 : model.report.objective_trace.back()}};
    os << j.dump(1) << '\n';
}

LogisticSurrogate load_model(std::istream& is) {
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("model file: ") + e.what());
    }
    if (j.value("format", "") != "advtrade.logistic_surrogate" || j.value("version", 0) != 1) {
        throw std::invalid_argument("model file: unsupported format or version");
    }
    if (j.value("layout", "") != kLayoutTag) throw std::invalid_argument("model file: feature layout mismatch");
    LogisticSurrogate m;
    try {
        m.standardizer.mean = j.at("mean").get<FeatureVector>();
        m.standardizer.scale = j.at("scale").get<FeatureVector>();
        m.weights = j.at("weights").get<FeatureVector>();
        m.bias = j.at("bias").get<double>();
        if (j.contains("training")) {
            const auto& t = j["training"];
            m.report.rows = t.value("rows", std::size_t{0});
            m.report.iterations = t.value("iterations", 0);
            m.report.converged = t.value("converged", false);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("model file: ") + e.what());
    }
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (!(m.standardizer.scale[i] > 0.0)) throw std::invalid_argument("model file: non-positive scale");
    }
    return m;
}

} // namespace advtrade::surrogate
