#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "advtrade/adversarial.hpp"
#include "advtrade/csv.hpp"

namespace advtrade::adversarial {

namespace {

// Output columns that are equal (or negated) across the training rows have
// identical Gini impurity, so split search runs over one representative per
// equivalence class weighted by its multiplicity.
struct OutputClasses {
    std::vector<int> class_of;          // per output coordinate, -1 when constant
    std::vector<bool> negated;          // coordinate is the negation of its class representative
    std::vector<std::int8_t> constant;  // value for constant coordinates
    std::vector<double> multiplicity;   // per class
    std::vector<std::uint8_t> bits;     // row-major rows x classes, 1 where the representative is +1
    std::size_t count = 0;
};

OutputClasses reduce_outputs(std::span<const SignVector> targets) {
    const std::size_t n = targets.size();
    OutputClasses oc;
    oc.class_of.assign(kFeatureCount, -1);
    oc.negated.assign(kFeatureCount, false);
    oc.constant.assign(kFeatureCount, 1);
    std::vector<std::size_t> representative;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        bool constant = true;
        for (std::size_t i = 1; i < n && constant; ++i) constant = targets[i][j] == targets[0][j];
        if (constant) {
            oc.constant[j] = n == 0 ? 1 : targets[0][j];
            continue;
        }
        for (std::size_t c = 0; c < representative.size(); ++c) {
            const std::size_t r = representative[c];
            bool same = true, opposite = true;
            for (std::size_t i = 0; i < n && (same || opposite); ++i) {
                same = same && targets[i][j] == targets[i][r];
                opposite = opposite && targets[i][j] == -targets[i][r];
            }
            if (same || opposite) {
                oc.class_of[j] = static_cast<int>(c);
                oc.negated[j] = opposite && !same;
                oc.multiplicity[c] += 1.0;
                break;
            }
        }
        if (oc.class_of[j] < 0) {
            oc.class_of[j] = static_cast<int>(representative.size());
            representative.push_back(j);
            oc.multiplicity.push_back(1.0);
        }
    }
    oc.count = representative.size();
    oc.bits.resize(n * oc.count);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < oc.count; ++c) oc.bits[i * oc.count + c] = targets[i][representative[c]] > 0;
    return oc;
}

struct BinnedFeatures {
    std::vector<std::vector<double>> cuts; // per feature: code(x) = #cuts strictly below x
    std::vector<std::uint16_t> codes;      // feature-major: codes[f * rows + i]
    std::size_t rows = 0;

    std::size_t bins(std::size_t f) const { return cuts[f].size() + 1; }
    std::uint16_t code(std::size_t f, std::size_t i) const { return codes[f * rows + i]; }
};

BinnedFeatures bin_features(std::span<const FeatureVector> rows, int max_bins) {
    BinnedFeatures bf;
    bf.rows = rows.size();
    bf.cuts.resize(kFeatureCount);
    bf.codes.resize(kFeatureCount * rows.size());
    std::vector<double> values(rows.size());
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        for (std::size_t i = 0; i < rows.size(); ++i) values[i] = rows[i][f];
        std::sort(values.begin(), values.end());
        std::vector<double> distinct;
        std::unique_copy(values.begin(), values.end(), std::back_inserter(distinct));
        auto& cuts = bf.cuts[f];
        if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
            for (std::size_t k = 0; k + 1 < distinct.size(); ++k) cuts.push_back(0.5 * (distinct[k] + distinct[k + 1]));
        } else {
            for (int k = 1; k < max_bins; ++k) {
                const std::size_t pos = values.size() * static_cast<std::size_t>(k) / static_cast<std::size_t>(max_bins);
                const auto hi = std::lower_bound(distinct.begin(), distinct.end(), values[pos]);
                if (hi == distinct.begin()) continue;
                const double cut = 0.5 * (*(hi - 1) + *hi);
                if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
            }
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            bf.codes[f * rows.size() + i] =
                static_cast<std::uint16_t>(std::lower_bound(cuts.begin(), cuts.end(), rows[i][f]) - cuts.begin());
        }
    }
    return bf;
}

class TreeBuilder {
public:
    TreeBuilder(const BinnedFeatures& bf, const OutputClasses& oc, const ForestParams& params, Rng& rng)
        : bf_(bf), oc_(oc), params_(params), rng_(rng) {
        features_.resize(kFeatureCount);
        std::iota(features_.begin(), features_.end(), std::size_t{0});
        std::size_t max_bins = 1;
        for (std::size_t f = 0; f < kFeatureCount; ++f) max_bins = std::max(max_bins, bf.bins(f));
        hist_count_.resize(max_bins);
        hist_pos_.resize(max_bins * std::max<std::size_t>(oc.count, 1));
        max_features_ = params.max_features > 0
                            ? std::min<std::size_t>(static_cast<std::size_t>(params.max_features), kFeatureCount)
                            : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(kFeatureCount))));
    }

    SignEstimator::Tree build(std::vector<std::uint32_t>& sample) {
        tree_ = {};
        grow(sample, 0, sample.size(), 0);
        return std::move(tree_);
    }

private:
    double impurity(std::span<const double> positives, double n) const {
        if (n <= 0) return 0.0;
        double total = 0.0;
        for (std::size_t c = 0; c < oc_.count; ++c) total += oc_.multiplicity[c] * 2.0 * positives[c] * (n - positives[c]) / n;
        return total;
    }

    int make_leaf(std::span<const double> positives, double n) {
        SignVector v{};
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            const int c = oc_.class_of[j];
            if (c < 0) {
                v[j] = oc_.constant[j];
                continue;
            }
            const double pos = oc_.negated[j] ? n - positives[static_cast<std::size_t>(c)] : positives[static_cast<std::size_t>(c)];
            v[j] = 2.0 * pos >= n ? 1 : -1;
        }
        tree_.leaves.push_back(v);
        SignEstimator::Node node;
        node.leaf = static_cast<int>(tree_.leaves.size()) - 1;
        tree_.nodes.push_back(node);
        return static_cast<int>(tree_.nodes.size()) - 1;
    }

    int grow(std::vector<std::uint32_t>& idx, std::size_t begin, std::size_t end, int depth) {
        const std::size_t C = oc_.count;
        const double n = static_cast<double>(end - begin);
        std::vector<double> positives(C, 0.0);
        for (std::size_t k = begin; k < end; ++k)
            for (std::size_t c = 0; c < C; ++c) positives[c] += oc_.bits[idx[k] * C + c];

        const double parent = impurity(positives, n);
        const auto min_leaf = static_cast<std::size_t>(std::max(params_.min_samples_leaf, 1));
        if (depth >= params_.max_depth || end - begin < 2 * min_leaf || parent <= 0.0) return make_leaf(positives, n);

        // Partial Fisher-Yates picks the candidate features for this node.
        for (std::size_t k = 0; k < max_features_; ++k) {
            const auto r = static_cast<std::size_t>(rng_.uniform_int(static_cast<std::int64_t>(k), kFeatureCount - 1));
            std::swap(features_[k], features_[r]);
        }

        double best = parent - 1e-12;
        std::size_t best_feature = kFeatureCount;
        std::size_t best_bin = 0;
        std::vector<double> left_pos(C);
        for (std::size_t k = 0; k < max_features_; ++k) {
            const std::size_t f = features_[k];
            const std::size_t nb = bf_.bins(f);
            if (nb < 2) continue;
            std::fill_n(hist_count_.begin(), nb, 0.0);
            std::fill_n(hist_pos_.begin(), nb * C, 0.0);
            for (std::size_t s = begin; s < end; ++s) {
                const std::uint32_t i = idx[s];
                const std::size_t b = bf_.code(f, i);
                hist_count_[b] += 1.0;
                for (std::size_t c = 0; c < C; ++c) hist_pos_[b * C + c] += oc_.bits[i * C + c];
            }
            double left_n = 0.0;
            std::fill(left_pos.begin(), left_pos.end(), 0.0);
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                left_n += hist_count_[b];
                for (std::size_t c = 0; c < C; ++c) left_pos[c] += hist_pos_[b * C + c];
                if (hist_count_[b] == 0.0) continue;
                const double right_n = n - left_n;
                if (left_n < static_cast<double>(min_leaf)) continue;
                if (right_n < static_cast<double>(min_leaf)) break;
                double score = 0.0;
                for (std::size_t c = 0; c < C; ++c) {
                    const double rp = positives[c] - left_pos[c];
                    score += oc_.multiplicity[c] * 2.0 *
                             (left_pos[c] * (left_n - left_pos[c]) / left_n + rp * (right_n - rp) / right_n);
                }
                if (score < best) {
                    best = score;
                    best_feature = f;
                    best_bin = b;
                }
            }
        }
        if (best_feature == kFeatureCount) return make_leaf(positives, n);

        auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                  idx.begin() + static_cast<std::ptrdiff_t>(end),
                                  [&](std::uint32_t i) { return bf_.code(best_feature, i) <= best_bin; });
        const auto split = static_cast<std::size_t>(mid - idx.begin());

        const int self = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back({});
        tree_.nodes[static_cast<std::size_t>(self)].feature = static_cast<int>(best_feature);
        tree_.nodes[static_cast<std::size_t>(self)].threshold = bf_.cuts[best_feature][best_bin];
        const int left = grow(idx, begin, split, depth + 1);
        const int right = grow(idx, split, end, depth + 1);
        tree_.nodes[static_cast<std::size_t>(self)].left = left;
        tree_.nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    const BinnedFeatures& bf_;
    const OutputClasses& oc_;
    const ForestParams& params_;
    Rng& rng_;
    std::vector<std::size_t> features_;
    std::size_t max_features_ = 8;
    std::vector<double> hist_count_;
    std::vector<double> hist_pos_;
    SignEstimator::Tree tree_;
};

const SignVector& tree_leaf(const SignEstimator::Tree& tree, const FeatureVector& x) {
    std::size_t at = 0;
    while (tree.nodes[at].feature >= 0) {
        const auto& node = tree.nodes[at];
        at = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
    }
    return tree.leaves[static_cast<std::size_t>(tree.nodes[at].leaf)];
}

} // namespace

SignEstimator fit_forest(std::span<const FeatureVector> rows, std::span<const SignVector> targets,
                         const ForestParams& params) {
    if (rows.empty() || rows.size() != targets.size()) throw std::invalid_argument("forest: rows and targets mismatch");
    if (params.trees < 1 || params.max_depth < 0 || params.bins < 2 || params.bins > 65535) {
        throw std::invalid_argument("forest: bad hyperparameters");
    }
    const OutputClasses oc = reduce_outputs(targets);
    const BinnedFeatures bf = bin_features(rows, params.bins);
    const auto n = static_cast<std::uint32_t>(rows.size());

    std::vector<SignEstimator::Tree> trees;
    trees.reserve(static_cast<std::size_t>(params.trees));
    for (int t = 0; t < params.trees; ++t) {
        Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
        std::vector<std::uint32_t> sample(n);
        if (params.bootstrap) {
            for (auto& s : sample) s = static_cast<std::uint32_t>(rng.uniform_int(0, n - 1));
        } else {
            std::iota(sample.begin(), sample.end(), 0u);
        }
        TreeBuilder builder(bf, oc, params, rng);
        trees.push_back(builder.build(sample));
    }
    return SignEstimator(std::move(trees));
}

SignVector SignEstimator::predict(const FeatureVector& x) const {
    std::array<int, kFeatureCount> votes{};
    for (const auto& tree : trees_) {
        const SignVector& leaf = tree_leaf(tree, x);
        for (std::size_t j = 0; j < kFeatureCount; ++j) votes[j] += leaf[j];
    }
    SignVector out{};
    for (std::size_t j = 0; j < kFeatureCount; ++j) out[j] = votes[j] >= 0 ? 1 : -1;
    return out;
}

// Text format, one record per line:
//   advtrade-sign-forest 1
//   trees <T>
//   tree <node_count> <leaf_count>          (T times, each followed by)
//   split <feature> <threshold> <left> <right>   or   leaf <leaf_index>
//   signs <80 characters of '+' / '-'>      (leaf_count lines)
void SignEstimator::save(std::ostream& os) const {
    os << "advtrade-sign-forest 1\n";
    os << "trees " << trees_.size() << '\n';
    for (const auto& tree : trees_) {
        os << "tree " << tree.nodes.size() << ' ' << tree.leaves.size() << '\n';
        for (const auto& node : tree.nodes) {
            if (node.feature < 0) {
                os << "leaf " << node.leaf << '\n';
            } else {
                os << "split " << node.feature << ' ' << format_double(node.threshold) << ' ' << node.left << ' '
                   << node.right << '\n';
            }
        }
        for (const auto& leaf : tree.leaves) {
            os << "signs ";
            for (auto s : leaf) os << (s > 0 ? '+' : '-');
            os << '\n';
        }
    }
}

SignEstimator SignEstimator::load(std::istream& is) {
    auto fail = [](const std::string& why) -> void { throw std::invalid_argument("estimator file: " + why); };
    std::string word;
    int version = 0;
    if (!(is >> word >> version) || word != "advtrade-sign-forest" || version != 1) fail("bad header");
    std::size_t count = 0;
    if (!(is >> word >> count) || word != "trees") fail("missing tree count");
    std::vector<Tree> trees(count);
    for (auto& tree : trees) {
        std::size_t nodes = 0, leaves = 0;
        if (!(is >> word >> nodes >> leaves) || word != "tree") fail("bad tree header");
        tree.nodes.resize(nodes);
        tree.leaves.resize(leaves);
        for (std::size_t index = 0; index < nodes; ++index) {
            auto& node = tree.nodes[index];
            if (!(is >> word)) fail("truncated tree");
            if (word == "leaf") {
                if (!(is >> node.leaf) || node.leaf < 0 || static_cast<std::size_t>(node.leaf) >= leaves) fail("bad leaf");
            } else if (word == "split") {
                std::string threshold;
                if (!(is >> node.feature >> threshold >> node.left >> node.right)) fail("bad split");
                node.threshold = parse_double(threshold);
                if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= kFeatureCount) fail("bad feature");
                // Children always follow their parent, which also rules out cycles.
                auto child_ok = [&](int c) {
                    return c > static_cast<int>(index) && static_cast<std::size_t>(c) < nodes;
                };
                if (!child_ok(node.left) || !child_ok(node.right)) fail("bad child index");
            } else {
                fail("unknown record '" + word + "'");
            }
        }
        for (auto& leaf : tree.leaves) {
            std::string signs;
            if (!(is >> word >> signs) || word != "signs" || signs.size() != kFeatureCount) fail("bad sign record");
            for (std::size_t j = 0; j < kFeatureCount; ++j) {
                if (signs[j] != '+' && signs[j] != '-') fail("bad sign character");
                leaf[j] = signs[j] == '+' ? 1 : -1;
            }
        }
        if (tree.nodes.empty()) fail("empty tree");
    }
    return SignEstimator(std::move(trees));
}

} // namespace advtrade::adversarial
