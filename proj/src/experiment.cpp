#include "advtrade/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "advtrade/csv.hpp"
#include "advtrade/errors.hpp"
#include "advtrade/rng.hpp"

namespace advtrade::experiment {

std::string_view to_string(Setup setup) {
    switch (setup) {
    case Setup::Baseline: return "baseline";
    case Setup::WithNoisy: return "noisy";
    case Setup::WithAdversary: return "adversary";
    }
    return "?";
}

std::optional<Setup> parse_setup(std::string_view text) {
    if (text == "baseline") return Setup::Baseline;
    if (text == "noisy") return Setup::WithNoisy;
    if (text == "adversary") return Setup::WithAdversary;
    return std::nullopt;
}

std::optional<Scale> parse_scale(std::string_view text) {
    if (text == "desk") return Scale::Desk;
    if (text == "paper") return Scale::Paper;
    return std::nullopt;
}

void ExperimentConfig::apply_scale(Scale scale) {
    if (scale == Scale::Desk) {
        batches = 2;
        sims_per_batch = 100;
    } else {
        batches = 10;
        sims_per_batch = 500;
    }
}

void validate(const ExperimentConfig& config) {
    if (config.batches < 1) throw ConfigError("batches must be >= 1");
    if (config.sims_per_batch < 1) throw ConfigError("sims_per_batch must be >= 1");
}

sim::SimConfig setup_config(const sim::SimConfig& base, Setup setup) {
    sim::SimConfig c = base;
    switch (setup) {
    case Setup::Baseline: c.extra = sim::ExtraAgent::None; break;
    case Setup::WithNoisy: c.extra = sim::ExtraAgent::Noisy; break;
    case Setup::WithAdversary: c.extra = sim::ExtraAgent::Adversarial; break;
    }
    return c;
}

std::uint64_t simulation_seed(std::uint64_t seed, int batch, int sim) {
    return derive_seed(derive_seed(seed, static_cast<std::uint64_t>(batch) + 1),
                       static_cast<std::uint64_t>(sim) + 1);
}

double quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

PnLStats describe(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("no values to describe");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    PnLStats s;
    s.count = sorted.size();
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    s.median = quantile(sorted, 0.5);
    s.q1 = quantile(sorted, 0.25);
    s.q3 = quantile(sorted, 0.75);
    return s;
}

namespace {

unsigned worker_count(unsigned requested, std::size_t jobs) {
    const unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(t, jobs)));
}

/// Runs job(i) for i in [0, n) on a pool. Jobs write to their own slots; the
/// first failing index is rethrown after all workers finish.
template <typename Job>
void parallel_for(std::size_t n, unsigned threads, Job job) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < worker_count(threads, n); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

template <typename F>
std::vector<double> collect(const std::vector<SimOutcome>& outcomes, int batch, F f) {
    std::vector<double> out;
    for (const auto& o : outcomes) {
        if (batch >= 0 && o.batch != batch) continue;
        if (auto v = f(o)) out.push_back(*v);
    }
    return out;
}

} // namespace

std::vector<double> SetupResult::mm_pnls(int batch) const {
    return collect(outcomes, batch, [](const SimOutcome& o) { return std::optional(o.mm_pnl); });
}

std::vector<double> SetupResult::extra_pnls(int batch) const {
    return collect(outcomes, batch, [](const SimOutcome& o) { return o.extra_pnl; });
}

std::vector<double> SetupResult::investor_means(int batch) const {
    return collect(outcomes, batch, [](const SimOutcome& o) { return std::optional(o.investor_mean_pnl); });
}

SetupResult run_experiment(const ExperimentConfig& config, Setup setup, const sim::Artifacts& artifacts) {
    validate(config);
    const sim::SimConfig sim_config = setup_config(config.sim, setup);
    sim::validate(sim_config, artifacts);

    SetupResult result;
    result.setup = setup;
    result.batches = config.batches;
    result.sims_per_batch = config.sims_per_batch;
    result.rounds = sim_config.rounds;
    result.seed = config.seed;

    const std::size_t total = static_cast<std::size_t>(config.batches) * static_cast<std::size_t>(config.sims_per_batch);
    result.outcomes.resize(total);
    parallel_for(total, config.threads, [&](std::size_t i) {
        SimOutcome& o = result.outcomes[i];
        o.batch = static_cast<int>(i / static_cast<std::size_t>(config.sims_per_batch));
        o.sim = static_cast<int>(i % static_cast<std::size_t>(config.sims_per_batch));
        o.seed = simulation_seed(config.seed, o.batch, o.sim);
        const auto r = sim::run_simulation(sim_config, o.seed, artifacts);
        o.mm_pnl = r.mm_pnl().value_or(0.0);
        o.extra_pnl = r.extra_pnl();
        o.investor_mean_pnl = r.investor_mean_pnl().value_or(0.0);
    });
    return result;
}

surrogate::Dataset build_baseline_dataset(const sim::SimConfig& base, int sims, std::uint64_t seed,
                                          unsigned threads) {
    if (sims < 1) throw ConfigError("dataset needs at least one simulation");
    const sim::SimConfig c = setup_config(base, Setup::Baseline);
    sim::validate(c, {});
    const std::uint64_t stream = derive_seed(seed, 0x64617461ULL);
    std::vector<surrogate::Dataset> parts(static_cast<std::size_t>(sims));
    parallel_for(parts.size(), threads, [&](std::size_t i) {
        const auto r = sim::run_simulation(c, simulation_seed(stream, 0, static_cast<int>(i)));
        parts[i] = sim::build_dataset(r, static_cast<std::int32_t>(i), c.warmup());
    });
    surrogate::Dataset out;
    for (const auto& p : parts) out.append(p);
    return out;
}

void write_outcomes_csv(std::ostream& os, const SetupResult& result) {
    os << "setup,batch,sim,seed,mm_pnl,extra_pnl,investor_mean_pnl\n";
    for (const auto& o : result.outcomes) {
        os << to_string(result.setup) << ',' << o.batch << ',' << o.sim << ',' << o.seed << ','
           << format_double(o.mm_pnl) << ',' << (o.extra_pnl ? format_double(*o.extra_pnl) : std::string()) << ','
           << format_double(o.investor_mean_pnl) << '\n';
    }
}

namespace {

double percent_of(double value, double base) {
    if (base == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return 100.0 * value / base;
}

Ratios ratios(const PnLStats& s, const PnLStats& base) {
    return {percent_of(s.mean, base.mean), percent_of(s.median, base.median), percent_of(s.q1, base.q1),
            percent_of(s.q3, base.q3)};
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_setup(const SetupResult& r, Setup expected) {
    if (r.setup != expected)
        throw std::invalid_argument("expected " + std::string(to_string(expected)) + " result, got " +
                                    std::string(to_string(r.setup)));
}

} // namespace

Comparison compare_setups(const SetupResult& baseline, const SetupResult& noisy, const SetupResult& adversary) {
    check_setup(baseline, Setup::Baseline);
    check_setup(noisy, Setup::WithNoisy);
    check_setup(adversary, Setup::WithAdversary);
    for (const SetupResult* r : {&noisy, &adversary}) {
        if (r->batches != baseline.batches || r->sims_per_batch != baseline.sims_per_batch ||
            r->rounds != baseline.rounds || r->seed != baseline.seed)
            throw std::invalid_argument("setups were run at different scales or seeds");
    }

    Comparison c;
    c.baseline = describe(baseline.mm_pnls());
    c.noisy = describe(noisy.mm_pnls());
    c.adversary = describe(adversary.mm_pnls());
    c.noisy_vs_baseline = ratios(c.noisy, c.baseline);
    c.adversary_vs_baseline = ratios(c.adversary, c.baseline);
    c.baseline_above_noisy = c.baseline.median > c.noisy.median;
    c.noisy_at_least_adversary = c.noisy.median >= c.adversary.median;
    c.noisy_agent_mean = mean_of(noisy.extra_pnls());
    c.adversary_agent_mean = mean_of(adversary.extra_pnls());
    c.investor_mean_baseline = mean_of(baseline.investor_means());
    c.investor_mean_noisy = mean_of(noisy.investor_means());
    c.investor_mean_adversary = mean_of(adversary.investor_means());
    return c;
}

void write_comparison_csv(std::ostream& os, const Comparison& c) {
    auto row = [&](std::string_view name, double a, double b, double q1, double q3) {
        os << name << ',' << format_double(a) << ',' << format_double(b) << ',' << format_double(q1) << ','
           << format_double(q3) << '\n';
    };
    os << "row,mean,median,q1,q3\n";
    row("baseline", c.baseline.mean, c.baseline.median, c.baseline.q1, c.baseline.q3);
    row("noisy", c.noisy.mean, c.noisy.median, c.noisy.q1, c.noisy.q3);
    row("adversary", c.adversary.mean, c.adversary.median, c.adversary.q1, c.adversary.q3);
    row("noisy_pct_of_baseline", c.noisy_vs_baseline.mean, c.noisy_vs_baseline.median, c.noisy_vs_baseline.q1,
        c.noisy_vs_baseline.q3);
    row("adversary_pct_of_baseline", c.adversary_vs_baseline.mean, c.adversary_vs_baseline.median,
        c.adversary_vs_baseline.q1, c.adversary_vs_baseline.q3);
    os << '\n' << "key,value\n";
    os << "median_baseline_gt_noisy," << (c.baseline_above_noisy ? "true" : "false") << '\n';
    os << "median_noisy_ge_adversary," << (c.noisy_at_least_adversary ? "true" : "false") << '\n';
    os << "noisy_agent_mean_pnl," << format_double(c.noisy_agent_mean) << '\n';
    os << "adversary_agent_mean_pnl," << format_double(c.adversary_agent_mean) << '\n';
    os << "investor_mean_pnl_baseline," << format_double(c.investor_mean_baseline) << '\n';
    os << "investor_mean_pnl_noisy," << format_double(c.investor_mean_noisy) << '\n';
    os << "investor_mean_pnl_adversary," << format_double(c.investor_mean_adversary) << '\n';
}

double BookCalibration::quantity_at(int depth) const {
    if (depth < 1 || depth > static_cast<int>(kBookDepth)) throw std::out_of_range("depth out of range");
    const auto i = static_cast<std::size_t>(depth - 1);
    return 0.5 * (bid_quantity[i] + offer_quantity[i]);
}

double BookCalibration::bucket(std::size_t index) const {
    const auto [lo, hi] = kDepthBuckets.at(index);
    double sum = 0.0;
    for (int d = lo; d <= hi; ++d) sum += quantity_at(d);
    return sum / static_cast<double>(hi - lo + 1);
}

bool BookCalibration::buckets_weakly_decreasing() const {
    for (std::size_t i = 1; i < kDepthBuckets.size(); ++i)
        if (bucket(i) > bucket(i - 1)) return false;
    return true;
}

void BookCalibrationBuilder::add(const lob::DepthSnapshot& snapshot) {
    ++snapshots_;
    depth_bid_ += static_cast<double>(std::min(snapshot.bids.size(), kBookDepth));
    depth_offer_ += static_cast<double>(std::min(snapshot.offers.size(), kBookDepth));
    for (std::size_t i = 0; i < kBookDepth && i < snapshot.bids.size(); ++i)
        bid_[i] += static_cast<double>(snapshot.bids[i].quantity);
    for (std::size_t i = 0; i < kBookDepth && i < snapshot.offers.size(); ++i)
        offer_[i] += static_cast<double>(snapshot.offers[i].quantity);
}

void BookCalibrationBuilder::add(const sim::SimulationResult& result, int skip_rounds) {
    for (const auto& r : result.records)
        if (r.round >= skip_rounds) add(r.snapshot);
}

void BookCalibrationBuilder::merge(const BookCalibrationBuilder& other) {
    snapshots_ += other.snapshots_;
    depth_bid_ += other.depth_bid_;
    depth_offer_ += other.depth_offer_;
    for (std::size_t i = 0; i < kBookDepth; ++i) {
        bid_[i] += other.bid_[i];
        offer_[i] += other.offer_[i];
    }
}

BookCalibration BookCalibrationBuilder::finish() const {
    BookCalibration c;
    c.snapshots = snapshots_;
    if (snapshots_ == 0) return c;
    const double n = static_cast<double>(snapshots_);
    c.depth_bid = depth_bid_ / n;
    c.depth_offer = depth_offer_ / n;
    for (std::size_t i = 0; i < kBookDepth; ++i) {
        c.bid_quantity[i] = bid_[i] / n;
        c.offer_quantity[i] = offer_[i] / n;
    }
    return c;
}

BookCalibration calibrate_book(const sim::SimConfig& base, int sims, std::uint64_t seed, unsigned threads) {
    if (sims < 1) throw ConfigError("calibration needs at least one simulation");
    const sim::SimConfig c = setup_config(base, Setup::Baseline);
    sim::validate(c, {});
    std::vector<BookCalibrationBuilder> parts(static_cast<std::size_t>(sims));
    parallel_for(parts.size(), threads, [&](std::size_t i) {
        const auto r = sim::run_simulation(c, simulation_seed(seed, 0, static_cast<int>(i)));
        parts[i].add(r, c.warmup());
    });
    BookCalibrationBuilder total;
    for (const auto& p : parts) total.merge(p);
    return total.finish();
}

void write_book_calibration_csv(std::ostream& os, const BookCalibration& c) {
    os << "depth,bid_quantity,offer_quantity,mean_quantity\n";
    for (std::size_t i = 0; i < kBookDepth; ++i) {
        os << i + 1 << ',' << format_double(c.bid_quantity[i]) << ',' << format_double(c.offer_quantity[i]) << ','
           << format_double(c.quantity_at(static_cast<int>(i + 1))) << '\n';
    }
    os << '\n' << "bucket,mean_quantity\n";
    for (std::size_t b = 0; b < kDepthBuckets.size(); ++b) {
        const auto [lo, hi] = kDepthBuckets[b];
        os << lo;
        if (hi != lo) os << '-' << hi;
        os << ',' << format_double(c.bucket(b)) << '\n';
    }
    os << '\n' << "key,value\n";
    os << "snapshots," << c.snapshots << '\n';
    os << "average_depth_bid," << format_double(c.depth_bid) << '\n';
    os << "average_depth_offer," << format_double(c.depth_offer) << '\n';
    os << "average_depth," << format_double(c.average_depth()) << '\n';
    os << "buckets_weakly_decreasing," << (c.buckets_weakly_decreasing() ? "true" : "false") << '\n';
}

void write_trajectory_csv(std::ostream& os, const sim::SimulationResult& result) {
    os << "round,best_bid,best_offer\n";
    for (const auto& r : result.records) {
        if (!r.snapshot.two_sided()) continue;
        os << r.round << ',' << r.snapshot.best_bid()->str() << ',' << r.snapshot.best_offer()->str() << '\n';
    }
}

} // namespace advtrade::experiment
