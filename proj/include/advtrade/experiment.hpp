#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "advtrade/lob.hpp"
#include "advtrade/sim.hpp"

namespace advtrade::experiment {

enum class Setup { Baseline, WithNoisy, WithAdversary };
enum class Scale { Desk, Paper };

std::string_view to_string(Setup setup);
/// "baseline", "noisy", "adversary".
std::optional<Setup> parse_setup(std::string_view text);
/// "desk", "paper".
std::optional<Scale> parse_scale(std::string_view text);

struct ExperimentConfig {
    sim::SimConfig sim{}; ///< `extra` is overridden by the setup
    int batches = 2;
    int sims_per_batch = 100;
    std::uint64_t seed = 1;
    unsigned threads = 0; ///< 0 picks std::thread::hardware_concurrency()

    /// desk: 2 x 100, paper: 10 x 500.
    void apply_scale(Scale scale);
};

/// Throws ConfigError.
void validate(const ExperimentConfig& config);

sim::SimConfig setup_config(const sim::SimConfig& base, Setup setup);

/// Shared by all setups so that runs are paired.
std::uint64_t simulation_seed(std::uint64_t seed, int batch, int sim);

struct SimOutcome {
    int batch = 0;
    int sim = 0;
    std::uint64_t seed = 0;
    double mm_pnl = 0.0;
    std::optional<double> extra_pnl;
    double investor_mean_pnl = 0.0;
};

struct PnLStats {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

/// p-quantile of sorted data, linear interpolation between order statistics
/// at position p * (n - 1).
double quantile(std::span<const double> sorted, double p);

/// Throws std::invalid_argument on empty input.
PnLStats describe(std::span<const double> values);

struct SetupResult {
    Setup setup = Setup::Baseline;
    int batches = 0;
    int sims_per_batch = 0;
    int rounds = 0;
    std::uint64_t seed = 0;
    std::vector<SimOutcome> outcomes; ///< batch-major

    std::vector<double> mm_pnls(int batch = -1) const; ///< -1 selects all batches
    std::vector<double> extra_pnls(int batch = -1) const;
    std::vector<double> investor_means(int batch = -1) const;
};

/// Runs batches x sims_per_batch simulations of one setup. Workers fill
/// preallocated slots, so the result does not depend on the thread count.
/// Throws MissingArtifact when the adversary setup lacks its models.
SetupResult run_experiment(const ExperimentConfig& config, Setup setup, const sim::Artifacts& artifacts = {});

/// Labelled rows from `sims` baseline simulations, grouped by simulation index.
/// Seeds come from a stream separate from run_experiment's.
surrogate::Dataset build_baseline_dataset(const sim::SimConfig& base, int sims, std::uint64_t seed,
                                          unsigned threads = 0);

/// setup,batch,sim,seed,mm_pnl,extra_pnl,investor_mean_pnl
void write_outcomes_csv(std::ostream& os, const SetupResult& result);

struct Ratios {
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

struct Comparison {
    PnLStats baseline;
    PnLStats noisy;
    PnLStats adversary;
    Ratios noisy_vs_baseline;     ///< percent of baseline
    Ratios adversary_vs_baseline; ///< percent of baseline
    bool baseline_above_noisy = false;      ///< median
    bool noisy_at_least_adversary = false;  ///< median
    double noisy_agent_mean = 0.0;
    double adversary_agent_mean = 0.0;
    double investor_mean_baseline = 0.0;
    double investor_mean_noisy = 0.0;
    double investor_mean_adversary = 0.0;
};

/// Throws std::invalid_argument unless the three results share seed and scale
/// and carry the expected setups.
Comparison compare_setups(const SetupResult& baseline, const SetupResult& noisy, const SetupResult& adversary);

/// Table-shaped report: row,mean,median,q1,q3 followed by the ordering checks
/// and agent means as key,value lines.
void write_comparison_csv(std::ostream& os, const Comparison& comparison);

inline constexpr std::array<std::pair<int, int>, 5> kDepthBuckets{{{1, 1}, {2, 2}, {3, 11}, {12, 16}, {17, 20}}};

struct BookCalibration {
    std::size_t snapshots = 0;
    double depth_bid = 0.0;
    double depth_offer = 0.0;
    std::array<double, kBookDepth> bid_quantity{}; ///< zero when the level is absent
    std::array<double, kBookDepth> offer_quantity{};

    double average_depth() const { return 0.5 * (depth_bid + depth_offer); }
    double quantity_at(int depth) const; ///< 1-based, both sides averaged
    double bucket(std::size_t index) const;
    bool buckets_weakly_decreasing() const;
};

class BookCalibrationBuilder {
public:
    void add(const lob::DepthSnapshot& snapshot);
    /// Adds every snapshot from round `skip_rounds` on.
    void add(const sim::SimulationResult& result, int skip_rounds);
    void merge(const BookCalibrationBuilder& other);
    BookCalibration finish() const;

private:
    std::size_t snapshots_ = 0;
    double depth_bid_ = 0.0;
    double depth_offer_ = 0.0;
    std::array<double, kBookDepth> bid_{};
    std::array<double, kBookDepth> offer_{};
};

/// Baseline book statistics over `sims` simulations seeded like run_experiment's
/// first batches. Warm-up rounds are skipped.
BookCalibration calibrate_book(const sim::SimConfig& base, int sims, std::uint64_t seed, unsigned threads = 0);

/// depth,bid_quantity,offer_quantity rows, then bucket rows and averages.
void write_book_calibration_csv(std::ostream& os, const BookCalibration& calibration);

/// round,best_bid,best_offer for rounds whose snapshot has both sides.
void write_trajectory_csv(std::ostream& os, const sim::SimulationResult& result);

} // namespace advtrade::experiment
