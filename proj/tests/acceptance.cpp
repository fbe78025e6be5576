// Acceptance run: one PASS/FAIL line per criterion on stdout, then a summary.
// Progress goes to stderr as criteria finish (in dependency order).
// Exit status is non-zero when a criterion fails that is not listed with
// --expect-fail, or when a criterion cannot be evaluated at all.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "advtrade/adversarial.hpp"
#include "advtrade/experiment.hpp"
#include "advtrade/surrogate.hpp"
#include "support/generators.hpp"
#include "support/lob_properties.hpp"
#include "support/numerical_checks.hpp"

using namespace advtrade;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Options {
    std::string cli;
    fs::path work = fs::temp_directory_path() / "advtrade_acceptance";
    unsigned threads = 0;
    std::uint64_t seed = 1;
    std::set<int> expect_fail;
};

/// State shared by the criteria that reuse the trained models.
struct Shared {
    surrogate::Dataset train_set;
    surrogate::Dataset test_set;
    std::shared_ptr<surrogate::LogisticSurrogate> model;
    std::shared_ptr<adversarial::SignEstimator> estimator;
    std::size_t rounds = 0;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr int kDatasetSims = 700;

Verdict surrogate_precision(const Options& o, Shared& s) {
    const auto t0 = std::chrono::steady_clock::now();
    const sim::SimConfig base{};
    const auto data = experiment::build_baseline_dataset(base, kDatasetSims, o.seed, o.threads);
    s.rounds = static_cast<std::size_t>(kDatasetSims) * static_cast<std::size_t>(base.rounds);
    auto [train, test] = surrogate::split_by_group(data, 0.2, o.seed);
    s.model = std::make_shared<surrogate::LogisticSurrogate>(surrogate::train(train));
    const auto m = surrogate::evaluate(*s.model, test);
    const double elapsed = seconds_since(t0);
    s.train_set = std::move(train);
    s.test_set = std::move(test);
    const bool ok = s.rounds >= 50000 && data.size() >= 50000 && m.precision >= 0.60 && m.precision <= 0.80 &&
                    elapsed <= 300.0;
    return {ok, fmt("rounds=%zu rows=%zu test_rows=%zu precision=%.4f time=%.1fs", s.rounds, data.size(),
                    s.test_set.size(), m.precision, elapsed)};
}

Verdict attack_curve(const Options& o, const Shared& s) {
    const auto grid = adversarial::log_grid(0.01, 2.0, 20);
    const auto curve = adversarial::attack_curve(*s.model, s.test_set, grid, o.seed);
    int above_noise = 0, rises = 0;
    for (std::size_t k = 0; k < curve.points.size(); ++k) {
        const auto& p = curve.points[k];
        above_noise += p.accuracy_adversarial > p.accuracy_noise + 0.02;
        if (k > 0) rises += p.accuracy_adversarial > curve.points[k - 1].accuracy_adversarial + 0.02;
    }
    const auto& first = curve.points.front();
    const auto& last = curve.points.back();
    const bool ok = curve.samples >= 2000 && curve.points.size() == 20 && above_noise == 0 && rises == 0;
    return {ok, fmt("samples=%zu points=%zu adv(%.2f)=%.4f noise=%.4f adv(%.2f)=%.4f noise=%.4f above_noise=%d "
                    "rises=%d",
                    curve.samples, curve.points.size(), first.epsilon, first.accuracy_adversarial,
                    first.accuracy_noise, last.epsilon, last.accuracy_adversarial, last.accuracy_noise, above_noise,
                    rises)};
}

constexpr int kSeedGroups = 10;

struct GroupResult {
    experiment::Comparison comparison;
    std::vector<double> adversary_batch_means;
};

std::vector<GroupResult> run_seed_groups(const Options& o, const Shared& s) {
    sim::Artifacts artifacts;
    artifacts.model = s.model;
    artifacts.estimator = s.estimator;
    std::vector<GroupResult> out;
    for (int g = 0; g < kSeedGroups; ++g) {
        experiment::ExperimentConfig c;
        c.apply_scale(experiment::Scale::Desk);
        c.seed = o.seed * 1000 + static_cast<std::uint64_t>(g) + 1;
        c.threads = o.threads;
        const auto b = experiment::run_experiment(c, experiment::Setup::Baseline, artifacts);
        const auto n = experiment::run_experiment(c, experiment::Setup::WithNoisy, artifacts);
        const auto a = experiment::run_experiment(c, experiment::Setup::WithAdversary, artifacts);
        GroupResult r;
        r.comparison = experiment::compare_setups(b, n, a);
        for (int batch = 0; batch < c.batches; ++batch)
            r.adversary_batch_means.push_back(experiment::describe(a.extra_pnls(batch)).mean);
        out.push_back(std::move(r));
    }
    return out;
}

Verdict pnl_ordering(const std::vector<GroupResult>& groups) {
    int ordered = 0;
    std::string medians;
    for (const auto& g : groups) {
        const auto& c = g.comparison;
        ordered += c.baseline_above_noisy && c.noisy_at_least_adversary;
        medians += fmt(" %.0f/%.0f/%.0f", c.baseline.median, c.noisy.median, c.adversary.median);
    }
    return {ordered >= 8, fmt("ordered=%d/%d medians(b/n/a):", ordered, kSeedGroups) + medians};
}

Verdict adversary_unprofitable(const std::vector<GroupResult>& groups) {
    int negative = 0, batches = 0, investors_better = 0;
    double worst = -1e300;
    for (const auto& g : groups) {
        for (double m : g.adversary_batch_means) {
            ++batches;
            negative += m < 0.0;
            worst = std::max(worst, m);
        }
        investors_better += g.comparison.investor_mean_adversary > g.comparison.investor_mean_baseline;
    }
    const bool ok = negative == batches && investors_better >= 8;
    return {ok, fmt("negative_batches=%d/%d max_batch_mean=%.2f investors_better=%d/%d", negative, batches, worst,
                    investors_better, kSeedGroups)};
}

Verdict book_calibration(const Options& o) {
    const auto cal = experiment::calibrate_book({}, 200, o.seed, o.threads);
    const double depth = cal.average_depth(), top = cal.quantity_at(1);
    const bool ok = depth >= 12 && depth <= 22 && top >= 10 && top <= 30 && cal.buckets_weakly_decreasing();
    std::string buckets;
    for (std::size_t i = 0; i < experiment::kDepthBuckets.size(); ++i) buckets += fmt(" %.2f", cal.bucket(i));
    return {ok, fmt("depth=%.2f top=%.2f buckets:", depth, top) + buckets};
}

Verdict engine_properties(const Options& o) {
    Rng rng(derive_seed(o.seed, 6));
    check::PropertyFailures f;
    constexpr int kSequences = 10000;
    for (int i = 0; i < kSequences; ++i) check::check_book_properties(check::random_ops(rng, 50), f);
    return {f.total() == 0, fmt("sequences=%d no_cross=%d conservation=%d fifo=%d aggressor=%d oracle=%d%s%s",
                                kSequences, f.no_cross, f.conservation, f.fifo, f.aggressor_price, f.oracle,
                                f.first.empty() ? "" : " first=", f.first.c_str())};
}

Verdict numerical_checks(const Options& o) {
    Rng rng(derive_seed(o.seed, 7));
    const auto c = check::run_gradient_checks(rng, 100);
    const bool ok = c.max_training_error < 1e-5 && c.max_input_error < 1e-5 && c.sign_mismatches == 0;
    return {ok, fmt("points=100 training_err=%.2e input_err=%.2e signs_checked=%ld mismatches=%ld",
                    c.max_training_error, c.max_input_error, c.sign_checked, c.sign_mismatches)};
}

Verdict estimator_fidelity(Shared& s) {
    const auto t0 = std::chrono::steady_clock::now();
    s.estimator = std::make_shared<adversarial::SignEstimator>(
        adversarial::train_estimator(*s.model, s.train_set.features, adversarial::ForestParams{}));
    const auto a = adversarial::estimator_agreement(*s.estimator, *s.model, s.test_set.features);
    const auto non_constant = std::count(a.non_constant.begin(), a.non_constant.end(), true);
    return {a.mean_non_constant >= 0.90, fmt("agreement=%.4f non_constant=%ld test_rows=%zu fit_time=%.1fs",
                                             a.mean_non_constant, static_cast<long>(non_constant),
                                             s.test_set.size(), seconds_since(t0))};
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[e.path().filename().string()] = {std::istreambuf_iterator<char>(in), {}};
    }
    return files;
}

std::string shell_quote(const fs::path& p) { return "'" + p.string() + "'"; }

/// Runs `experiment` through the CLI when its path is known, else through the library.
std::map<std::string, std::string> experiment_outputs(const Options& o, const Shared& s, const fs::path& out) {
    fs::remove_all(out);
    fs::create_directories(out);
    if (!o.cli.empty()) {
        const auto artifacts = o.work / "artifacts";
        const std::string cmd = shell_quote(o.cli) + " experiment --seed " + std::to_string(o.seed) + " --artifacts " +
                                shell_quote(artifacts) + " --out " + shell_quote(out) + " > /dev/null";
        if (std::system(cmd.c_str()) != 0) throw std::runtime_error("command failed: " + cmd);
        return read_dir(out);
    }
    sim::Artifacts artifacts;
    artifacts.model = s.model;
    artifacts.estimator = s.estimator;
    experiment::ExperimentConfig c;
    c.seed = o.seed;
    c.threads = o.threads;
    std::map<std::string, std::string> files;
    for (auto setup : {experiment::Setup::Baseline, experiment::Setup::WithNoisy, experiment::Setup::WithAdversary}) {
        std::ostringstream os;
        experiment::write_outcomes_csv(os, experiment::run_experiment(c, setup, artifacts));
        files["pnl_" + std::string(experiment::to_string(setup)) + ".csv"] = os.str();
    }
    return files;
}

Verdict determinism(const Options& o, const Shared& s) {
    const auto artifacts = o.work / "artifacts";
    fs::create_directories(artifacts);
    {
        std::ofstream m(artifacts / "model.json");
        surrogate::save_model(m, *s.model);
        std::ofstream e(artifacts / "estimator.txt");
        s.estimator->save(e);
    }
    const auto first = experiment_outputs(o, s, o.work / "run1");
    const auto second = experiment_outputs(o, s, o.work / "run2");
    std::size_t bytes = 0;
    for (const auto& [name, text] : first) bytes += text.size();
    const bool ok = !first.empty() && first == second;
    return {ok, fmt("via=%s files=%zu bytes=%zu identical=%s", o.cli.empty() ? "library" : "cli", first.size(), bytes,
                    first == second ? "yes" : "no")};
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    std::vector<int> expect_fail;
    CLI::App app{"acceptance criteria"};
    app.add_option("--cli", o.cli, "path to the advtrade binary; criterion 9 uses it when given");
    app.add_option("--work", o.work, "scratch directory");
    app.add_option("--threads", o.threads, "worker threads, 0 = hardware concurrency");
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--expect-fail", expect_fail, "criteria known to fail; reported but not fatal");
    CLI11_PARSE(app, argc, argv);
    o.expect_fail.insert(expect_fail.begin(), expect_fail.end());
    fs::create_directories(o.work);

    Shared shared;
    std::vector<GroupResult> groups;
    int unexpected = 0, failed = 0, errors = 0;
    std::map<int, std::string> lines;

    auto run = [&](int id, const char* name, const std::function<Verdict()>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = body();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
            ++errors;
        }
        const bool known = o.expect_fail.count(id) > 0;
        if (!v.pass) {
            ++failed;
            if (!known) ++unexpected;
        }
        std::ostringstream line;
        line << "criterion " << id << " " << (v.pass ? "PASS" : "FAIL") << " " << name << ": " << v.detail
             << fmt(" [%.1fs]", seconds_since(t0)) << (!v.pass && known ? " (expected)" : "");
        std::cerr << line.str() << std::endl;
        lines[id] = line.str();
    };

    // Ordered so that trained models exist before the criteria that need them.
    run(1, "surrogate precision", [&] { return surrogate_precision(o, shared); });
    run(8, "estimator fidelity", [&] { return estimator_fidelity(shared); });
    run(2, "attack curve", [&] { return attack_curve(o, shared); });
    bool have_groups = false;
    auto ensure_groups = [&] {
        if (!have_groups) groups = run_seed_groups(o, shared);
        have_groups = true;
    };
    run(3, "P&L ordering", [&] { ensure_groups(); return pnl_ordering(groups); });
    run(4, "adversary unprofitable", [&] { ensure_groups(); return adversary_unprofitable(groups); });
    run(5, "book calibration", [&] { return book_calibration(o); });
    run(6, "matching engine properties", [&] { return engine_properties(o); });
    run(7, "numerical checks", [&] { return numerical_checks(o); });
    run(9, "determinism", [&] { return determinism(o, shared); });

    for (const auto& [id, line] : lines) std::cout << line << "\n";
    std::cout << "summary: " << 9 - failed << " passed, " << failed << " failed, " << unexpected << " unexpected, "
              << errors << " errors" << std::endl;
    return unexpected == 0 && errors == 0 ? 0 : 1;
}
