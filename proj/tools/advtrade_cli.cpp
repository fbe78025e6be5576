// advtrade: command-line driver for the simulator, surrogate and experiments.
//
// Exit codes: 0 success, 1 config or usage error, 2 missing or unreadable
// artifact, 3 any other failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "advtrade/adversarial.hpp"
#include "advtrade/config.hpp"
#include "advtrade/csv.hpp"
#include "advtrade/errors.hpp"
#include "advtrade/experiment.hpp"
#include "advtrade/sim.hpp"
#include "advtrade/surrogate.hpp"

namespace fs = std::filesystem;
using namespace advtrade;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::string artifacts; // defaults to out
    std::string scale;
    std::string setup;
};

config::Settings load_settings(const Options& o) {
    config::Settings s = o.config.empty() ? config::Settings{} : config::load(o.config);
    if (o.seed) s.experiment.seed = *o.seed;
    if (!o.scale.empty()) {
        const auto scale = experiment::parse_scale(o.scale);
        if (!scale) throw ConfigError("--scale must be desk or paper");
        s.experiment.apply_scale(*scale);
    }
    return s;
}

fs::path out_dir(const Options& o) {
    fs::path p(o.out);
    fs::create_directories(p);
    return p;
}

fs::path artifact_dir(const Options& o) { return o.artifacts.empty() ? fs::path(o.out) : fs::path(o.artifacts); }

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

std::ifstream open_artifact(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw MissingArtifact("missing artifact " + p.string());
    return is;
}

template <typename F>
auto read_artifact(const fs::path& p, F read) {
    auto is = open_artifact(p);
    try {
        return read(is);
    } catch (const std::exception& e) {
        throw MissingArtifact("unreadable artifact " + p.string() + ": " + e.what());
    }
}

surrogate::Dataset load_dataset(const Options& o) {
    return read_artifact(artifact_dir(o) / "dataset.csv", [](std::istream& is) { return surrogate::read_dataset_csv(is); });
}

std::shared_ptr<const surrogate::LogisticSurrogate> load_model(const Options& o) {
    return std::make_shared<const surrogate::LogisticSurrogate>(
        read_artifact(artifact_dir(o) / "model.json", [](std::istream& is) { return surrogate::load_model(is); }));
}

std::shared_ptr<const adversarial::SignEstimator> load_estimator(const Options& o) {
    return std::make_shared<const adversarial::SignEstimator>(read_artifact(
        artifact_dir(o) / "estimator.txt", [](std::istream& is) { return adversarial::SignEstimator::load(is); }));
}

experiment::Setup parse_setup_or_throw(const std::string& text) {
    const auto s = experiment::parse_setup(text);
    if (!s) throw ConfigError("--setup must be baseline, noisy or adversary");
    return *s;
}

sim::Artifacts artifacts_for(const Options& o, const config::Settings& s, experiment::Setup setup) {
    sim::Artifacts a;
    if (setup != experiment::Setup::WithAdversary) return a;
    a.model = load_model(o);
    if (s.experiment.sim.adversary_source == sim::AdversarySource::Estimator) a.estimator = load_estimator(o);
    return a;
}

int cmd_simulate(const Options& o) {
    const auto s = load_settings(o);
    const auto setup = parse_setup_or_throw(o.setup.empty() ? "baseline" : o.setup);
    const auto cfg = experiment::setup_config(s.experiment.sim, setup);
    const auto artifacts = artifacts_for(o, s, setup);
    const auto result = sim::run_simulation(cfg, s.experiment.seed, artifacts);
    const auto dir = out_dir(o);
    auto rounds = open_out(dir / "rounds.csv");
    sim::write_round_log(rounds, result);
    auto book = open_out(dir / "book.jsonl");
    sim::write_book_log(book, result);
    auto traj = open_out(dir / "trajectory.csv");
    experiment::write_trajectory_csv(traj, result);
    std::cout << "rounds " << result.records.size() << " mm_pnl " << format_double(result.mm_pnl().value_or(0.0))
              << '\n';
    return 0;
}

int cmd_build_dataset(const Options& o) {
    const auto s = load_settings(o);
    const auto data =
        experiment::build_baseline_dataset(s.experiment.sim, s.dataset_sims, s.experiment.seed, s.experiment.threads);
    auto os = open_out(out_dir(o) / "dataset.csv");
    surrogate::write_dataset_csv(os, data);
    std::cout << "rows " << data.size() << " from " << s.dataset_sims << " simulations\n";
    return 0;
}

int cmd_train_surrogate(const Options& o) {
    const auto s = load_settings(o);
    const auto data = load_dataset(o);
    const auto [train, test] = surrogate::split_by_group(data, s.test_fraction, s.experiment.seed);
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = surrogate::train(train, s.train);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto m = surrogate::evaluate(model, test);
    const auto dir = out_dir(o);
    auto mf = open_out(dir / "model.json");
    surrogate::save_model(mf, model);
    auto os = open_out(dir / "surrogate_metrics.csv");
    os << "key,value\n"
       << "train_rows," << train.size() << '\n'
       << "test_rows," << test.size() << '\n'
       << "iterations," << model.report.iterations << '\n'
       << "converged," << (model.report.converged ? "true" : "false") << '\n'
       << "precision," << format_double(m.precision) << '\n'
       << "accuracy," << format_double(m.accuracy) << '\n';
    std::cout << "precision " << format_double(m.precision) << " accuracy " << format_double(m.accuracy) << " ("
              << test.size() << " held-out rows, fit " << secs << " s)\n";
    return 0;
}

int cmd_train_estimator(const Options& o) {
    const auto s = load_settings(o);
    const auto data = load_dataset(o);
    const auto model = load_model(o);
    const auto [train, test] = surrogate::split_by_group(data, s.test_fraction, s.experiment.seed);
    const auto est = adversarial::train_estimator(*model, train.features, s.forest);
    const auto agreement = adversarial::estimator_agreement(est, *model, test.features);
    const auto dir = out_dir(o);
    auto ef = open_out(dir / "estimator.txt");
    est.save(ef);
    auto os = open_out(dir / "estimator_metrics.csv");
    os << "coordinate,agreement,non_constant\n";
    for (std::size_t i = 0; i < agreement.per_coordinate.size(); ++i) {
        os << i << ',' << format_double(agreement.per_coordinate[i]) << ','
           << (agreement.non_constant[i] ? "true" : "false") << '\n';
    }
    std::cout << "mean agreement over non-constant coordinates " << format_double(agreement.mean_non_constant)
              << '\n';
    return 0;
}

int cmd_attack_curve(const Options& o) {
    const auto s = load_settings(o);
    const auto data = load_dataset(o);
    const auto model = load_model(o);
    const auto test = surrogate::split_by_group(data, s.test_fraction, s.experiment.seed).second;
    const auto grid = adversarial::log_grid(s.epsilon.min, s.epsilon.max, s.epsilon.points);
    const auto curve = adversarial::attack_curve(*model, test, grid, s.experiment.seed);
    auto os = open_out(out_dir(o) / "attack_curve.csv");
    adversarial::write_attack_curve_csv(os, curve);
    std::cout << "samples " << curve.samples << '\n';
    return 0;
}

int cmd_experiment(const Options& o) {
    const auto s = load_settings(o);
    std::vector<experiment::Setup> setups{experiment::Setup::Baseline, experiment::Setup::WithNoisy,
                                          experiment::Setup::WithAdversary};
    if (!o.setup.empty()) setups = {parse_setup_or_throw(o.setup)};
    // Load everything up front so a missing model fails before any simulation runs.
    std::vector<sim::Artifacts> artifacts;
    for (auto setup : setups) artifacts.push_back(artifacts_for(o, s, setup));

    const auto dir = out_dir(o);
    std::vector<experiment::SetupResult> results;
    for (std::size_t i = 0; i < setups.size(); ++i) {
        results.push_back(experiment::run_experiment(s.experiment, setups[i], artifacts[i]));
        const auto& r = results.back();
        auto os = open_out(dir / ("pnl_" + std::string(experiment::to_string(setups[i])) + ".csv"));
        experiment::write_outcomes_csv(os, r);
        const auto st = experiment::describe(r.mm_pnls());
        std::cout << experiment::to_string(setups[i]) << ": mm median " << format_double(st.median) << " mean "
                  << format_double(st.mean) << '\n';
    }
    if (results.size() == 3) {
        const auto c = experiment::compare_setups(results[0], results[1], results[2]);
        auto os = open_out(dir / "pnl_report.csv");
        experiment::write_comparison_csv(os, c);
        std::cout << "median baseline > noisy: " << (c.baseline_above_noisy ? "yes" : "no")
                  << ", noisy >= adversary: " << (c.noisy_at_least_adversary ? "yes" : "no") << '\n';
    }
    return 0;
}

int cmd_calibrate(const Options& o) {
    const auto s = load_settings(o);
    const int sims = s.experiment.batches * s.experiment.sims_per_batch;
    const auto cal = experiment::calibrate_book(s.experiment.sim, sims, s.experiment.seed, s.experiment.threads);
    const auto dir = out_dir(o);
    auto os = open_out(dir / "book_calibration.csv");
    experiment::write_book_calibration_csv(os, cal);
    const auto first = sim::run_simulation(experiment::setup_config(s.experiment.sim, experiment::Setup::Baseline),
                                           experiment::simulation_seed(s.experiment.seed, 0, 0));
    auto traj = open_out(dir / "trajectory.csv");
    experiment::write_trajectory_csv(traj, first);
    std::cout << "average depth " << format_double(cal.average_depth()) << " top quantity "
              << format_double(cal.quantity_at(1)) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Order-book simulator with adversarial trading agents"};
    app.require_subcommand(1);
    Options o;
    std::vector<std::pair<CLI::App*, int (*)(const Options&)>> commands;

    auto add = [&](const char* name, const char* help, int (*fn)(const Options&), bool setup, bool scale) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "flat key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "master seed (overrides the config)");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--artifacts", o.artifacts, "directory with dataset.csv, model.json, estimator.txt");
        if (scale) sub->add_option("--scale", o.scale, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
        if (setup)
            sub->add_option("--setup", o.setup, "baseline, noisy or adversary")
                ->check(CLI::IsMember({"baseline", "noisy", "adversary"}));
        commands.emplace_back(sub, fn);
    };
    add("simulate", "run one simulation and write its logs", cmd_simulate, true, false);
    add("build-dataset", "simulate baseline markets and write labelled snapshots", cmd_build_dataset, false, false);
    add("train-surrogate", "fit the logistic surrogate on dataset.csv", cmd_train_surrogate, false, false);
    add("train-estimator", "fit the sign-vector forest against model.json", cmd_train_estimator, false, false);
    add("attack-curve", "accuracy under FGSM and sign noise over the epsilon grid", cmd_attack_curve, false, false);
    add("experiment", "run the setups with paired seeds and write the P&L report", cmd_experiment, true, true);
    add("calibrate", "average book depth and quantity per depth", cmd_calibrate, false, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    try {
        for (const auto& [sub, fn] : commands)
            if (sub->parsed()) return fn(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const MissingArtifact& e) {
        std::cerr << "missing artifact: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
