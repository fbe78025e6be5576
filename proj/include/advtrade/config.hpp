#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "advtrade/adversarial.hpp"
#include "advtrade/experiment.hpp"
#include "advtrade/surrogate.hpp"

namespace advtrade::config {

struct EpsilonGrid {
    double min = 0.01;
    double max = 2.0;
    int points = 20;
};

/// Everything a config file can set. Defaults match a file with no keys.
struct Settings {
    experiment::ExperimentConfig experiment{};
    surrogate::TrainParams train{};
    adversarial::ForestParams forest{};
    EpsilonGrid epsilon{};
    int dataset_sims = 300;     ///< baseline simulations behind build-dataset
    double test_fraction = 0.2; ///< share of simulations held out
};

/// Sets one key. Throws ConfigError for unknown keys and malformed or
/// out-of-range values.
void apply(Settings& settings, std::string_view key, std::string_view value);

/// Flat `key = value` lines; `#` starts a comment, blank lines are skipped.
/// A key may appear once. Errors carry the line number.
Settings parse(std::istream& is);

/// Throws ConfigError when the file cannot be opened.
Settings load(const std::filesystem::path& path);

/// Checks cross-key constraints (size ranges, grid bounds, counts).
void validate(const Settings& settings);

std::vector<std::string> known_keys();

} // namespace advtrade::config
