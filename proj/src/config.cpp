#include "advtrade/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <string>

#include "advtrade/errors.hpp"

namespace advtrade::config {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw ConfigError(std::string(key) + ": expected " + std::string(expected) + ", got '" + std::string(value) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, std::string_view expected) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) bad_value(key, value, expected);
    return out;
}

long long as_int(std::string_view key, std::string_view value, long long lo) {
    const auto v = parse_number<long long>(key, value, "an integer");
    if (v < lo) bad_value(key, value, "an integer >= " + std::to_string(lo));
    return v;
}

double as_double(std::string_view key, std::string_view value) {
    const auto v = parse_number<double>(key, value, "a number");
    if (!std::isfinite(v)) bad_value(key, value, "a finite number");
    return v;
}

double as_positive(std::string_view key, std::string_view value) {
    const double v = as_double(key, value);
    if (!(v > 0.0)) bad_value(key, value, "a positive number");
    return v;
}

bool as_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "true or false");
}

int as_int32(std::string_view key, std::string_view value, long long lo) {
    const auto v = as_int(key, value, lo);
    if (v > 1'000'000'000LL) bad_value(key, value, "an integer <= 1e9");
    return static_cast<int>(v);
}

using Setter = std::function<void(Settings&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = [] {
        std::map<std::string, Setter, std::less<>> t;
        // agents and market
        t["investors"] = [](Settings& s, auto k, auto v) { s.experiment.sim.investors = as_int32(k, v, 0); };
        t["market_maker"] = [](Settings& s, auto k, auto v) { s.experiment.sim.market_maker = as_bool(k, v); };
        t["rounds"] = [](Settings& s, auto k, auto v) { s.experiment.sim.rounds = as_int32(k, v, 1); };
        t["warmup_rounds"] = [](Settings& s, auto k, auto v) { s.experiment.sim.warmup_rounds = as_int32(k, v, 0); };
        t["window"] = [](Settings& s, auto k, auto v) { s.experiment.sim.pricing.window = as_int32(k, v, 1); };
        t["alpha"] = [](Settings& s, auto k, auto v) { s.experiment.sim.pricing.alpha = as_positive(k, v); };
        t["initial_price"] = [](Settings& s, auto k, auto v) { s.experiment.sim.pricing.initial = as_positive(k, v); };
        t["mm_alpha"] = [](Settings& s, auto k, auto v) { s.experiment.sim.mm_alpha = as_double(k, v); };
        t["investor_size_min"] = [](Settings& s, auto k, auto v) { s.experiment.sim.investor_size.min = as_int(k, v, 1); };
        t["investor_size_max"] = [](Settings& s, auto k, auto v) { s.experiment.sim.investor_size.max = as_int(k, v, 1); };
        t["fixed_investor_size"] = [](Settings& s, auto k, auto v) { s.experiment.sim.fixed_investor_size = as_bool(k, v); };
        t["mm_size"] = [](Settings& s, auto k, auto v) { s.experiment.sim.mm_size = as_int(k, v, 1); };
        t["placement_half_width"] = [](Settings& s, auto k, auto v) {
            s.experiment.sim.placement.half_width = as_double(k, v);
        };
        t["placement_levels"] = [](Settings& s, auto k, auto v) { s.experiment.sim.placement.levels = as_int32(k, v, 0); };
        t["placement_decay"] = [](Settings& s, auto k, auto v) { s.experiment.sim.placement.decay = as_positive(k, v); };
        t["placement_center"] = [](Settings& s, auto k, auto v) { s.experiment.sim.placement.center = as_double(k, v); };
        t["stop_loss"] = [](Settings& s, auto k, auto v) {
            const double x = as_double(k, v);
            s.experiment.sim.investor_stop_loss = x;
            s.experiment.sim.mm_stop_loss = x;
            s.experiment.sim.extra_stop_loss = x;
        };
        t["investor_stop_loss"] = [](Settings& s, auto k, auto v) { s.experiment.sim.investor_stop_loss = as_double(k, v); };
        t["mm_stop_loss"] = [](Settings& s, auto k, auto v) { s.experiment.sim.mm_stop_loss = as_double(k, v); };
        t["extra_stop_loss"] = [](Settings& s, auto k, auto v) { s.experiment.sim.extra_stop_loss = as_double(k, v); };
        t["adversary_source"] = [](Settings& s, auto k, auto v) {
            if (v == "estimator") s.experiment.sim.adversary_source = sim::AdversarySource::Estimator;
            else if (v == "gradient") s.experiment.sim.adversary_source = sim::AdversarySource::Gradient;
            else bad_value(k, v, "estimator or gradient");
        };
        // experiment scale
        t["batches"] = [](Settings& s, auto k, auto v) { s.experiment.batches = as_int32(k, v, 1); };
        t["sims_per_batch"] = [](Settings& s, auto k, auto v) { s.experiment.sims_per_batch = as_int32(k, v, 1); };
        t["seed"] = [](Settings& s, auto k, auto v) { s.experiment.seed = parse_number<std::uint64_t>(k, v, "a u64"); };
        t["threads"] = [](Settings& s, auto k, auto v) { s.experiment.threads = static_cast<unsigned>(as_int32(k, v, 0)); };
        t["dataset_sims"] = [](Settings& s, auto k, auto v) { s.dataset_sims = as_int32(k, v, 1); };
        t["test_fraction"] = [](Settings& s, auto k, auto v) {
            const double x = as_double(k, v);
            if (!(x > 0.0 && x < 1.0)) bad_value(k, v, "a number in (0, 1)");
            s.test_fraction = x;
        };
        // surrogate
        t["l2"] = [](Settings& s, auto k, auto v) {
            const double x = as_double(k, v);
            if (x < 0.0) bad_value(k, v, "a number >= 0");
            s.train.l2 = x;
        };
        t["max_iterations"] = [](Settings& s, auto k, auto v) { s.train.max_iterations = as_int32(k, v, 1); };
        t["tolerance"] = [](Settings& s, auto k, auto v) { s.train.tolerance = as_positive(k, v); };
        // attack grid
        t["epsilon_min"] = [](Settings& s, auto k, auto v) { s.epsilon.min = as_positive(k, v); };
        t["epsilon_max"] = [](Settings& s, auto k, auto v) { s.epsilon.max = as_positive(k, v); };
        t["epsilon_points"] = [](Settings& s, auto k, auto v) { s.epsilon.points = as_int32(k, v, 1); };
        // sign estimator
        t["forest_trees"] = [](Settings& s, auto k, auto v) { s.forest.trees = as_int32(k, v, 1); };
        t["forest_max_depth"] = [](Settings& s, auto k, auto v) { s.forest.max_depth = as_int32(k, v, 1); };
        t["forest_max_features"] = [](Settings& s, auto k, auto v) { s.forest.max_features = as_int32(k, v, 0); };
        t["forest_min_samples_leaf"] = [](Settings& s, auto k, auto v) { s.forest.min_samples_leaf = as_int32(k, v, 1); };
        t["forest_bins"] = [](Settings& s, auto k, auto v) { s.forest.bins = as_int32(k, v, 2); };
        t["forest_bootstrap"] = [](Settings& s, auto k, auto v) { s.forest.bootstrap = as_bool(k, v); };
        t["forest_seed"] = [](Settings& s, auto k, auto v) { s.forest.seed = parse_number<std::uint64_t>(k, v, "a u64"); };
        return t;
    }();
    return table;
}

} // namespace

void apply(Settings& settings, std::string_view key, std::string_view value) {
    const auto& t = setters();
    const auto it = t.find(key);
    if (it == t.end()) throw ConfigError("unknown key '" + std::string(key) + "'");
    it->second(settings, key, value);
}

Settings parse(std::istream& is) {
    Settings s;
    std::set<std::string, std::less<>> seen;
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string prefix = "line " + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos) throw ConfigError(prefix + "expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(prefix + "empty key");
        if (!seen.emplace(key).second) throw ConfigError(prefix + "duplicate key '" + std::string(key) + "'");
        try {
            apply(s, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(prefix + e.what());
        }
    }
    validate(s);
    return s;
}

Settings load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in);
}

void validate(const Settings& s) {
    experiment::validate(s.experiment);
    sim::validate(s.experiment.sim, {});
    if (s.epsilon.max < s.epsilon.min) throw ConfigError("epsilon_max must be >= epsilon_min");
    if (s.forest.max_features > static_cast<int>(kFeatureCount)) throw ConfigError("forest_max_features exceeds 80");
    if (s.forest.bins > 65535) throw ConfigError("forest_bins must be <= 65535");
}

std::vector<std::string> known_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : setters()) keys.push_back(k);
    return keys;
}

} // namespace advtrade::config
