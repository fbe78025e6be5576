#pragma once

#include <stdexcept>

namespace advtrade {

/// Invalid configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A required model or estimator file is absent (CLI exit code 2).
class MissingArtifact : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace advtrade
