#pragma once

#include <stdexcept>
#include <string>

namespace ctrcac {

/// Invalid configuration: dimension mismatch, non-PD weight, bad option combination.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Scenario text could not be parsed or violates the schema (unknown key, wrong type).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Output files could not be written.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite value reached the adaptation law or plant. The simulation engine
/// catches this and marks the run diverged instead of failing.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Euler-angle kinematics evaluated inside the pitch guard band.
class SingularityError : public DivergenceError {
public:
    explicit SingularityError(const std::string& what) : DivergenceError(what) {}
};

} // namespace ctrcac
