#pragma once

#include <stdexcept>
#include <string>

namespace mesotree {

/// A sampler strategy was requested for a kernel it cannot sample exactly.
class StrategyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The attachment function violates the growth-rate assumptions needed for a
/// Malthusian parameter to exist.
class AssumptionViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration or command-line input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mesotree
