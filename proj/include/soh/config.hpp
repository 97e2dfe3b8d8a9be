#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "soh/core.hpp"

namespace soh {

/// Key not recognised anywhere in the schema.
class UnknownKeyError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Value does not parse as the key's type.
class TypeMismatchError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Well-typed value that violates a model or scenario constraint.
class ConstraintError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

enum class Scenario { riemann, collision, crowd, sweep };

const char* scenario_name(Scenario s);

struct RunConfig {
    Scenario scenario = Scenario::collision;
    ModelParams params;
    int nx = 200;
    int ny = 200;
    int snapshot_every = 0;  ///< 0: only the first and last state
    std::string output_dir;  ///< empty: SOH_OUTPUT_DIR, else "output"
    double x0 = 0.5;         ///< Riemann jump position
    double congested_tol = 1e-2;
    std::vector<double> epsilons;  ///< sweep only
    bool explicit_reference = true;  ///< sweep: also run the explicit stepper

    /// Scenario-specific checks on top of ModelParams::validate.
    void validate() const;
};

/// Scenario defaults.
RunConfig default_config(Scenario s);

/// Flat `key = value` text. `#` starts a comment. Keys before any section apply to every scenario;
/// keys in a `[riemann]`, `[collision]`, `[crowd]` or `[sweep]` section apply only when that scenario
/// runs and override the global ones. `scenario` is required.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Sorted list of accepted keys.
std::vector<std::string> config_keys();

}  // namespace soh
