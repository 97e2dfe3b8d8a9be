#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "soh/config.hpp"
#include "soh/scenarios.hpp"

namespace soh {

struct RunOptions {
    /// Root for output files; empty means config.output_dir, then SOH_OUTPUT_DIR, then "output".
    std::string output_dir;
    bool write_files = true;
    std::ostream* log = nullptr;  ///< progress lines and warnings
};

/// Shock samples are fitted from this time on; the first steps smear the initial jump.
inline constexpr double kShockFitStart = 0.01;

struct RunSummary {
    Scenario scenario = Scenario::collision;
    int steps = 0;
    double final_time = 0.0;
    /// max over steps of |M(t)/M(0) - 1|; with open (transmissive) boundaries this measures in/outflow.
    double mass_drift = 0.0;
    double species_drift = 0.0;  ///< crowd: worst of the two species
    bool closed_domain = true;
    double max_density = 0.0;    ///< over all steps, of rho or rho_+ + rho_-
    double max_cfl = 0.0;
    double final_congested_fraction = 0.0;
    /// (boundary - x0) / arrival_time.
    std::optional<double> shock_speed;
    std::optional<ShockFit> shock_fit;  ///< least squares over t >= kShockFitStart
    std::optional<double> arrival_time;
    bool arrival_observed = false;  ///< false: arrival extrapolated from the fit
    double final_correlation = 0.0;  ///< crowd
    std::string output_dir;          ///< where files went, empty if none
};

/// Runs one scenario to t_end. Writes snapshot_<step>.soh (+ .txt mirror) at step 0, every
/// snapshot_every steps and at the end, and one diagnostics.tsv row per step.
/// Solver failures are rethrown as SolverError naming the failing step.
RunSummary run(const RunConfig& config, const RunOptions& options = {});

struct SweepEntry {
    double epsilon = 0.0;
    bool ap_stable = false;
    int ap_steps = 0;
    double ap_max_density = 0.0;
    double ap_max_cfl = 0.0;
    std::string ap_message;
    bool explicit_ran = false;
    bool explicit_stable = false;
    int explicit_blowup_step = -1;  ///< first failing step, -1 if none
};

struct SweepSummary {
    std::vector<SweepEntry> entries;
    bool all_ap_stable = false;
    double max_cfl = 0.0;
    std::string output_dir;
};

/// Collision scenario for every epsilon at fixed dt: AP stepper, optionally the explicit one too.
SweepSummary run_sweep(const RunConfig& config, const RunOptions& options = {});

/// Output root resolution used by run and run_sweep.
std::string resolve_output_dir(const RunConfig& config, const RunOptions& options);

}  // namespace soh
