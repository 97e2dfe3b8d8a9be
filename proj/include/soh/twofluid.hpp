#pragma once

#include <cstdint>
#include <vector>

#include "soh/core.hpp"
#include "soh/pressure.hpp"
#include "soh/scheme.hpp"

namespace soh {

/// Right-going (+) and left-going (-) pedestrians sharing one congestion pressure.
struct TwoFluidState {
    Grid grid;
    std::vector<double> rho_p, rho_m;
    std::vector<double> qp1, qp2, qm1, qm2;
    std::vector<double> wp1, wp2, wm1, wm2;  ///< desired velocities
    double time = 0.0;

    TwoFluidState() = default;
    explicit TwoFluidState(const Grid& g);
    std::size_t size() const noexcept { return rho_p.size(); }
    std::vector<double> total_density() const;
};

/// SplitMix64 evaluated at a counter: the k-th draw of stream `seed` is independent of
/// how many draws were taken before it.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : seed_(seed) {}
    static std::uint64_t mix(std::uint64_t z);
    std::uint64_t at(std::uint64_t k) const;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform_at(std::uint64_t k) const;

private:
    std::uint64_t seed_;
};

/// Crowd initial data: rho_+ = rho_- = 0.4, q = 0, w = +-e_x; 5x5-cell blocks whose centre lies in
/// [1/3,2/3]^2 get rho_+ = 0.4 + r, r ~ U[-0.19, 0.19] drawn in row-major block order, and rho_- = 0.8 - rho_+.
/// nx and ny must be multiples of 5.
TwoFluidState init_crowd(const Grid& grid, std::uint64_t seed);

struct CrowdStepResult {
    TwoFluidState state;
    StepReport report;
};

/// Conservative step: total elliptic solve with doubled pressure, species momenta, species masses,
/// then the desired velocities (upwinded with the species mass flux). Requires c = 1.
CrowdStepResult twofluid_conservative_step(const TwoFluidState& state, const ModelParams& params,
                                           const PressureModel& pressure, const StepOptions& options = {});

/// q = rho w + (q - rho w) exp(-dt/beta); densities and w unchanged.
TwoFluidState twofluid_relaxation_step(const TwoFluidState& state, const ModelParams& params);

/// Conservative step followed by the relaxation step.
CrowdStepResult crowd_ap_step(const TwoFluidState& state, const ModelParams& params,
                              const PressureModel& pressure, const StepOptions& options = {});

struct FieldStats {
    double mean = 0.0;
    double variance = 0.0;
    double min = 0.0;
    double max = 0.0;
};
FieldStats field_stats(std::span<const double> v);

/// Pearson correlation; 0 when either field is constant.
double correlation(std::span<const double> a, std::span<const double> b);

struct LaneDiagnostics {
    std::vector<double> drho;  ///< rho_+ - rho_-
    std::vector<double> dq1;   ///< q_+,1 + q_-,1
    FieldStats drho_stats;
    FieldStats dq1_stats;
    double correlation = 0.0;  ///< cellwise, Dq1 against Drho
};
LaneDiagnostics lane_diagnostics(const TwoFluidState& state);

/// Throws ConfigError unless c == 1 (the crowd momentum equations carry no c).
void require_crowd_params(const ModelParams& params);

}  // namespace soh
