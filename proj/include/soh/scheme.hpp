#pragma once

#include <span>
#include <vector>

#include "soh/core.hpp"
#include "soh/pressure.hpp"

namespace soh {

// ---------------------------------------------------------------------------
// Wave speeds and numerical diffusion
// ---------------------------------------------------------------------------

/// Which pressure derivative enters the characteristic speeds.
enum class SpeedBranch {
    explicit_part,  ///< (p0)'  -- bounded as eps -> 0, used by the AP scheme
    full,           ///< (p_eps)' -- used by the explicit reference scheme
};

struct SpeedTriple {
    double transport = 0.0;  ///< c u
    double minus = 0.0;      ///< c u - root
    double plus = 0.0;       ///< c u + root
};

/// Characteristic speeds of the relaxation system along one direction.
/// A negative radicand (possible for c < 1) is replaced by its absolute value.
SpeedTriple char_speeds_relax(double rho, double u, const ModelParams& params,
                              const PressureModel& pressure, SpeedBranch branch);

/// Scalar bound |u| + |(c^2 - c) u^2 + lambda dp|^(1/2) for a purely one-directional flow.
double cell_speed_scalar(double rho, double u, const ModelParams& params,
                         const PressureModel& pressure, SpeedBranch branch);

/// Largest |eigenvalue| over the x and y directional speed sets of one cell.
/// Coincides with cell_speed_scalar when c = 1 and u2 = 0.
double cell_speed(double rho, double u1, double u2, const ModelParams& params,
                  const PressureModel& pressure, SpeedBranch branch);

struct CellState {
    double rho = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
};

/// Rusanov diffusion coefficient of the face between two cells: max of both cell speeds.
double diffusion_coeff(const CellState& left, const CellState& right, const ModelParams& params,
                       const PressureModel& pressure, SpeedBranch branch = SpeedBranch::explicit_part);

// ---------------------------------------------------------------------------
// Explicit part of the conservative step
// ---------------------------------------------------------------------------

/// Explicit momentum update and face diffusion coefficients of one fluid.
struct MomentumPredictor {
    std::vector<double> phi1;  ///< q1 - dt * (explicit flux divergence)
    std::vector<double> phi2;
    std::vector<double> cx;    ///< C on x faces, (nx+1) * ny entries
    std::vector<double> cy;    ///< C on y faces, nx * (ny+1) entries; empty in 1D
    double max_speed = 0.0;
};

/// Rusanov predictor for one fluid with density `rho` and momentum (q1, q2).
/// The explicit pressure is evaluated at `rho_pressure` (the total density in two-fluid runs).
/// Faces are stored "left of cell": cx[j*(nx+1) + k] is the face between cells k-1 and k,
/// cy[k*nx + i] the face between rows k-1 and k.
MomentumPredictor momentum_predictor(const Grid& grid, std::span<const double> rho,
                                     std::span<const double> q1, std::span<const double> q2,
                                     std::span<const double> rho_pressure, const ModelParams& params,
                                     const PressureModel& pressure);

/// Adds rho - dt div(phi) + dt/2 (C-weighted density diffusion) of one fluid to `rhs`.
void accumulate_mass_rhs(const Grid& grid, double dt, std::span<const double> rho,
                         const MomentumPredictor& pred, std::span<double> rhs);

// ---------------------------------------------------------------------------
// Elliptic pressure equation
// ---------------------------------------------------------------------------

/// rho(p1) - L p1 = rhs, with L the stride-2 Laplacian
///   L p = ax (p[i+2] - 2p[i] + p[i-2]) + ay (p[j+2] - 2p[j] + p[j-2]),
/// ax = f dt^2 lambda / (4 dx^2), ay likewise (absent in 1D), f = pressure_factor.
/// On 1D grids ax uses 8 dx^2 unless ModelParams::half_pressure_weight_1d is off.
struct EllipticSystem {
    Grid grid;
    std::vector<double> rhs;
    double ax = 0.0;
    double ay = 0.0;
    double pressure_factor = 1.0;
    MomentumPredictor predictor;

    /// out = L p (ghost cells follow the grid boundary rule).
    void apply_laplacian(std::span<const double> p, std::span<double> out) const;
    /// Diagonal entry of -L.
    double laplacian_diagonal() const noexcept { return 2.0 * (ax + ay); }
};

/// Assembles the discrete elliptic equation of the conservative step of `state`.
EllipticSystem assemble_elliptic(const FieldState& state, const ModelParams& params,
                                 const PressureModel& pressure);

struct NewtonOptions {
    double tolerance = 1e-10;     ///< on max|residual| / (1 + max|rhs|)
    int max_iterations = 50;
    double cg_tolerance = 1e-12;  ///< relative residual floor; looser while Newton is far off
    int cg_max_iterations = 20000;
    bool jacobi = true;
};

struct NewtonSolution {
    std::vector<double> p1;
    std::vector<double> rho;  ///< invert_p1 of p1, floored
    int iterations = 0;
    long linear_iterations = 0;
    double residual = 0.0;    ///< final max|residual|
    std::vector<double> residual_history;
};

/// Damped Newton on rho(p1) - L p1 = rhs. The Jacobian diag(1/p1'(rho)) - L is SPD and is
/// inverted by (Jacobi-preconditioned) conjugate gradients. Iterates are kept >= 0.
/// Throws SolverError carrying the last residual on non-convergence.
NewtonSolution newton_elliptic(const EllipticSystem& system, const PressureModel& pressure,
                               std::span<const double> initial_guess, const NewtonOptions& options = {});

// ---------------------------------------------------------------------------
// Steppers
// ---------------------------------------------------------------------------

struct StepOptions {
    NewtonOptions newton;
    double congested_tol = 1e-2;
    /// Initial p1 for the elliptic solve, typically the previous step's solution.
    /// Empty: p1 of the current density.
    std::span<const double> warm_p1;
};

struct StepReport {
    int newton_iterations = 0;
    long inner_linear_iterations = 0;
    double newton_residual = 0.0;
    double max_char_speed = 0.0;
    double cfl_explicit = 0.0;      ///< dt * max C / min(dx, dy)
    double congested_fraction = 0.0;
    double lattice_discrepancy = 0.0;  ///< spread of the sub-lattice mean densities
};

struct StepResult {
    FieldState state;
    StepReport report;
    std::vector<double> p1;  ///< elliptic solution (empty for the explicit stepper)
};

/// Semi-implicit Rusanov step with implicit mass flux and implicit p1 gradient.
StepResult conservative_step(const FieldState& state, const ModelParams& params,
                             const PressureModel& pressure, const StepOptions& options = {});

/// Exact solution of q_t = (1 - |q/rho|^2) q / beta over dt; rho is unchanged.
FieldState relaxation_step(const FieldState& state, const ModelParams& params);

/// conservative_step followed by relaxation_step.
StepResult ap_step(const FieldState& state, const ModelParams& params, const PressureModel& pressure,
                   const StepOptions& options = {});

/// Fully explicit Rusanov step using the full pressure in flux and diffusion, followed by
/// the same relaxation. Throws SolverError when the state leaves (0, rho*) or turns non-finite.
StepResult explicit_step(const FieldState& state, const ModelParams& params, const PressureModel& pressure,
                         const StepOptions& options = {});

/// Fraction of cells with rho >= rho* - tol.
double congested_fraction(std::span<const double> rho, double rho_star, double tol);

/// max - min of the mean densities of the (even/odd x) x (even/odd y) sub-lattices.
double lattice_discrepancy(const Grid& grid, std::span<const double> rho);

}  // namespace soh
