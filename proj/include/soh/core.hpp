#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace soh {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (rho >= rho*, y < 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid parameters, grid sizes or configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A time step could not be completed (Newton failure, blow-up, negative pressure).
class SolverError : public Error {
public:
    SolverError(const std::string& what, double last_residual = 0.0)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Snapshot / table reading and writing failures.
class IoError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Densities are clamped from below to this value after every step.
inline constexpr double kDensityFloor = 1e-8;

struct ModelParams {
    double c = 1.0;          ///< velocity transport coefficient
    double lambda = 1.0;     ///< pressure coupling, > 0
    double epsilon = 1e-4;   ///< pressure stiffness, > 0
    double beta = 1e-7;      ///< relaxation time, > 0
    double gamma = 2.0;      ///< pressure exponent, > 0
    double rho_star = 1.0;   ///< congestion density, > 0
    double kappa = 0.0;      ///< background pressure strength (0 unless use_background)
    bool use_background = false;
    double dt = 5e-4;
    double dx = 0.005;
    double dy = 0.005;
    double t_end = 0.1;
    std::uint64_t seed = 0;
    /// 1D grids: implicit pressure Laplacian weight dt^2/8. False uses dt^2/4, which is what
    /// the 2D scheme reduces to on y-independent data.
    bool half_pressure_weight_1d = true;

    /// Throws ConfigError on the first violated invariant.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

enum class Boundary {
    periodic,
    /// Even mirror ghost cells (zero normal gradient); used for open 1D tests.
    transmissive,
};

/// Periodic index arithmetic: returns i mod n in [0, n).
inline int wrap_index(int i, int n) {
    const int r = i % n;
    return r < 0 ? r + n : r;
}

/// Mirror index about the domain faces: -1 -> 0, -2 -> 1, n -> n-1, n+1 -> n-2.
inline int mirror_index(int i, int n) {
    const int period = 2 * n;
    int k = wrap_index(i, period);
    return k < n ? k : period - 1 - k;
}

struct Grid {
    int nx = 0;
    int ny = 0;
    double dx = 0.0;
    double dy = 0.0;
    Boundary bx = Boundary::periodic;
    Boundary by = Boundary::periodic;

    bool is_1d() const noexcept { return ny == 1; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }

    /// Row-major: x runs fastest.
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
    }
    /// Maps any signed x index (ghost or interior) onto an interior one.
    int map_x(int i) const noexcept { return bx == Boundary::periodic ? wrap_index(i, nx) : mirror_index(i, nx); }
    int map_y(int j) const noexcept { return by == Boundary::periodic ? wrap_index(j, ny) : mirror_index(j, ny); }
    /// Index of the (possibly ghost) cell (i, j).
    std::size_t at(int i, int j) const noexcept { return index(map_x(i), map_y(j)); }

    double x_center(int i) const noexcept { return (i + 0.5) * dx; }
    double y_center(int j) const noexcept { return (j + 0.5) * dy; }

    bool periodic() const noexcept { return bx == Boundary::periodic && by == Boundary::periodic; }
};

/// Builds a grid; rejects nx < 4 since the pressure stencil reaches two cells away.
Grid make_grid(int nx, int ny, double dx, double dy,
               Boundary bx = Boundary::periodic, Boundary by = Boundary::periodic);

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double norm(Vec2 v) noexcept { return std::hypot(v.x, v.y); }

struct FieldState {
    Grid grid;
    std::vector<double> rho;
    std::vector<double> q1;
    std::vector<double> q2;
    double time = 0.0;

    FieldState() = default;
    /// Zero-momentum state with uniform density.
    FieldState(const Grid& g, double rho0);

    std::size_t size() const noexcept { return rho.size(); }
};

/// q / rho in one cell; no normalization.
Vec2 omega_of(const FieldState& state, std::size_t cell);

/// Sum of rho times cell area.
double total_mass(std::span<const double> rho, const Grid& grid);

double max_value(std::span<const double> v);
double min_value(std::span<const double> v);

/// Clamps every entry from below to kDensityFloor; returns how many were raised.
std::size_t apply_density_floor(std::span<double> rho);

/// Throws SolverError if any entry is NaN or infinite.
void require_finite(std::span<const double> v, const char* what);

}  // namespace soh
