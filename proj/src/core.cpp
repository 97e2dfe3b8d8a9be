#include "soh/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace soh {

void ModelParams::validate() const {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(std::isfinite(c), "c must be finite");
    require(lambda > 0.0, "lambda must be > 0");
    require(epsilon > 0.0, "epsilon must be > 0");
    require(beta > 0.0, "beta must be > 0");
    require(gamma > 0.0, "gamma must be > 0");
    require(rho_star > 0.0, "rho_star must be > 0");
    require(kappa >= 0.0, "kappa must be >= 0");
    require(use_background || kappa == 0.0, "kappa must be 0 when use_background is false");
    require(dt > 0.0, "dt must be > 0");
    require(dx > 0.0, "dx must be > 0");
    require(dy > 0.0, "dy must be > 0");
    require(t_end >= 0.0, "t_end must be >= 0");
}

Grid make_grid(int nx, int ny, double dx, double dy, Boundary bx, Boundary by) {
    if (nx < 4) {
        std::ostringstream msg;
        msg << "grid needs nx >= 4 for the stride-2 pressure stencil, got " << nx;
        throw ConfigError(msg.str());
    }
    if (ny < 1) throw ConfigError("grid needs ny >= 1");
    if (ny > 1 && ny < 4) throw ConfigError("2D grid needs ny >= 4 for the stride-2 pressure stencil");
    if (!(dx > 0.0) || !(dy > 0.0)) throw ConfigError("grid spacings must be > 0");
    Grid g;
    g.nx = nx;
    g.ny = ny;
    g.dx = dx;
    g.dy = dy;
    g.bx = bx;
    g.by = by;
    return g;
}

FieldState::FieldState(const Grid& g, double rho0)
    : grid(g), rho(g.size(), rho0), q1(g.size(), 0.0), q2(g.size(), 0.0) {}

Vec2 omega_of(const FieldState& state, std::size_t cell) {
    const double r = std::max(state.rho[cell], kDensityFloor);
    return {state.q1[cell] / r, state.q2[cell] / r};
}

double total_mass(std::span<const double> rho, const Grid& grid) {
    // Compensated sum: drift checks go down to 1e-12 relative.
    double sum = 0.0;
    double comp = 0.0;
    for (double v : rho) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum * grid.dx * (grid.is_1d() ? 1.0 : grid.dy);
}

double max_value(std::span<const double> v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

double min_value(std::span<const double> v) {
    return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
}

std::size_t apply_density_floor(std::span<double> rho) {
    std::size_t raised = 0;
    for (double& r : rho) {
        if (r < kDensityFloor) {
            r = kDensityFloor;
            ++raised;
        }
    }
    return raised;
}

void require_finite(std::span<const double> v, const char* what) {
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!std::isfinite(v[k])) {
            std::ostringstream msg;
            msg << "non-finite " << what << " at cell " << k;
            throw SolverError(msg.str());
        }
    }
}

}  // namespace soh
