#include "soh/scenarios.hpp"

#include <cmath>
#include <sstream>

#include "soh/scheme.hpp"

namespace soh {

namespace {

void check_states(const RiemannSpec& spec) {
    if (!(spec.jump_position > 0.0 && spec.jump_position < 1.0))
        throw ConfigError("Riemann jump position must lie in (0, 1)");
    if (!(spec.left.rho > 0.0) || !(spec.right.rho > 0.0)) throw ConfigError("Riemann densities must be > 0");
}

}  // namespace

void RiemannSpec::validate() const {
    check_states(*this);
    if (left.rho == right.rho && left.theta == right.theta) throw ConfigError("Riemann states must differ");
}

Grid riemann_grid(int nx, int ny, double dx, double dy) {
    return make_grid(nx, ny, dx, dy, Boundary::transmissive, Boundary::periodic);
}

FieldState init_riemann(const RiemannSpec& spec, const Grid& grid) {
    check_states(spec);
    FieldState s(grid, spec.left.rho);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const AngleState& a = grid.x_center(i) < spec.jump_position ? spec.left : spec.right;
            const std::size_t k = grid.index(i, j);
            s.rho[k] = a.rho;
            s.q1[k] = a.rho * std::cos(a.theta);
            s.q2[k] = a.rho * std::sin(a.theta);
        }
    }
    return s;
}

FieldState init_collision(const Grid& grid) {
    if (grid.is_1d()) throw ConfigError("collision scenario needs a 2D grid");
    FieldState s(grid, 0.7);
    for (int j = 0; j < grid.ny; ++j) {
        const double y = grid.y_center(j);
        const bool band = y >= 1.0 / 3.0 && y <= 2.0 / 3.0;
        for (int i = 0; i < grid.nx; ++i) {
            const double x = grid.x_center(i);
            const std::size_t k = grid.index(i, j);
            double o1 = 0.0;
            double o2 = 0.0;
            if (band && x >= 1.0 / 6.0 && x <= 0.5) {
                s.rho[k] = 0.8;
                o1 = 1.0;
            } else if (band && x > 0.5 && x <= 10.0 / 12.0) {
                s.rho[k] = 0.8;
                o1 = -1.0;
            } else {
                const double dxc = x - 0.5;
                const double dyc = y - 0.5;
                const double r = std::hypot(dxc, dyc);
                // The centre belongs to A, so r never vanishes here.
                if (!(r > 0.0)) throw DomainError("swirl evaluated at the domain centre");
                o1 = -dyc / r;
                o2 = dxc / r;
            }
            s.q1[k] = s.rho[k] * o1;
            s.q2[k] = s.rho[k] * o2;
        }
    }
    return s;
}

std::optional<double> track_shock(const FieldState& state, const RiemannSpec& spec, std::optional<double> previous) {
    const Grid& g = state.grid;
    const double level = 0.5 * (spec.left.rho + spec.right.rho);
    const bool rising = spec.right.rho > spec.left.rho;
    std::optional<double> best;
    for (int i = 0; i + 1 < g.nx; ++i) {
        const double a = state.rho[g.index(i, 0)];
        const double b = state.rho[g.index(i + 1, 0)];
        const bool cross = rising ? (a < level && b >= level) : (a > level && b <= level);
        if (!cross) continue;
        const double x = g.x_center(i) + (level - a) / (b - a) * g.dx;
        if (!best || (previous && std::abs(x - *previous) < std::abs(*best - *previous))) best = x;
    }
    return best;
}

void ShockTrack::record(double t, std::optional<double> x) {
    if (last_time_ && !(t > *last_time_)) throw ConfigError("shock samples must have increasing times");
    last_time_ = t;
    if (!x) {
        if (!arrival_) arrival_ = t;
        return;
    }
    if (arrival_) return;
    times_.push_back(t);
    positions_.push_back(*x);
}

std::optional<double> ShockTrack::last_position() const {
    if (positions_.empty()) return std::nullopt;
    return positions_.back();
}

ShockFit ShockTrack::fit(double t_min) const {
    double n = 0, st = 0, sx = 0, stt = 0, stx = 0;
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (times_[k] < t_min) continue;
        n += 1.0;
        st += times_[k];
        sx += positions_[k];
        stt += times_[k] * times_[k];
        stx += times_[k] * positions_[k];
    }
    if (n < 2.0) throw SolverError("shock fit needs at least two samples");
    const double den = n * stt - st * st;
    ShockFit f;
    f.speed = (n * stx - st * sx) / den;
    f.intercept = (sx - f.speed * st) / n;
    double ss = 0.0;
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (times_[k] < t_min) continue;
        const double e = positions_[k] - (f.intercept + f.speed * times_[k]);
        ss += e * e;
    }
    f.rms_residual = std::sqrt(ss / n);
    return f;
}

double congested_fraction(const FieldState& state, const ModelParams& params, double tol) {
    if (!(tol > 0.0)) throw ConfigError("congestion tolerance must be > 0");
    return congested_fraction(state.rho, params.rho_star, tol);
}

}  // namespace soh
