#include "soh/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace soh {

namespace {

double root_term(double u, double c, double lambda, double dpress) {
    // |.| regularizes the complex case c < 1.
    return std::sqrt(std::abs((c * c - c) * u * u + lambda * dpress));
}

double branch_derivative(double rho, const PressureModel& pressure, SpeedBranch branch) {
    return branch == SpeedBranch::explicit_part ? pressure.dp0(rho) : pressure.dp_eps(rho);
}

double directional_speed(double u1, double u2, double c, double lambda, double dpress) {
    const double sx = std::abs(c * u1) + root_term(u1, c, lambda, dpress);
    const double sy = std::abs(c * u2) + root_term(u2, c, lambda, dpress);
    return std::max(sx, sy);
}

// Neighbour tables along one axis, offsets -2..+2 (index k + 2).
struct AxisMap {
    std::vector<int> m[5];
    AxisMap(int n, bool periodic) {
        for (int k = 0; k < 5; ++k) {
            m[k].resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                m[k][static_cast<std::size_t>(i)] = periodic ? wrap_index(i + k - 2, n) : mirror_index(i + k - 2, n);
        }
    }
    int operator()(int i, int off) const { return m[off + 2][static_cast<std::size_t>(i)]; }
};

// Explicit flux pieces of one fluid, with pressure law `pfun` and speed derivative `dpfun`.
template <class PFun, class DPFun>
MomentumPredictor predict(const Grid& grid, std::span<const double> rho, std::span<const double> q1,
                          std::span<const double> q2, std::span<const double> rho_pressure,
                          const ModelParams& params, PFun pfun, DPFun dpfun) {
    const int nx = grid.nx;
    const int ny = grid.ny;
    const std::size_t n = grid.size();
    const double c = params.c;
    const double lam = params.lambda;
    const double dt = params.dt;
    const bool two_d = !grid.is_1d();

    std::vector<double> speed(n), fxx(n), fxy(n), fyy(n);
    MomentumPredictor out;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = std::max(rho[k], kDensityFloor);
        const double u1 = q1[k] / r;
        const double u2 = q2[k] / r;
        const double press = lam * pfun(rho_pressure[k]);
        speed[k] = directional_speed(u1, u2, c, lam, dpfun(rho_pressure[k]));
        fxx[k] = c * q1[k] * u1 + press;
        fxy[k] = c * q1[k] * u2;
        fyy[k] = c * q2[k] * u2 + press;
        out.max_speed = std::max(out.max_speed, speed[k]);
    }

    const AxisMap mx(nx, grid.bx == Boundary::periodic);
    out.phi1.assign(q1.begin(), q1.end());
    out.phi2.assign(q2.begin(), q2.end());
    out.cx.assign(static_cast<std::size_t>(nx + 1) * static_cast<std::size_t>(ny), 0.0);

    // x faces; face k sits between cells k-1 and k.
    std::vector<double> f1(static_cast<std::size_t>(nx + 1)), f2(static_cast<std::size_t>(nx + 1));
    const double rx = dt / grid.dx;
    for (int j = 0; j < ny; ++j) {
        const std::size_t row = grid.index(0, j);
        for (int k = 0; k <= nx; ++k) {
            const std::size_t l = row + static_cast<std::size_t>(k == 0 ? mx(0, -1) : k - 1);
            const std::size_t r = row + static_cast<std::size_t>(k == nx ? mx(nx - 1, 1) : k);
            const double cf = std::max(speed[l], speed[r]);
            out.cx[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx + 1) + static_cast<std::size_t>(k)] = cf;
            f1[static_cast<std::size_t>(k)] = 0.5 * (fxx[l] + fxx[r]) - 0.5 * cf * (q1[r] - q1[l]);
            f2[static_cast<std::size_t>(k)] = 0.5 * (fxy[l] + fxy[r]) - 0.5 * cf * (q2[r] - q2[l]);
        }
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            out.phi1[row + k] = q1[row + k] - rx * (f1[k + 1] - f1[k]);
            out.phi2[row + k] = q2[row + k] - rx * (f2[k + 1] - f2[k]);
        }
    }
    if (!two_d) return out;

    // y faces; face k sits between rows k-1 and k.
    const AxisMap my(ny, grid.by == Boundary::periodic);
    out.cy.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny + 1), 0.0);
    const double ry = dt / grid.dy;
    std::vector<double> g1(static_cast<std::size_t>(nx)), g2(static_cast<std::size_t>(nx));
    std::vector<double> g1_prev(static_cast<std::size_t>(nx)), g2_prev(static_cast<std::size_t>(nx));
    auto face_row = [&](int k, std::vector<double>& a, std::vector<double>& b) {
        const int jl = k == 0 ? my(0, -1) : k - 1;
        const int jr = k == ny ? my(ny - 1, 1) : k;
        for (int i = 0; i < nx; ++i) {
            const std::size_t l = grid.index(i, jl);
            const std::size_t r = grid.index(i, jr);
            const double cf = std::max(speed[l], speed[r]);
            out.cy[static_cast<std::size_t>(k) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)] = cf;
            a[static_cast<std::size_t>(i)] = 0.5 * (fxy[l] + fxy[r]) - 0.5 * cf * (q1[r] - q1[l]);
            b[static_cast<std::size_t>(i)] = 0.5 * (fyy[l] + fyy[r]) - 0.5 * cf * (q2[r] - q2[l]);
        }
    };
    face_row(0, g1_prev, g2_prev);
    for (int j = 0; j < ny; ++j) {
        face_row(j + 1, g1, g2);
        const std::size_t row = grid.index(0, j);
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            out.phi1[row + k] = out.phi1[row + k] - ry * (g1[k] - g1_prev[k]);
            out.phi2[row + k] = out.phi2[row + k] - ry * (g2[k] - g2_prev[k]);
        }
        std::swap(g1, g1_prev);
        std::swap(g2, g2_prev);
    }
    return out;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void check_step_input(const FieldState& state) {
    const std::size_t n = state.grid.size();
    if (state.rho.size() != n || state.q1.size() != n || state.q2.size() != n)
        throw ConfigError("state arrays do not match the grid");
}

}  // namespace

// ---------------------------------------------------------------------------

SpeedTriple char_speeds_relax(double rho, double u, const ModelParams& params, const PressureModel& pressure,
                              SpeedBranch branch) {
    const double root = root_term(u, params.c, params.lambda, branch_derivative(rho, pressure, branch));
    const double cu = params.c * u;
    return {cu, cu - root, cu + root};
}

double cell_speed_scalar(double rho, double u, const ModelParams& params, const PressureModel& pressure,
                         SpeedBranch branch) {
    return std::abs(u) + root_term(u, params.c, params.lambda, branch_derivative(rho, pressure, branch));
}

double cell_speed(double rho, double u1, double u2, const ModelParams& params, const PressureModel& pressure,
                  SpeedBranch branch) {
    return directional_speed(u1, u2, params.c, params.lambda, branch_derivative(rho, pressure, branch));
}

double diffusion_coeff(const CellState& left, const CellState& right, const ModelParams& params,
                       const PressureModel& pressure, SpeedBranch branch) {
    auto speed = [&](const CellState& s) {
        const double r = std::max(s.rho, kDensityFloor);
        return cell_speed(s.rho, s.q1 / r, s.q2 / r, params, pressure, branch);
    };
    return std::max(speed(left), speed(right));
}

MomentumPredictor momentum_predictor(const Grid& grid, std::span<const double> rho, std::span<const double> q1,
                                     std::span<const double> q2, std::span<const double> rho_pressure,
                                     const ModelParams& params, const PressureModel& pressure) {
    return predict(
        grid, rho, q1, q2, rho_pressure, params, [&](double r) { return pressure.split_p0(r); },
        [&](double r) { return pressure.dp0(r); });
}

void accumulate_mass_rhs(const Grid& grid, double dt, std::span<const double> rho, const MomentumPredictor& pred,
                         std::span<double> rhs) {
    const int nx = grid.nx;
    const int ny = grid.ny;
    const AxisMap mx(nx, grid.bx == Boundary::periodic);
    const double hx = dt / (2.0 * grid.dx);
    const std::size_t fx_stride = static_cast<std::size_t>(nx + 1);
    for (int j = 0; j < ny; ++j) {
        const std::size_t row = grid.index(0, j);
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = row + static_cast<std::size_t>(i);
            const std::size_t ip = row + static_cast<std::size_t>(mx(i, 1));
            const std::size_t im = row + static_cast<std::size_t>(mx(i, -1));
            const std::size_t f = static_cast<std::size_t>(j) * fx_stride + static_cast<std::size_t>(i);
            double v = rho[k] - hx * (pred.phi1[ip] - pred.phi1[im]);
            v = v + hx * (pred.cx[f + 1] * (rho[ip] - rho[k]) - pred.cx[f] * (rho[k] - rho[im]));
            rhs[k] += v;
        }
    }
    if (grid.is_1d()) return;

    const AxisMap my(ny, grid.by == Boundary::periodic);
    const double hy = dt / (2.0 * grid.dy);
    const std::size_t nxs = static_cast<std::size_t>(nx);
    for (int j = 0; j < ny; ++j) {
        const std::size_t row = grid.index(0, j);
        const std::size_t row_p = grid.index(0, my(j, 1));
        const std::size_t row_m = grid.index(0, my(j, -1));
        for (int i = 0; i < nx; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            const std::size_t k = row + ii;
            const std::size_t f = static_cast<std::size_t>(j) * nxs + ii;
            const double v = -hy * (pred.phi2[row_p + ii] - pred.phi2[row_m + ii]) +
                             hy * (pred.cy[f + nxs] * (rho[row_p + ii] - rho[k]) - pred.cy[f] * (rho[k] - rho[row_m + ii]));
            rhs[k] += v;
        }
    }
}

// ---------------------------------------------------------------------------

void EllipticSystem::apply_laplacian(std::span<const double> p, std::span<double> out) const {
    const int nx = grid.nx;
    const int ny = grid.ny;
    const AxisMap mx(nx, grid.bx == Boundary::periodic);
    for (int j = 0; j < ny; ++j) {
        const std::size_t row = grid.index(0, j);
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = row + static_cast<std::size_t>(i);
            out[k] = ax * (p[row + static_cast<std::size_t>(mx(i, 2))] - 2.0 * p[k] +
                           p[row + static_cast<std::size_t>(mx(i, -2))]);
        }
    }
    if (grid.is_1d()) return;
    const AxisMap my(ny, grid.by == Boundary::periodic);
    for (int j = 0; j < ny; ++j) {
        const std::size_t row = grid.index(0, j);
        const std::size_t up = grid.index(0, my(j, 2));
        const std::size_t dn = grid.index(0, my(j, -2));
        for (int i = 0; i < nx; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            out[row + ii] += ay * (p[up + ii] - 2.0 * p[row + ii] + p[dn + ii]);
        }
    }
}

EllipticSystem assemble_elliptic(const FieldState& state, const ModelParams& params, const PressureModel& pressure) {
    check_step_input(state);
    EllipticSystem sys;
    sys.grid = state.grid;
    sys.pressure_factor = 1.0;
    const double wx = state.grid.is_1d() && params.half_pressure_weight_1d ? 8.0 : 4.0;
    sys.ax = params.dt * params.dt * params.lambda / (wx * state.grid.dx * state.grid.dx);
    sys.ay = state.grid.is_1d() ? 0.0 : params.dt * params.dt * params.lambda / (4.0 * state.grid.dy * state.grid.dy);
    sys.predictor = momentum_predictor(state.grid, state.rho, state.q1, state.q2, state.rho, params, pressure);
    sys.rhs.assign(state.grid.size(), 0.0);
    accumulate_mass_rhs(state.grid, params.dt, state.rho, sys.predictor, sys.rhs);
    return sys;
}

// ---------------------------------------------------------------------------

namespace {

// Preconditioned CG on (diag(d) - L) x = b. Returns the iteration count.
long solve_jacobian(const EllipticSystem& sys, std::span<const double> d, std::span<const double> b,
                    std::span<double> x, const NewtonOptions& opt, double tol) {
    const std::size_t n = b.size();
    std::fill(x.begin(), x.end(), 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return 0;

    std::vector<double> r(b.begin(), b.end()), z(n), p(n), ap(n), lp(n);
    const double lap_diag = sys.laplacian_diagonal();
    auto precondition = [&] {
        for (std::size_t k = 0; k < n; ++k) z[k] = opt.jacobi ? r[k] / (d[k] + lap_diag) : r[k];
    };
    precondition();
    p = z;
    double rz = dot(r, z);
    long it = 0;
    while (it < opt.cg_max_iterations) {
        sys.apply_laplacian(p, lp);
        for (std::size_t k = 0; k < n; ++k) ap[k] = d[k] * p[k] - lp[k];
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;
        const double alpha = rz / pap;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        ++it;
        if (norm2(r) <= tol * bnorm) break;
        precondition();
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    return it;
}

struct ResidualEval {
    std::vector<double> rho;
    std::vector<double> r;
    double inf = 0.0;
    double two = 0.0;
};

void evaluate(const EllipticSystem& sys, const PressureModel& pressure, std::span<const double> p,
              std::span<const double> rho_guess, ResidualEval& e) {
    const std::size_t n = p.size();
    e.rho.resize(n);
    e.r.resize(n);
    for (std::size_t k = 0; k < n; ++k) e.rho[k] = std::max(pressure.invert_p1(p[k], rho_guess[k]), kDensityFloor);
    sys.apply_laplacian(p, e.r);
    for (std::size_t k = 0; k < n; ++k) {
        e.r[k] = e.rho[k] - e.r[k] - sys.rhs[k];
        // Vacuum: the density sits on the floor and would need a negative pressure. Treated as solved.
        if (e.rho[k] <= kDensityFloor && e.r[k] > 0.0) e.r[k] = 0.0;
    }
    e.inf = max_abs(e.r);
    e.two = norm2(e.r);
}

// Residuals this far below the scale are at round-off level.
constexpr double kPolishLevel = 1e-14;

}  // namespace

NewtonSolution newton_elliptic(const EllipticSystem& system, const PressureModel& pressure,
                               std::span<const double> initial_guess, const NewtonOptions& options) {
    const std::size_t n = system.rhs.size();
    if (initial_guess.size() != n) throw ConfigError("initial guess does not match the elliptic system");

    NewtonSolution sol;
    sol.p1.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (!(initial_guess[k] >= 0.0)) throw DomainError("initial pressure guess must be >= 0");
        sol.p1[k] = initial_guess[k];
    }
    std::vector<double> rho_guess(n);
    for (std::size_t k = 0; k < n; ++k)
        rho_guess[k] = std::clamp(system.rhs[k], kDensityFloor, pressure.params().rho_star * (1.0 - 1e-12));

    const double scale = 1.0 + max_abs(system.rhs);
    ResidualEval cur, trial;
    evaluate(system, pressure, sol.p1, rho_guess, cur);

    std::vector<double> d(n), delta(n), rhs_lin(n), p_trial(n);
    double prev_inf = std::numeric_limits<double>::infinity();
    for (;;) {
        sol.residual_history.push_back(cur.inf);
        const bool converged = cur.inf <= options.tolerance * scale;
        // Keep going past the tolerance while Newton still gains; mass conservation wants round-off.
        if (converged && (cur.inf <= kPolishLevel * scale || cur.inf > 0.25 * prev_inf)) break;
        if (sol.iterations >= options.max_iterations) {
            if (converged) break;
            std::ostringstream msg;
            msg << "Newton did not converge in " << options.max_iterations << " iterations, residual " << cur.inf;
            throw SolverError(msg.str(), cur.inf);
        }

        for (std::size_t k = 0; k < n; ++k) {
            d[k] = 1.0 / pressure.dp1(cur.rho[k]);
            rhs_lin[k] = -cur.r[k];
        }
        // Inexact Newton: the linear tolerance tracks the nonlinear residual.
        const double forcing = std::clamp(cur.inf / scale, options.cg_tolerance, 1e-2);
        sol.linear_iterations += solve_jacobian(system, d, rhs_lin, delta, options, forcing);

        // Projected, backtracked step: p1 stays >= 0 and the 2-norm residual decreases.
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t k = 0; k < n; ++k) p_trial[k] = std::max(sol.p1[k] + t * delta[k], 0.0);
            evaluate(system, pressure, p_trial, cur.rho, trial);
            if (std::isfinite(trial.two) && trial.two <= (1.0 - 1e-4 * t) * cur.two) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        ++sol.iterations;
        if (!accepted) {
            if (converged) break;
            std::ostringstream msg;
            msg << "Newton line search failed at iteration " << sol.iterations << ", residual " << cur.inf;
            throw SolverError(msg.str(), cur.inf);
        }
        prev_inf = cur.inf;
        sol.p1.swap(p_trial);
        std::swap(cur, trial);
    }
    sol.rho = std::move(cur.rho);
    sol.residual = cur.inf;
    return sol;
}

// ---------------------------------------------------------------------------

double congested_fraction(std::span<const double> rho, double rho_star, double tol) {
    if (rho.empty()) return 0.0;
    std::size_t count = 0;
    for (double r : rho)
        if (r >= rho_star - tol) ++count;
    return static_cast<double>(count) / static_cast<double>(rho.size());
}

double lattice_discrepancy(const Grid& grid, std::span<const double> rho) {
    double sum[4] = {0, 0, 0, 0};
    double cnt[4] = {0, 0, 0, 0};
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const int lat = (i & 1) + 2 * (j & 1);
            sum[lat] += rho[grid.index(i, j)];
            cnt[lat] += 1.0;
        }
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int l = 0; l < 4; ++l) {
        if (cnt[l] == 0.0) continue;
        const double m = sum[l] / cnt[l];
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    return hi - lo;
}

namespace {

void fill_report(StepReport& rep, const FieldState& out, const ModelParams& params, double max_speed,
                 const StepOptions& options) {
    const Grid& g = out.grid;
    const double h = g.is_1d() ? g.dx : std::min(g.dx, g.dy);
    rep.max_char_speed = max_speed;
    rep.cfl_explicit = params.dt * max_speed / h;
    rep.congested_fraction = congested_fraction(out.rho, params.rho_star, options.congested_tol);
    rep.lattice_discrepancy = lattice_discrepancy(g, out.rho);
}

}  // namespace

StepResult conservative_step(const FieldState& state, const ModelParams& params, const PressureModel& pressure,
                             const StepOptions& options) {
    const EllipticSystem sys = assemble_elliptic(state, params, pressure);
    const Grid& g = state.grid;
    const std::size_t n = g.size();

    std::vector<double> guess;
    if (options.warm_p1.size() == n) {
        guess.assign(options.warm_p1.begin(), options.warm_p1.end());
    } else {
        guess.resize(n);
        for (std::size_t k = 0; k < n; ++k) guess[k] = pressure.split_p1(std::max(state.rho[k], kDensityFloor));
    }
    NewtonSolution sol = newton_elliptic(sys, pressure, guess, options.newton);

    StepResult res;
    FieldState& out = res.state;
    out.grid = g;
    out.time = state.time + params.dt;
    out.rho = std::move(sol.rho);
    out.q1 = sys.predictor.phi1;
    out.q2 = sys.predictor.phi2;

    const std::vector<double>& p = sol.p1;
    const AxisMap mx(g.nx, g.bx == Boundary::periodic);
    const double gx = params.lambda * params.dt / (2.0 * g.dx);
    for (int j = 0; j < g.ny; ++j) {
        const std::size_t row = g.index(0, j);
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = row + static_cast<std::size_t>(i);
            out.q1[k] = out.q1[k] - gx * (p[row + static_cast<std::size_t>(mx(i, 1))] -
                                          p[row + static_cast<std::size_t>(mx(i, -1))]);
        }
    }
    if (!g.is_1d()) {
        const AxisMap my(g.ny, g.by == Boundary::periodic);
        const double gy = params.lambda * params.dt / (2.0 * g.dy);
        for (int j = 0; j < g.ny; ++j) {
            const std::size_t row = g.index(0, j);
            const std::size_t up = g.index(0, my(j, 1));
            const std::size_t dn = g.index(0, my(j, -1));
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t ii = static_cast<std::size_t>(i);
                out.q2[row + ii] = out.q2[row + ii] - gy * (p[up + ii] - p[dn + ii]);
            }
        }
    }
    apply_density_floor(out.rho);
    require_finite(out.q1, "momentum q1");
    require_finite(out.q2, "momentum q2");

    res.report.newton_iterations = sol.iterations;
    res.report.inner_linear_iterations = sol.linear_iterations;
    res.report.newton_residual = sol.residual;
    fill_report(res.report, out, params, sys.predictor.max_speed, options);
    res.p1 = std::move(sol.p1);
    return res;
}

FieldState relaxation_step(const FieldState& state, const ModelParams& params) {
    FieldState out = state;
    const double a = 2.0 * params.dt / params.beta;
    const double e = a > 700.0 ? 0.0 : std::exp(-a);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double r = std::max(out.rho[k], kDensityFloor);
        const double o1 = out.q1[k] / r;
        const double o2 = out.q2[k] / r;
        const double w2 = o1 * o1 + o2 * o2;
        if (w2 == 0.0) continue;
        const double fac = 1.0 / std::sqrt(w2 + (1.0 - w2) * e);
        out.q1[k] = r * (o1 * fac);
        out.q2[k] = r * (o2 * fac);
    }
    return out;
}

StepResult ap_step(const FieldState& state, const ModelParams& params, const PressureModel& pressure,
                   const StepOptions& options) {
    StepResult res = conservative_step(state, params, pressure, options);
    res.state = relaxation_step(res.state, params);
    return res;
}

StepResult explicit_step(const FieldState& state, const ModelParams& params, const PressureModel& pressure,
                         const StepOptions& options) {
    check_step_input(state);
    const Grid& g = state.grid;
    const std::size_t n = g.size();
    MomentumPredictor pred;
    try {
        pred = predict(
            g, state.rho, state.q1, state.q2, state.rho, params, [&](double r) { return pressure.p_eps(r); },
            [&](double r) { return pressure.dp_eps(r); });
    } catch (const DomainError& e) {
        throw SolverError(std::string("explicit step left the admissible state space: ") + e.what());
    }

    // Mass: rho - dt div(q) with the Rusanov density diffusion, all at time n.
    MomentumPredictor mass = pred;
    mass.phi1.assign(state.q1.begin(), state.q1.end());
    mass.phi2.assign(state.q2.begin(), state.q2.end());
    std::vector<double> rho_new(n, 0.0);
    accumulate_mass_rhs(g, params.dt, state.rho, mass, rho_new);
    // accumulate_mass_rhs uses centred differences of q, equal to the face-average flux difference.

    StepResult res;
    FieldState& out = res.state;
    out.grid = g;
    out.time = state.time + params.dt;
    out.rho = std::move(rho_new);
    out.q1 = std::move(pred.phi1);
    out.q2 = std::move(pred.phi2);
    for (std::size_t k = 0; k < n; ++k) {
        const double r = out.rho[k];
        if (!std::isfinite(r) || !(r > 0.0) || !(r < params.rho_star) || !std::isfinite(out.q1[k]) ||
            !std::isfinite(out.q2[k])) {
            std::ostringstream msg;
            msg << "explicit step blew up at cell " << k << " (rho = " << r << ")";
            throw SolverError(msg.str());
        }
    }
    out = relaxation_step(out, params);
    fill_report(res.report, out, params, pred.max_speed, options);
    return res;
}

}  // namespace soh
