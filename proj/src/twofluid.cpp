#include "soh/twofluid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace soh {

TwoFluidState::TwoFluidState(const Grid& g)
    : grid(g),
      rho_p(g.size(), 0.0), rho_m(g.size(), 0.0),
      qp1(g.size(), 0.0), qp2(g.size(), 0.0), qm1(g.size(), 0.0), qm2(g.size(), 0.0),
      wp1(g.size(), 0.0), wp2(g.size(), 0.0), wm1(g.size(), 0.0), wm2(g.size(), 0.0) {}

std::vector<double> TwoFluidState::total_density() const {
    std::vector<double> r(size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = rho_p[k] + rho_m[k];
    return r;
}

std::uint64_t SplitMix64::mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::at(std::uint64_t k) const { return mix(seed_ + (k + 1) * 0x9e3779b97f4a7c15ULL); }

double SplitMix64::uniform_at(std::uint64_t k) const { return static_cast<double>(at(k) >> 11) * 0x1.0p-53; }

void require_crowd_params(const ModelParams& params) {
    if (params.c != 1.0) {
        std::ostringstream msg;
        msg << "crowd model requires c = 1, got c = " << params.c;
        throw ConfigError(msg.str());
    }
}

TwoFluidState init_crowd(const Grid& grid, std::uint64_t seed) {
    constexpr int block = 5;
    if (grid.is_1d()) throw ConfigError("crowd scenario needs a 2D grid");
    if (grid.nx % block != 0 || grid.ny % block != 0) {
        std::ostringstream msg;
        msg << "crowd perturbation needs nx and ny divisible by " << block << ", got " << grid.nx << "x" << grid.ny;
        throw ConfigError(msg.str());
    }
    TwoFluidState s(grid);
    std::fill(s.rho_p.begin(), s.rho_p.end(), 0.4);
    std::fill(s.rho_m.begin(), s.rho_m.end(), 0.4);
    std::fill(s.wp1.begin(), s.wp1.end(), 1.0);
    std::fill(s.wm1.begin(), s.wm1.end(), -1.0);

    const SplitMix64 rng(seed);
    std::uint64_t draw = 0;
    auto inside = [](double v) { return v >= 1.0 / 3.0 && v <= 2.0 / 3.0; };
    for (int bj = 0; bj < grid.ny / block; ++bj) {
        const double yc = (bj * block + 0.5 * block) * grid.dy;
        if (!inside(yc)) continue;
        for (int bi = 0; bi < grid.nx / block; ++bi) {
            const double xc = (bi * block + 0.5 * block) * grid.dx;
            if (!inside(xc)) continue;
            const double r = -0.19 + 0.38 * rng.uniform_at(draw++);
            for (int j = bj * block; j < (bj + 1) * block; ++j) {
                for (int i = bi * block; i < (bi + 1) * block; ++i) {
                    const std::size_t k = grid.index(i, j);
                    s.rho_p[k] = 0.4 + r;
                    s.rho_m[k] = 0.8 - s.rho_p[k];
                }
            }
        }
    }
    return s;
}

namespace {

struct Species {
    std::span<const double> rho, q1, q2, w1, w2;
};

struct SpeciesOut {
    std::vector<double> rho, q1, q2, w1, w2;
};

// Conservative mass and desired-velocity update of one species from its new momentum.
// Face fluxes follow the Rusanov mass flux; w is upwinded with that flux.
void transport_species(const Grid& g, double dt, const Species& old, const MomentumPredictor& pred,
                       SpeciesOut& out) {
    const std::size_t n = g.size();
    out.rho.assign(old.rho.begin(), old.rho.end());
    std::vector<double> m1(n), m2(n);
    for (std::size_t k = 0; k < n; ++k) {
        m1[k] = old.rho[k] * old.w1[k];
        m2[k] = old.rho[k] * old.w2[k];
    }

    auto sweep = [&](bool along_x) {
        const double r = dt / (along_x ? g.dx : g.dy);
        const std::vector<double>& qn = along_x ? out.q1 : out.q2;
        const int nfaces = along_x ? g.nx + 1 : g.ny + 1;
        const int ncross = along_x ? g.ny : g.nx;
        std::vector<double> mass(static_cast<std::size_t>(nfaces)), f1(static_cast<std::size_t>(nfaces)),
            f2(static_cast<std::size_t>(nfaces));
        for (int c = 0; c < ncross; ++c) {
            for (int f = 0; f < nfaces; ++f) {
                const std::size_t l = along_x ? g.at(f - 1, c) : g.at(c, f - 1);
                const std::size_t rr = along_x ? g.at(f, c) : g.at(c, f);
                const double cf = along_x ? pred.cx[static_cast<std::size_t>(c) * static_cast<std::size_t>(g.nx + 1) +
                                                    static_cast<std::size_t>(f)]
                                          : pred.cy[static_cast<std::size_t>(f) * static_cast<std::size_t>(g.nx) +
                                                    static_cast<std::size_t>(c)];
                const double flux = 0.5 * (qn[l] + qn[rr]) - 0.5 * cf * (old.rho[rr] - old.rho[l]);
                const std::size_t up = flux >= 0.0 ? l : rr;
                mass[static_cast<std::size_t>(f)] = flux;
                f1[static_cast<std::size_t>(f)] = flux * old.w1[up];
                f2[static_cast<std::size_t>(f)] = flux * old.w2[up];
            }
            for (int a = 0; a + 1 < nfaces; ++a) {
                const std::size_t k = along_x ? g.index(a, c) : g.index(c, a);
                const std::size_t fa = static_cast<std::size_t>(a);
                out.rho[k] -= r * (mass[fa + 1] - mass[fa]);
                m1[k] -= r * (f1[fa + 1] - f1[fa]);
                m2[k] -= r * (f2[fa + 1] - f2[fa]);
            }
        }
    };
    sweep(true);
    if (!g.is_1d()) sweep(false);

    apply_density_floor(out.rho);
    out.w1.resize(n);
    out.w2.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        double a = m1[k] / out.rho[k];
        double b = m2[k] / out.rho[k];
        // Outflow beyond the cell content breaks the convex-combination bound; limit it back.
        const double len = std::hypot(a, b);
        if (len > 1.0) {
            a /= len;
            b /= len;
        }
        out.w1[k] = a;
        out.w2[k] = b;
    }
}

}  // namespace

CrowdStepResult twofluid_conservative_step(const TwoFluidState& state, const ModelParams& params,
                                           const PressureModel& pressure, const StepOptions& options) {
    require_crowd_params(params);
    const Grid& g = state.grid;
    const std::size_t n = g.size();
    const std::vector<double> rho = state.total_density();

    const MomentumPredictor pp = momentum_predictor(g, state.rho_p, state.qp1, state.qp2, rho, params, pressure);
    const MomentumPredictor pm = momentum_predictor(g, state.rho_m, state.qm1, state.qm2, rho, params, pressure);

    EllipticSystem sys;
    sys.grid = g;
    sys.pressure_factor = 2.0;
    sys.ax = 2.0 * params.dt * params.dt * params.lambda / (4.0 * g.dx * g.dx);
    sys.ay = g.is_1d() ? 0.0 : 2.0 * params.dt * params.dt * params.lambda / (4.0 * g.dy * g.dy);
    sys.rhs.assign(n, 0.0);
    accumulate_mass_rhs(g, params.dt, state.rho_p, pp, sys.rhs);
    accumulate_mass_rhs(g, params.dt, state.rho_m, pm, sys.rhs);

    std::vector<double> guess(n);
    for (std::size_t k = 0; k < n; ++k) guess[k] = pressure.split_p1(std::max(rho[k], kDensityFloor));
    const NewtonSolution sol = newton_elliptic(sys, pressure, guess, options.newton);
    const std::vector<double>& p = sol.p1;

    SpeciesOut sp, sm;
    sp.q1 = pp.phi1;
    sp.q2 = pp.phi2;
    sm.q1 = pm.phi1;
    sm.q2 = pm.phi2;
    const double gx = params.lambda * params.dt / (2.0 * g.dx);
    const double gy = params.lambda * params.dt / (2.0 * g.dy);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            const double grad_x = gx * (p[g.at(i + 1, j)] - p[g.at(i - 1, j)]);
            sp.q1[k] -= grad_x;
            sm.q1[k] -= grad_x;
            if (!g.is_1d()) {
                const double grad_y = gy * (p[g.at(i, j + 1)] - p[g.at(i, j - 1)]);
                sp.q2[k] -= grad_y;
                sm.q2[k] -= grad_y;
            }
        }
    }
    transport_species(g, params.dt, {state.rho_p, state.qp1, state.qp2, state.wp1, state.wp2}, pp, sp);
    transport_species(g, params.dt, {state.rho_m, state.qm1, state.qm2, state.wm1, state.wm2}, pm, sm);

    CrowdStepResult res;
    TwoFluidState& out = res.state;
    out.grid = g;
    out.time = state.time + params.dt;
    out.rho_p = std::move(sp.rho);
    out.qp1 = std::move(sp.q1);
    out.qp2 = std::move(sp.q2);
    out.wp1 = std::move(sp.w1);
    out.wp2 = std::move(sp.w2);
    out.rho_m = std::move(sm.rho);
    out.qm1 = std::move(sm.q1);
    out.qm2 = std::move(sm.q2);
    out.wm1 = std::move(sm.w1);
    out.wm2 = std::move(sm.w2);
    require_finite(out.qp1, "momentum q+");
    require_finite(out.qm1, "momentum q-");

    const std::vector<double> total = out.total_density();
    StepReport& rep = res.report;
    rep.newton_iterations = sol.iterations;
    rep.inner_linear_iterations = sol.linear_iterations;
    rep.newton_residual = sol.residual;
    rep.max_char_speed = std::max(pp.max_speed, pm.max_speed);
    rep.cfl_explicit = params.dt * rep.max_char_speed / (g.is_1d() ? g.dx : std::min(g.dx, g.dy));
    rep.congested_fraction = congested_fraction(total, params.rho_star, options.congested_tol);
    rep.lattice_discrepancy = lattice_discrepancy(g, total);
    return res;
}

TwoFluidState twofluid_relaxation_step(const TwoFluidState& state, const ModelParams& params) {
    TwoFluidState out = state;
    const double a = params.dt / params.beta;
    const double e = a > 700.0 ? 0.0 : std::exp(-a);
    for (std::size_t k = 0; k < out.size(); ++k) {
        auto relax = [&](double& q, double rho, double w) {
            const double target = rho * w;
            q = target + (q - target) * e;
        };
        relax(out.qp1[k], out.rho_p[k], out.wp1[k]);
        relax(out.qp2[k], out.rho_p[k], out.wp2[k]);
        relax(out.qm1[k], out.rho_m[k], out.wm1[k]);
        relax(out.qm2[k], out.rho_m[k], out.wm2[k]);
    }
    return out;
}

CrowdStepResult crowd_ap_step(const TwoFluidState& state, const ModelParams& params, const PressureModel& pressure,
                              const StepOptions& options) {
    CrowdStepResult res = twofluid_conservative_step(state, params, pressure, options);
    res.state = twofluid_relaxation_step(res.state, params);
    return res;
}

FieldStats field_stats(std::span<const double> v) {
    FieldStats s;
    if (v.empty()) return s;
    double sum = 0.0;
    s.min = v[0];
    s.max = v[0];
    for (double x : v) {
        sum += x;
        s.min = std::min(s.min, x);
        s.max = std::max(s.max, x);
    }
    s.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / static_cast<double>(v.size());
    return s;
}

double correlation(std::span<const double> a, std::span<const double> b) {
    const FieldStats sa = field_stats(a);
    const FieldStats sb = field_stats(b);
    if (sa.variance == 0.0 || sb.variance == 0.0) return 0.0;
    double cov = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) cov += (a[k] - sa.mean) * (b[k] - sb.mean);
    cov /= static_cast<double>(a.size());
    return cov / std::sqrt(sa.variance * sb.variance);
}

LaneDiagnostics lane_diagnostics(const TwoFluidState& state) {
    LaneDiagnostics d;
    const std::size_t n = state.size();
    d.drho.resize(n);
    d.dq1.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        d.drho[k] = state.rho_p[k] - state.rho_m[k];
        d.dq1[k] = state.qp1[k] + state.qm1[k];
    }
    d.drho_stats = field_stats(d.drho);
    d.dq1_stats = field_stats(d.dq1);
    d.correlation = correlation(d.dq1, d.drho);
    return d;
}

}  // namespace soh
