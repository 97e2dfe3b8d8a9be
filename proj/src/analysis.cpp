#include "soh/analysis.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace soh {

WaveDecomposition soh_char_speeds(const AngleState& s, const ModelParams& params, const PressureModel& pressure) {
    if (!(s.rho > 0.0)) throw DomainError("wave speeds need rho > 0");
    WaveDecomposition w;
    const double u = s.u();
    const double inf = std::numeric_limits<double>::infinity();
    if (s.rho >= params.rho_star) {
        w.saturated = true;
        w.lambda_bar = inf;
        w.discriminant = inf;
        w.xi_minus = -inf;
        w.xi_plus = inf;
        return w;
    }
    const double c = params.c;
    w.lambda_bar = params.lambda * pressure.dp_eps(s.rho) / s.rho;
    w.discriminant = (1.0 - c) * (1.0 - c) * u * u + 4.0 * s.rho * w.lambda_bar * (1.0 - u * u);
    if (!std::isfinite(w.discriminant)) {
        w.saturated = true;
        w.xi_minus = -inf;
        w.xi_plus = inf;
        return w;
    }
    const double root = std::sqrt(w.discriminant);
    w.xi_minus = 0.5 * ((1.0 + c) * u - root);
    w.xi_plus = 0.5 * ((1.0 + c) * u + root);
    // First row of (A - xi) v = 0: (u - xi) drho + rho du = 0.
    w.eig_minus = {s.rho, w.xi_minus - u};
    w.eig_plus = {s.rho, w.xi_plus - u};
    return w;
}

std::array<std::array<double, 2>, 2> matrix_A(const AngleState& s, const ModelParams& params,
                                              const PressureModel& pressure) {
    const double u = s.u();
    const double lambda_bar = params.lambda * pressure.dp_eps(s.rho) / s.rho;
    return {{{u, s.rho}, {lambda_bar * (1.0 - u * u), params.c * u}}};
}

double mach_number_from(double theta, double c, double lambda_dp, bool plus) {
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const double root = std::sqrt((c - 1.0) * (c - 1.0) * ct * ct + 4.0 * lambda_dp * st * st);
    const double cs = 0.5 * ((c - 1.0) * ct + (plus ? root : -root));
    if (cs == 0.0) throw DomainError("Mach number undefined: zero sound speed");
    return ct / cs;
}

double mach_number(const AngleState& s, const ModelParams& params, const PressureModel& pressure, bool plus) {
    return mach_number_from(s.theta, params.c, params.lambda * pressure.dp_eps(s.rho), plus);
}

ConservativeVars conservative_vars(const AngleState& s) {
    const double st = std::sin(s.theta);
    if (st == 0.0) throw DomainError("conservative form needs sin(theta) != 0");
    return {std::log(std::abs(std::tan(0.5 * s.theta))), std::log(std::abs(st))};
}

double g_of(double rho, const PressureModel& pressure) {
    const double rho_star = pressure.params().rho_star;
    if (!(rho > 0.0) || !(rho < rho_star)) throw DomainError("g needs 0 < rho < rho*");
    const double inv_star = 1.0 / rho_star;
    auto s_of = [&](double r) { return (rho_star - r) / (r * rho_star); };
    // dg = p_eps'(rho)/rho drho and drho = -rho^2 ds.
    auto integrand = [&](double s) {
        const double r = 1.0 / (s + inv_star);
        return -r * pressure.dp_eps(r);
    };
    const double s_ref = s_of(0.5 * rho_star);
    const double s = s_of(rho);
    if (s == s_ref) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, s_ref, s, 12, 1e-13, &err);
}

double shock_curve_residual(const AngleState& left, const AngleState& right, const ModelParams& params,
                            const PressureModel& pressure) {
    const ConservativeVars l = conservative_vars(left);
    const ConservativeVars r = conservative_vars(right);
    const double c = params.c;
    const double lam = params.lambda;
    const double lhs = (right.rho - left.rho) * (c * r.f2 - c * l.f2 - lam * g_of(right.rho, pressure) +
                                                 lam * g_of(left.rho, pressure));
    const double rhs = (right.rho * right.u() - left.rho * left.u()) * (r.f1 - l.f1);
    return lhs - rhs;
}

double rh_shock_speed(const AngleState& left, const AngleState& right) {
    if (right.rho == left.rho) throw DomainError("Rankine-Hugoniot speed needs distinct densities");
    return (right.rho * right.u() - left.rho * left.u()) / (right.rho - left.rho);
}

}  // namespace soh
