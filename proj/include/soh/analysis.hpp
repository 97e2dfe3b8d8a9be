#pragma once

#include <array>

#include "soh/core.hpp"
#include "soh/pressure.hpp"

namespace soh {

/// Density and direction of Omega = (cos theta, sin theta) relative to the propagation axis.
struct AngleState {
    double rho = 0.0;
    double theta = 0.0;
    double u() const noexcept { return std::cos(theta); }
};

/// Linearized waves of the 1D SOH system in the variables (rho, u), u = cos(theta).
struct WaveDecomposition {
    double lambda_bar = 0.0;    ///< lambda * p_eps'(rho) / rho
    double discriminant = 0.0;  ///< (1-c)^2 u^2 + 4 rho lambda_bar (1 - u^2)
    double xi_minus = 0.0;
    double xi_plus = 0.0;
    /// Eigenvector directions (drho, du) = (rho, xi - u).
    Vec2 eig_minus;
    Vec2 eig_plus;
    /// rho >= rho*: the speeds are +-infinity and reported through this flag.
    bool saturated = false;

    /// du/drho along each wave; 0 for a contact discontinuity.
    double du_per_drho_minus() const noexcept { return eig_minus.y / eig_minus.x; }
    double du_per_drho_plus() const noexcept { return eig_plus.y / eig_plus.x; }
};

WaveDecomposition soh_char_speeds(const AngleState& s, const ModelParams& params, const PressureModel& pressure);

/// Coefficient matrix A of (rho, u)_t + A (rho, u)_x = 0, row-major.
std::array<std::array<double, 2>, 2> matrix_A(const AngleState& s, const ModelParams& params,
                                              const PressureModel& pressure);

/// Anisotropic Mach number cos(theta) / c_s, `plus` picks the + root of the sound speed.
double mach_number(const AngleState& s, const ModelParams& params, const PressureModel& pressure, bool plus = true);
/// Same with lambda * p_eps'(rho) given directly.
double mach_number_from(double theta, double c, double lambda_dp, bool plus = true);

/// f1 = ln|tan(theta/2)|, f2 = ln|sin(theta)|. DomainError when sin(theta) == 0.
struct ConservativeVars {
    double f1 = 0.0;
    double f2 = 0.0;
};
ConservativeVars conservative_vars(const AngleState& s);

/// g(rho) - g(rho*/2) with g' = p_eps'/rho, by adaptive Gauss-Kronrod in s = 1/rho - 1/rho*.
/// Only differences of g carry meaning.
double g_of(double rho, const PressureModel& pressure);

/// Shock-curve relation of the conservative form; zero iff `right` lies on a shock curve through `left`.
double shock_curve_residual(const AngleState& left, const AngleState& right, const ModelParams& params,
                            const PressureModel& pressure);

/// Rankine-Hugoniot speed of the mass equation, (rho_r cos_r - rho_l cos_l) / (rho_r - rho_l).
double rh_shock_speed(const AngleState& left, const AngleState& right);

}  // namespace soh
