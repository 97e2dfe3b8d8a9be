#pragma once

#include "soh/core.hpp"

namespace soh {

/// How the stiff pressure is divided into an explicit part p0 and an implicit part p1.
enum class SplitMode {
    /// p0 = p1 = eps*p/2 below rho* - delta, p0 continued by its quadratic Taylor polynomial above.
    split_half,
    /// p0 = kappa*rho^gamma (background pressure), p1 = eps*p.
    background,
};

/// Singular congestion pressure p(rho) = (1/rho - 1/rho*)^-gamma and its explicit/implicit split.
///
/// Immutable after construction. All "value" functions throw DomainError outside
/// their domain: the singular law needs 0 < rho < rho*, the background law only rho >= 0.
class PressureModel {
public:
    explicit PressureModel(const ModelParams& params);
    PressureModel(const ModelParams& params, SplitMode mode);

    const ModelParams& params() const noexcept { return params_; }
    SplitMode mode() const noexcept { return mode_; }
    /// Width of the quadratic matching zone, eps^(1/(gamma+2)).
    double delta() const noexcept { return delta_; }
    /// rho* - delta, where the quadratic continuation of p0 starts (split_half only).
    double matching_density() const noexcept { return rho_match_; }

    // Raw law.
    double p(double rho) const;
    double dp(double rho) const;
    double ddp(double rho) const;

    /// Full physical pressure: eps*p, plus kappa*rho^gamma in background mode.
    double p_eps(double rho) const;
    double dp_eps(double rho) const;

    double p_background(double rho) const;
    double dp_background(double rho) const;

    /// Explicit part; bounded on (0, rho*) uniformly in eps.
    double split_p0(double rho) const;
    double dp0(double rho) const;
    double ddp0(double rho) const;

    /// Implicit part, always evaluated as p_eps - p0 so that p0 + p1 == p_eps exactly.
    double split_p1(double rho) const;
    double dp1(double rho) const;

    /// Unique rho in (0, rho*) with split_p1(rho) == y.
    ///
    /// Safeguarded Newton: iterates that leave the current bracket are replaced by
    /// bisection steps. `guess` outside (0, rho*) means "no guess" (rho*/2 is used).
    /// Throws DomainError for y < 0 (negative pressure).
    double invert_p1(double y, double guess = -1.0) const;

private:
    void check_singular_domain(double rho) const;
    /// 1/rho - 1/rho* computed without cancellation near rho*.
    double gap(double rho) const noexcept { return (params_.rho_star - rho) / (rho * params_.rho_star); }
    double quadratic_p0(double rho) const noexcept;
    // Unchecked kernels for 0 < rho < rho*.
    double raw_p(double rho) const noexcept;
    double raw_dp(double rho) const noexcept;
    double raw_p0(double rho) const noexcept;
    double raw_p1(double rho) const noexcept;
    double raw_dp1(double rho) const noexcept;

    ModelParams params_;
    SplitMode mode_;
    double delta_ = 0.0;
    double rho_match_ = 0.0;
    // eps/2 * {p, p', p''} at rho_match_.
    double half_p_ = 0.0;
    double half_dp_ = 0.0;
    double half_ddp_ = 0.0;
    double p1_at_floor_ = 0.0;
};

}  // namespace soh
