#include "soh/pressure.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace soh {

namespace {

SplitMode mode_from(const ModelParams& params) {
    return params.use_background ? SplitMode::background : SplitMode::split_half;
}

// s^(-gamma - k); the default gamma = 2 avoids pow in the Newton inner loops.
double neg_power(double s, double gamma, int k) {
    if (gamma == 2.0) {
        const double inv = 1.0 / s;
        const double inv2 = inv * inv;
        switch (k) {
            case 0: return inv2;
            case 1: return inv2 * inv;
            default: return inv2 * inv2;
        }
    }
    return std::pow(s, -gamma - k);
}

}  // namespace

PressureModel::PressureModel(const ModelParams& params) : PressureModel(params, mode_from(params)) {}

PressureModel::PressureModel(const ModelParams& params, SplitMode mode) : params_(params), mode_(mode) {
    params_.validate();
    delta_ = std::pow(params_.epsilon, 1.0 / (params_.gamma + 2.0));
    rho_match_ = params_.rho_star - delta_;
    if (mode_ == SplitMode::split_half) {
        if (!(rho_match_ > 0.0)) {
            std::ostringstream msg;
            msg << "split_half needs eps^(1/(gamma+2)) < rho_star, got delta = " << delta_;
            throw ConfigError(msg.str());
        }
        const double half_eps = 0.5 * params_.epsilon;
        half_p_ = half_eps * p(rho_match_);
        half_dp_ = half_eps * dp(rho_match_);
        half_ddp_ = half_eps * ddp(rho_match_);
    }
    p1_at_floor_ = raw_p1(kDensityFloor);
}

void PressureModel::check_singular_domain(double rho) const {
    if (!(rho > 0.0) || !(rho < params_.rho_star)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "density " << rho << " outside (0, rho*) with rho* = " << params_.rho_star;
        throw DomainError(msg.str());
    }
}

double PressureModel::p(double rho) const {
    check_singular_domain(rho);
    return raw_p(rho);
}

double PressureModel::dp(double rho) const {
    check_singular_domain(rho);
    return raw_dp(rho);
}

double PressureModel::ddp(double rho) const {
    check_singular_domain(rho);
    const double g = params_.gamma;
    const double s = gap(rho);
    const double rho2 = rho * rho;
    return g * neg_power(s, g, 2) / (rho2 * rho2) * ((g + 1.0) - 2.0 * s * rho);
}

double PressureModel::raw_p(double rho) const noexcept { return neg_power(gap(rho), params_.gamma, 0); }

double PressureModel::raw_dp(double rho) const noexcept {
    return params_.gamma * neg_power(gap(rho), params_.gamma, 1) / (rho * rho);
}

double PressureModel::p_background(double rho) const {
    if (rho < 0.0) throw DomainError("background pressure needs rho >= 0");
    return params_.kappa == 0.0 ? 0.0 : params_.kappa * std::pow(rho, params_.gamma);
}

double PressureModel::dp_background(double rho) const {
    if (rho < 0.0) throw DomainError("background pressure needs rho >= 0");
    if (params_.kappa == 0.0) return 0.0;
    return params_.kappa * params_.gamma * std::pow(rho, params_.gamma - 1.0);
}

double PressureModel::p_eps(double rho) const {
    const double stiff = params_.epsilon * p(rho);
    return mode_ == SplitMode::background ? stiff + p_background(rho) : stiff;
}

double PressureModel::dp_eps(double rho) const {
    const double stiff = params_.epsilon * dp(rho);
    return mode_ == SplitMode::background ? stiff + dp_background(rho) : stiff;
}

double PressureModel::quadratic_p0(double rho) const noexcept {
    const double h = rho - rho_match_;
    return half_p_ + half_dp_ * h + 0.5 * half_ddp_ * h * h;
}

double PressureModel::split_p0(double rho) const {
    if (mode_ == SplitMode::background) return p_background(rho);
    check_singular_domain(rho);
    return raw_p0(rho);
}

double PressureModel::raw_p0(double rho) const noexcept {
    if (rho <= rho_match_) return 0.5 * params_.epsilon * raw_p(rho);
    return quadratic_p0(rho);
}

double PressureModel::dp0(double rho) const {
    if (mode_ == SplitMode::background) return dp_background(rho);
    check_singular_domain(rho);
    if (rho <= rho_match_) return 0.5 * params_.epsilon * raw_dp(rho);
    return half_dp_ + half_ddp_ * (rho - rho_match_);
}

double PressureModel::ddp0(double rho) const {
    if (mode_ == SplitMode::background) {
        if (rho < 0.0) throw DomainError("background pressure needs rho >= 0");
        const double g = params_.gamma;
        return params_.kappa == 0.0 ? 0.0 : params_.kappa * g * (g - 1.0) * std::pow(rho, g - 2.0);
    }
    check_singular_domain(rho);
    if (rho <= rho_match_) return 0.5 * params_.epsilon * ddp(rho);
    return half_ddp_;
}

double PressureModel::split_p1(double rho) const {
    check_singular_domain(rho);
    return raw_p1(rho);
}

double PressureModel::dp1(double rho) const {
    check_singular_domain(rho);
    return raw_dp1(rho);
}

double PressureModel::raw_p1(double rho) const noexcept {
    const double stiff = params_.epsilon * raw_p(rho);
    if (mode_ == SplitMode::background) return stiff;
    return stiff - raw_p0(rho);
}

double PressureModel::raw_dp1(double rho) const noexcept {
    const double stiff = params_.epsilon * raw_dp(rho);
    if (mode_ == SplitMode::background) return stiff;
    if (rho <= rho_match_) return stiff - 0.5 * params_.epsilon * raw_dp(rho);
    return stiff - (half_dp_ + half_ddp_ * (rho - rho_match_));
}

double PressureModel::invert_p1(double y, double guess) const {
    if (!(y >= 0.0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "negative implicit pressure " << y << " cannot be inverted";
        throw DomainError(msg.str());
    }
    if (y <= p1_at_floor_) return kDensityFloor;

    const double rho_star = params_.rho_star;
    double lo = kDensityFloor;
    double hi = rho_star;
    double x = (guess > lo && guess < hi) ? guess : 0.5 * rho_star;
    constexpr double eps = std::numeric_limits<double>::epsilon();

    for (int iter = 0; iter < 100; ++iter) {
        const double f = raw_p1(x) - y;
        if (f == 0.0) return x;
        if (f < 0.0) lo = x;
        else hi = x;

        const double step = f / raw_dp1(x);
        // Newton correction below round-off: done.
        if (std::abs(step) <= 4.0 * eps * x) return x;
        double next = x - step;
        if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
        x = next;
    }

    // Newton stalled: finish by bisection on the bracket.
    while (hi - lo > 1e-14 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (raw_p1(mid) < y) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace soh
