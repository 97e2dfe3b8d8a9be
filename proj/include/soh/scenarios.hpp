#pragma once

#include <optional>
#include <vector>

#include "soh/analysis.hpp"
#include "soh/core.hpp"

namespace soh {

struct RiemannSpec {
    AngleState left{0.8, 0.14};
    AngleState right{0.9969, 1.4502};
    double jump_position = 0.5;

    void validate() const;
};

/// Grid for the Riemann test: transmissive in x, periodic in y (ny = 1 gives the 1D fast path).
Grid riemann_grid(int nx, int ny, double dx, double dy);

/// Piecewise constant in x with q = rho (cos theta, sin theta); uniform in y.
FieldState init_riemann(const RiemannSpec& spec, const Grid& grid);

/// Two opposing clusters on A = [1/6,1/2]x[1/3,2/3] (Omega = +e_x) and
/// B = (1/2,5/6]x[1/3,2/3] (Omega = -e_x) at rho = 0.8, counterclockwise swirl at rho = 0.7 elsewhere.
/// Membership by cell centre.
FieldState init_collision(const Grid& grid);

/// Position where the first row crosses (rho_l + rho_r)/2, linearly interpolated.
/// Among several crossings the one nearest `previous` wins; nullopt means no crossing (shock exited).
std::optional<double> track_shock(const FieldState& state, const RiemannSpec& spec,
                                  std::optional<double> previous = std::nullopt);

struct ShockFit {
    double speed = 0.0;      ///< least-squares slope of x_shock(t)
    double intercept = 0.0;
    double rms_residual = 0.0;
};

/// Time series of tracked shock positions.
class ShockTrack {
public:
    /// Appends one sample; times must increase. An exited shock records the arrival time once.
    void record(double t, std::optional<double> x);

    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<double>& positions() const noexcept { return positions_; }
    std::optional<double> last_position() const;
    bool exited() const noexcept { return arrival_.has_value(); }
    /// First sample time at which no crossing was found.
    std::optional<double> boundary_arrival_time() const noexcept { return arrival_; }

    /// Least-squares fit over samples with t >= t_min; needs two of them.
    ShockFit fit(double t_min = 0.0) const;

private:
    std::vector<double> times_;
    std::vector<double> positions_;
    std::optional<double> arrival_;
    std::optional<double> last_time_;
};

/// Fraction of cells with rho >= rho* - tol; tol > 0.
double congested_fraction(const FieldState& state, const ModelParams& params, double tol);

}  // namespace soh
