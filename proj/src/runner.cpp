#include "soh/runner.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "soh/snapshot.hpp"
#include "soh/twofluid.hpp"

namespace soh {

namespace fs = std::filesystem;

namespace {

int step_count(const ModelParams& p) {
    const double n = std::round(p.t_end / p.dt);
    if (n > 1e8) throw ConstraintError("t_end / dt is too large");
    return static_cast<int>(n);
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

constexpr const char* kColumns =
    "step\tt\tmass\tmass_drift\tmass_p\tmass_m\tmax_rho\tcongested_fraction\tx_shock\t"
    "drho_mean\tdrho_var\tdq1_mean\tdq1_var\tcorrelation\t"
    "newton_iterations\tinner_linear_iterations\tnewton_residual\tmax_char_speed\tcfl_explicit\tlattice_discrepancy";

struct Row {
    int step = 0;
    double t = 0.0;
    double mass = 0.0;
    double drift = 0.0;
    double mass_p = std::numeric_limits<double>::quiet_NaN();
    double mass_m = std::numeric_limits<double>::quiet_NaN();
    double max_rho = 0.0;
    double congested = 0.0;
    double x_shock = std::numeric_limits<double>::quiet_NaN();
    double drho_mean = std::numeric_limits<double>::quiet_NaN();
    double drho_var = std::numeric_limits<double>::quiet_NaN();
    double dq1_mean = std::numeric_limits<double>::quiet_NaN();
    double dq1_var = std::numeric_limits<double>::quiet_NaN();
    double corr = std::numeric_limits<double>::quiet_NaN();
    StepReport rep;
};

class Output {
public:
    Output(const RunConfig& cfg, const RunOptions& opt, const std::string& sub) : cfg_(cfg) {
        if (!opt.write_files) return;
        dir_ = (fs::path(resolve_output_dir(cfg, opt)) / sub).string();
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_ + ": " + ec.message());
        table_.open(fs::path(dir_) / "diagnostics.tsv", std::ios::trunc);
        if (!table_) throw IoError("cannot write diagnostics table in " + dir_);
        table_ << kColumns << '\n';
    }
    bool active() const { return !dir_.empty(); }
    const std::string& dir() const { return dir_; }

    void row(const Row& r) {
        if (!active()) return;
        table_ << r.step << '\t' << fmt(r.t) << '\t' << fmt(r.mass) << '\t' << fmt(r.drift) << '\t' << fmt(r.mass_p)
               << '\t' << fmt(r.mass_m) << '\t' << fmt(r.max_rho) << '\t' << fmt(r.congested) << '\t'
               << fmt(r.x_shock) << '\t' << fmt(r.drho_mean) << '\t' << fmt(r.drho_var) << '\t' << fmt(r.dq1_mean)
               << '\t' << fmt(r.dq1_var) << '\t' << fmt(r.corr) << '\t' << r.rep.newton_iterations << '\t'
               << r.rep.inner_linear_iterations << '\t' << fmt(r.rep.newton_residual) << '\t'
               << fmt(r.rep.max_char_speed) << '\t' << fmt(r.rep.cfl_explicit) << '\t'
               << fmt(r.rep.lattice_discrepancy) << '\n';
        if (!table_) throw IoError("write failed for diagnostics table");
    }

    bool snapshot_due(int step, int last) const {
        if (step == 0 || step == last) return true;
        return cfg_.snapshot_every > 0 && step % cfg_.snapshot_every == 0;
    }

    void snapshot(const Snapshot& s, int step) {
        if (!active()) return;
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%06d", step);
        const fs::path base = fs::path(dir_) / name;
        write_snapshot(s, base.string() + ".soh");
        write_text_mirror(s, base.string() + ".txt");
    }

private:
    const RunConfig& cfg_;
    std::string dir_;
    std::ofstream table_;
};

[[noreturn]] void abort_at(int step, const Error& e) {
    double res = 0.0;
    if (auto* se = dynamic_cast<const SolverError*>(&e)) res = se->last_residual();
    throw SolverError("step " + std::to_string(step) + ": " + e.what(), res);
}

void log_line(const RunOptions& opt, const std::string& s) {
    if (opt.log) *opt.log << s << '\n';
}

void warn_cfl(const RunOptions& opt, int step, double cfl, bool& warned) {
    if (cfl > 1.0 && !warned) {
        warned = true;
        log_line(opt, "warning: explicit CFL " + fmt(cfl) + " > 1 at step " + std::to_string(step));
    }
}

RunSummary run_single(const RunConfig& cfg, const RunOptions& opt) {
    const ModelParams& p = cfg.params;
    const PressureModel pressure(p);
    const bool riemann = cfg.scenario == Scenario::riemann;
    RiemannSpec spec;
    spec.jump_position = cfg.x0;
    FieldState s;
    if (riemann) {
        s = init_riemann(spec, riemann_grid(cfg.nx, cfg.ny, p.dx, p.dy));
    } else {
        s = init_collision(make_grid(cfg.nx, cfg.ny, p.dx, p.dy));
    }

    Output out(cfg, opt, scenario_name(cfg.scenario));
    RunSummary sum;
    sum.scenario = cfg.scenario;
    sum.output_dir = out.dir();
    sum.closed_domain = s.grid.periodic();
    const int last = step_count(p);
    const double m0 = total_mass(s.rho, s.grid);
    ShockTrack track;
    std::optional<double> shock;
    bool warned = false;

    auto observe = [&](int step, const StepReport& rep) {
        Row r;
        r.step = step;
        r.t = s.time;
        r.mass = total_mass(s.rho, s.grid);
        r.drift = r.mass / m0 - 1.0;
        r.max_rho = max_value(s.rho);
        r.congested = congested_fraction(s, p, cfg.congested_tol);
        r.rep = rep;
        if (riemann) {
            shock = track_shock(s, spec, shock);
            if (step > 0 && !track.exited()) track.record(s.time, shock);
            if (shock) r.x_shock = *shock;
        }
        sum.mass_drift = std::max(sum.mass_drift, std::abs(r.drift));
        sum.max_density = std::max(sum.max_density, r.max_rho);
        sum.max_cfl = std::max(sum.max_cfl, rep.cfl_explicit);
        sum.final_congested_fraction = r.congested;
        out.row(r);
        if (out.snapshot_due(step, last)) out.snapshot(make_snapshot(s, p), step);
    };

    observe(0, {});
    std::vector<double> warm;
    for (int n = 1; n <= last; ++n) {
        StepOptions so;
        so.congested_tol = cfg.congested_tol;
        so.warm_p1 = warm;
        StepResult res;
        try {
            res = ap_step(s, p, pressure, so);
        } catch (const Error& e) {
            abort_at(n, e);
        }
        warm = std::move(res.p1);
        s = std::move(res.state);
        warn_cfl(opt, n, res.report.cfl_explicit, warned);
        observe(n, res.report);
        if (opt.log && (n % 50 == 0 || n == last)) {
            std::ostringstream line;
            line << scenario_name(cfg.scenario) << " step " << n << "/" << last << " t=" << s.time
                 << " max_rho=" << max_value(s.rho) << " newton=" << res.report.newton_iterations;
            log_line(opt, line.str());
        }
    }
    sum.steps = last;
    sum.final_time = s.time;

    if (riemann && track.times().size() >= 2) {
        sum.shock_fit = track.fit(kShockFitStart);
        const double edge = sum.shock_fit->speed < 0.0 ? 0.0 : s.grid.nx * s.grid.dx;
        if (track.exited()) {
            sum.arrival_time = track.boundary_arrival_time();
            sum.arrival_observed = true;
        } else if (sum.shock_fit->speed != 0.0) {
            // Straight-line extrapolation to the boundary the shock moves towards.
            sum.arrival_time = (edge - sum.shock_fit->intercept) / sum.shock_fit->speed;
        }
        if (sum.arrival_time && *sum.arrival_time > 0.0)
            sum.shock_speed = (edge - spec.jump_position) / *sum.arrival_time;
    }
    return sum;
}

RunSummary run_crowd(const RunConfig& cfg, const RunOptions& opt) {
    const ModelParams& p = cfg.params;
    const PressureModel pressure(p);
    TwoFluidState s = init_crowd(make_grid(cfg.nx, cfg.ny, p.dx, p.dy), p.seed);

    Output out(cfg, opt, scenario_name(cfg.scenario));
    RunSummary sum;
    sum.scenario = cfg.scenario;
    sum.output_dir = out.dir();
    const int last = step_count(p);
    const double m0 = total_mass(s.total_density(), s.grid);
    const double mp0 = total_mass(s.rho_p, s.grid);
    const double mm0 = total_mass(s.rho_m, s.grid);
    bool warned = false;

    auto observe = [&](int step, const StepReport& rep) {
        const std::vector<double> total = s.total_density();
        const LaneDiagnostics lanes = lane_diagnostics(s);
        Row r;
        r.step = step;
        r.t = s.time;
        r.mass = total_mass(total, s.grid);
        r.drift = r.mass / m0 - 1.0;
        r.mass_p = total_mass(s.rho_p, s.grid);
        r.mass_m = total_mass(s.rho_m, s.grid);
        r.max_rho = max_value(total);
        r.congested = congested_fraction(total, p.rho_star, cfg.congested_tol);
        r.drho_mean = lanes.drho_stats.mean;
        r.drho_var = lanes.drho_stats.variance;
        r.dq1_mean = lanes.dq1_stats.mean;
        r.dq1_var = lanes.dq1_stats.variance;
        r.corr = lanes.correlation;
        r.rep = rep;
        sum.mass_drift = std::max(sum.mass_drift, std::abs(r.drift));
        sum.species_drift = std::max({sum.species_drift, std::abs(r.mass_p / mp0 - 1.0), std::abs(r.mass_m / mm0 - 1.0)});
        sum.max_density = std::max(sum.max_density, r.max_rho);
        sum.max_cfl = std::max(sum.max_cfl, rep.cfl_explicit);
        sum.final_congested_fraction = r.congested;
        sum.final_correlation = r.corr;
        out.row(r);
        if (out.snapshot_due(step, last)) out.snapshot(make_snapshot(s, p), step);
    };

    observe(0, {});
    for (int n = 1; n <= last; ++n) {
        StepOptions so;
        so.congested_tol = cfg.congested_tol;
        CrowdStepResult res;
        try {
            res = crowd_ap_step(s, p, pressure, so);
        } catch (const Error& e) {
            abort_at(n, e);
        }
        s = std::move(res.state);
        warn_cfl(opt, n, res.report.cfl_explicit, warned);
        observe(n, res.report);
        if (opt.log && (n % 50 == 0 || n == last))
            log_line(opt, "crowd step " + std::to_string(n) + "/" + std::to_string(last) + " t=" + fmt(s.time));
    }
    sum.steps = last;
    sum.final_time = s.time;
    return sum;
}

}  // namespace

std::string resolve_output_dir(const RunConfig& config, const RunOptions& options) {
    if (!options.output_dir.empty()) return options.output_dir;
    if (!config.output_dir.empty()) return config.output_dir;
    if (const char* env = std::getenv("SOH_OUTPUT_DIR"); env && *env) return env;
    return "output";
}

RunSummary run(const RunConfig& config, const RunOptions& options) {
    config.validate();
    switch (config.scenario) {
        case Scenario::riemann:
        case Scenario::collision:
            return run_single(config, options);
        case Scenario::crowd:
            return run_crowd(config, options);
        case Scenario::sweep:
            break;
    }
    throw ConstraintError("the sweep scenario runs through run_sweep");
}

SweepSummary run_sweep(const RunConfig& config, const RunOptions& options) {
    config.validate();
    if (config.scenario != Scenario::sweep) throw ConstraintError("run_sweep needs scenario = sweep");
    SweepSummary sum;
    sum.all_ap_stable = true;
    const int last = step_count(config.params);
    const Grid grid = make_grid(config.nx, config.ny, config.params.dx, config.params.dy);
    const FieldState init = init_collision(grid);

    for (double eps : config.epsilons) {
        ModelParams p = config.params;
        p.epsilon = eps;
        SweepEntry e;
        e.epsilon = eps;
        try {
            const PressureModel pressure(p);
            FieldState s = init;
            std::vector<double> warm;
            e.ap_stable = true;
            for (int n = 1; n <= last; ++n) {
                StepOptions so;
                so.warm_p1 = warm;
                StepResult r = ap_step(s, p, pressure, so);
                warm = std::move(r.p1);
                s = std::move(r.state);
                e.ap_steps = n;
                e.ap_max_density = std::max(e.ap_max_density, max_value(s.rho));
                e.ap_max_cfl = std::max(e.ap_max_cfl, r.report.cfl_explicit);
                if (!(max_value(s.rho) <= p.rho_star)) {
                    e.ap_stable = false;
                    e.ap_message = "max density above rho* at step " + std::to_string(n);
                    break;
                }
            }
            if (config.explicit_reference) {
                e.explicit_ran = true;
                e.explicit_stable = true;
                FieldState s2 = init;
                for (int n = 1; n <= last; ++n) {
                    try {
                        s2 = explicit_step(s2, p, pressure).state;
                    } catch (const SolverError&) {
                        e.explicit_stable = false;
                        e.explicit_blowup_step = n;
                        break;
                    }
                }
            }
        } catch (const Error& err) {
            e.ap_stable = false;
            e.ap_message = err.what();
        }
        sum.all_ap_stable = sum.all_ap_stable && e.ap_stable;
        sum.max_cfl = std::max(sum.max_cfl, e.ap_max_cfl);
        if (options.log) {
            std::ostringstream line;
            line << "eps=" << eps << " ap=" << (e.ap_stable ? "stable" : "unstable") << " max_rho=" << e.ap_max_density
                 << " cfl=" << e.ap_max_cfl;
            if (e.explicit_ran)
                line << " explicit=" << (e.explicit_stable ? "stable" : "blow-up at step " + std::to_string(e.explicit_blowup_step));
            log_line(options, line.str());
        }
        sum.entries.push_back(std::move(e));
    }

    if (options.write_files) {
        const fs::path dir = fs::path(resolve_output_dir(config, options)) / "sweep";
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
        std::ofstream f(dir / "sweep.tsv", std::ios::trunc);
        if (!f) throw IoError("cannot write " + (dir / "sweep.tsv").string());
        f << "epsilon\tap_verdict\tap_steps\tmax_rho\tmax_cfl\texplicit_verdict\texplicit_blowup_step\n";
        for (const SweepEntry& e : sum.entries) {
            f << fmt(e.epsilon) << '\t' << (e.ap_stable ? "stable" : "unstable") << '\t' << e.ap_steps << '\t'
              << fmt(e.ap_max_density) << '\t' << fmt(e.ap_max_cfl) << '\t'
              << (!e.explicit_ran ? "skipped" : e.explicit_stable ? "stable" : "unstable") << '\t'
              << e.explicit_blowup_step << '\n';
        }
        sum.output_dir = dir.string();
    }
    return sum;
}

}  // namespace soh
