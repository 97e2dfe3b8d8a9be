// soh: run the AP solver scenarios, sweep epsilon, inspect snapshots.
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "soh/config.hpp"
#include "soh/runner.hpp"
#include "soh/snapshot.hpp"

namespace {

enum Exit { ok = 0, config_error = 2, solver_abort = 3, io_error = 4 };

void print_run(const soh::RunSummary& s) {
    std::printf("scenario          %s\n", soh::scenario_name(s.scenario));
    std::printf("steps             %d\n", s.steps);
    std::printf("final time        %.6g\n", s.final_time);
    std::printf("mass drift        %.3e%s\n", s.mass_drift, s.closed_domain ? "" : " (open boundaries: in/outflow)");
    if (s.scenario == soh::Scenario::crowd) std::printf("species drift     %.3e\n", s.species_drift);
    std::printf("max density       %.12g\n", s.max_density);
    std::printf("max explicit CFL  %.4g\n", s.max_cfl);
    std::printf("congested frac    %.6g\n", s.final_congested_fraction);
    if (s.shock_speed) std::printf("shock speed       %.6g\n", *s.shock_speed);
    if (s.shock_fit) {
        std::printf("fitted speed      %.6g (rms %.2e)\n", s.shock_fit->speed, s.shock_fit->rms_residual);
        if (s.arrival_time)
            std::printf("boundary arrival  %.6g (%s)\n", *s.arrival_time, s.arrival_observed ? "observed" : "extrapolated");
    }
    if (s.scenario == soh::Scenario::crowd) std::printf("corr(Dq1, Drho)   %.6g\n", s.final_correlation);
    if (!s.output_dir.empty()) std::printf("output            %s\n", s.output_dir.c_str());
}

void print_sweep(const soh::SweepSummary& s) {
    std::printf("%-10s %-9s %-16s %-9s %s\n", "epsilon", "ap", "max_rho", "cfl", "explicit");
    for (const auto& e : s.entries) {
        std::string ex = !e.explicit_ran ? "skipped"
                         : e.explicit_stable ? "stable"
                                             : "blow-up at step " + std::to_string(e.explicit_blowup_step);
        std::printf("%-10.3g %-9s %-16.12g %-9.4g %s\n", e.epsilon, e.ap_stable ? "stable" : "unstable",
                    e.ap_max_density, e.ap_max_cfl, ex.c_str());
        if (!e.ap_message.empty()) std::printf("  %s\n", e.ap_message.c_str());
    }
    std::printf("verdict: %s, max explicit CFL %.4g\n", s.all_ap_stable ? "stable" : "unstable", s.max_cfl);
    if (!s.output_dir.empty()) std::printf("output: %s\n", s.output_dir.c_str());
}

void print_inspect(const soh::Snapshot& s) {
    const auto& g = s.grid;
    std::printf("kind      %s\n", s.kind == soh::SnapshotKind::single ? "single" : "two_fluid");
    std::printf("version   %u\n", soh::kSnapshotVersion);
    std::printf("grid      %d x %d, dx=%.6g dy=%.6g, x %s, y %s\n", g.nx, g.ny, g.dx, g.dy,
                g.bx == soh::Boundary::periodic ? "periodic" : "transmissive",
                g.by == soh::Boundary::periodic ? "periodic" : "transmissive");
    std::printf("time      %.17g\n", s.time);
    std::printf("digest    %016llx\n", static_cast<unsigned long long>(s.params_digest));
    std::printf("%-8s %-22s %-22s %-22s\n", "field", "min", "max", "mean");
    for (std::size_t f = 0; f < s.fields.size(); ++f) {
        const auto& v = s.fields[f];
        double sum = 0.0;
        for (double x : v) sum += x;
        std::printf("%-8s %-22.15g %-22.15g %-22.15g\n", s.names()[f].c_str(), soh::min_value(v), soh::max_value(v),
                    sum / static_cast<double>(v.size()));
    }
    if (s.kind == soh::SnapshotKind::single)
        std::printf("mass      %.17g\n", soh::total_mass(s.fields[0], g));
    else
        std::printf("mass      %.17g + %.17g\n", soh::total_mass(s.fields[0], g), soh::total_mass(s.fields[1], g));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymptotic-preserving solver for self-organized hydrodynamics with congestion"};
    app.require_subcommand(1);

    std::string config_path, output_dir, snapshot_path, epsilons;
    std::uint64_t seed = 0;
    int snapshot_every = 0;

    auto* run = app.add_subcommand("run", "run the scenario of a config file");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--output-dir", output_dir, "output root (default: SOH_OUTPUT_DIR or ./output)");
    auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
    auto* every_opt = run->add_option("--snapshot-every", snapshot_every, "snapshot interval in steps")
                          ->check(CLI::NonNegativeNumber);

    auto* sweep = app.add_subcommand("sweep", "epsilon sweep of the collision scenario");
    sweep->add_option("config", config_path, "config file")->required();
    auto* eps_opt = sweep->add_option("--epsilons", epsilons, "comma-separated epsilons");
    sweep->add_option("--output-dir", output_dir, "output root");

    auto* inspect = app.add_subcommand("inspect", "print a snapshot header and field statistics");
    inspect->add_option("snapshot", snapshot_path, "binary snapshot or text mirror")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*inspect) {
            const bool text = snapshot_path.size() > 4 && snapshot_path.substr(snapshot_path.size() - 4) == ".txt";
            print_inspect(text ? soh::read_text_mirror(snapshot_path) : soh::read_snapshot(snapshot_path));
            return ok;
        }
        soh::RunConfig cfg = soh::load_config(config_path);
        soh::RunOptions opt;
        opt.output_dir = output_dir;
        opt.log = &std::cerr;
        if (*run) {
            if (*seed_opt) cfg.params.seed = seed;
            if (*every_opt) cfg.snapshot_every = snapshot_every;
            if (cfg.scenario == soh::Scenario::sweep) {
                cfg.validate();
                print_sweep(soh::run_sweep(cfg, opt));
            } else {
                cfg.validate();
                print_run(soh::run(cfg, opt));
            }
        } else {
            if (cfg.scenario != soh::Scenario::sweep) {
                // Any base scenario can be swept; the collision setup is what gets run.
                soh::RunConfig base = soh::default_config(soh::Scenario::sweep);
                base.params = cfg.params;
                base.nx = cfg.nx;
                base.ny = cfg.ny;
                base.output_dir = cfg.output_dir;
                cfg = base;
            }
            if (*eps_opt) {
                std::ostringstream text;
                text << "scenario = sweep\nepsilons = " << epsilons << "\n";
                cfg.epsilons = soh::parse_config(text.str()).epsilons;
            }
            cfg.validate();
            print_sweep(soh::run_sweep(cfg, opt));
        }
        return ok;
    } catch (const soh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const soh::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return io_error;
    } catch (const soh::Error& e) {
        std::cerr << "solver abort: " << e.what() << '\n';
        return solver_abort;
    }
}
