#include "rmdyn/driver.hpp"

#include <cmath>
#include <iostream>

#include "CLI11.hpp"
#include "rmdyn/error.hpp"
#include "rmdyn/experiments.hpp"
#include "rmdyn/record_io.hpp"
#include "rmdyn/suites.hpp"

namespace rmdyn {

namespace {

WaveFunction superposition(const Grid1D& grid, const std::vector<double>& centers,
                           const std::vector<double>& weights, double sigma, double hbar) {
    std::vector<cplx> coeffs;
    std::vector<WaveFunction> states;
    for (std::size_t k = 0; k < centers.size(); ++k) {
        coeffs.emplace_back(std::sqrt(weights[k]), 0.0);
        states.push_back(gaussian_packet({centers[k], 0.0, sigma}, grid, hbar));
    }
    return normalize(superpose(coeffs, states));
}

PotentialSpec potential_of(const RunConfig& cfg) {
    PotentialSpec v;
    if (cfg.potential == "harmonic") v = PotentialSpec::harmonic(cfg.k, cfg.potential_center);
    else if (cfg.potential == "linear") v = PotentialSpec::linear(cfg.force);
    v.center = cfg.potential_center;
    v.quartic = cfg.quartic;
    return v;
}

double calibration_sigma(const RunConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::qct:
        case ExperimentKind::double_slit: return cfg.packet_sigma;
        default: return cfg.sigma;
    }
}

bool needs_walk(ExperimentKind k) {
    return k != ExperimentKind::geometry_suite && k != ExperimentKind::decomposition_suite;
}

}  // namespace

std::uint64_t calibration_seed(std::uint64_t master_seed) noexcept {
    return derive_seed(master_seed, 0xCA11B4A7EULL);
}

CalibrationResult resolve_scale(const RunConfig& cfg) {
    if (cfg.scale) return {*cfg.scale, std::nan(""), 0};
    if (!cfg.calibrate) throw ConfigError("gue.scale is required when walk.calibrate = false");
    const Grid1D grid(cfg.n, cfg.x_min, cfg.x_max);
    return calibrate_scale(grid, calibration_sigma(cfg), cfg.walk(), cfg.calibration_trials,
                           calibration_seed(cfg.seed), cfg.calibration_target);
}

ExperimentRecord run_experiment(const RunConfig& cfg) {
    ExperimentRecord rec;
    if (cfg.kind == ExperimentKind::geometry_suite) {
        rec = geometry_suite(cfg.n).to_record();
    } else if (cfg.kind == ExperimentKind::decomposition_suite) {
        rec = decomposition_suite().to_record();
    }
    if (!needs_walk(cfg.kind)) {
        rec.seed = cfg.seed;
        rec.config_snapshot = snapshot(cfg);
        return rec;
    }

    const Grid1D grid(cfg.n, cfg.x_min, cfg.x_max);
    const WalkConfig walk = cfg.walk();
    const CalibrationResult cal = resolve_scale(cfg);
    const GUEConfig gue{grid.size(), cal.scale, cfg.seed};
    const RunControl control{cfg.trials, cfg.effective_threads()};
    const ParticleParams particle{cfg.mass, cfg.hbar};

    switch (cfg.kind) {
        case ExperimentKind::born: {
            const auto psi0 = superposition(grid, cfg.centers, cfg.weights, cfg.sigma, cfg.hbar);
            const auto lattice = ClassLattice::covering(grid, cfg.anchor, cfg.spacing, cfg.sigma, cfg.mu_tol);
            rec = run_born_experiment(psi0, lattice, walk, gue, control);
            break;
        }
        case ExperimentKind::half_prob: {
            const auto psi0 = superposition(grid, cfg.centers, cfg.weights, cfg.sigma, cfg.hbar);
            rec = run_half_probability(psi0, cfg.sigma, walk, gue, control, cfg.t_obs);
            break;
        }
        case ExperimentKind::brownian: {
            const auto lattice = ClassLattice::covering(grid, cfg.start, cfg.spacing, cfg.sigma, cfg.mu_tol);
            rec = run_constrained_brownian(grid, cfg.start, lattice, walk, gue, control, cfg.n_records);
            break;
        }
        case ExperimentKind::qct: {
            QctSetup setup;
            setup.packet = {cfg.packet_a, cfg.packet_p, cfg.packet_sigma};
            setup.potential = potential_of(cfg);
            setup.particle = particle;
            setup.substep_dt = cfg.substep_dt;
            setup.kick_every = cfg.kick_every;
            setup.horizon = cfg.horizon;
            const auto lattice = ClassLattice::covering(grid, cfg.anchor, cfg.spacing, cfg.sigma, cfg.mu_tol);
            rec = run_qct(grid, setup, lattice, walk, gue, control);
            break;
        }
        case ExperimentKind::double_slit: {
            DoubleSlitSetup setup;
            const double h = 0.5 * cfg.slit_separation;
            setup.slit_a = {cfg.packet_a - h, cfg.packet_p, cfg.packet_sigma};
            setup.slit_b = {cfg.packet_a + h, cfg.packet_p, cfg.packet_sigma};
            setup.particle = particle;
            setup.screen_time = cfg.screen_time;
            setup.propagation_dt = cfg.propagation_dt;
            setup.measure_at_slits = cfg.measure_at_slits;
            const ClassLattice slits({cfg.packet_a - h, cfg.packet_a + h}, cfg.packet_sigma, cfg.mu_tol);
            const auto screen = ClassLattice::covering(grid, cfg.anchor, cfg.spacing, cfg.sigma, cfg.mu_tol);
            rec = run_double_slit(grid, setup, slits, screen, walk, gue, control);
            break;
        }
        case ExperimentKind::epr: {
            const Grid1D gb(cfg.n_b, cfg.x_min_b, cfg.x_max_b);
            Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.size()),
                                                          static_cast<Eigen::Index>(gb.size()));
            for (std::size_t k = 0; k < cfg.centers.size(); ++k) {
                const auto a = gaussian_packet({cfg.centers[k], 0.0, cfg.sigma}, grid, cfg.hbar);
                const auto b = gaussian_packet({cfg.centers[k], 0.0, cfg.sigma_b}, gb, cfg.hbar);
                amp += std::sqrt(cfg.weights[k]) * a.amp() * b.amp().transpose();
            }
            const WaveFunction2 psi0 = normalize(WaveFunction2(grid, gb, amp));
            const auto la = ClassLattice::covering(grid, cfg.anchor, cfg.spacing, cfg.sigma, cfg.mu_tol);
            const auto lb = ClassLattice::covering(gb, cfg.anchor, cfg.spacing, cfg.sigma_b, cfg.mu_tol);
            const auto lb_alt = ClassLattice::covering(gb, cfg.anchor, cfg.spacing, cfg.sigma_b_alt, cfg.mu_tol);
            rec = run_epr(psi0, la, lb, lb_alt, walk, gue, control);
            break;
        }
        case ExperimentKind::zeno: {
            const EquivalenceClassSpec cls{cfg.start, cfg.sigma, cfg.mu_tol};
            rec = run_zeno(grid, cls, walk, gue, control, cfg.kick_intervals, cfg.horizon);
            break;
        }
        case ExperimentKind::product_form: {
            const auto phi0 = superposition(grid, cfg.centers, cfg.weights, cfg.sigma, cfg.hbar);
            const Grid1D gb(cfg.n_b, cfg.x_min_b, cfg.x_max_b);
            rec = run_device_product_form(phi0, gb, cfg.device_sigmas, walk, gue, control);
            break;
        }
        default: break;
    }
    rec.seed = cfg.seed;
    rec.config_snapshot = snapshot(cfg);
    rec.set("calibrated", !cfg.scale.has_value());
    if (!cfg.scale) {
        rec.set("calibration_step", cal.step);
        rec.set("calibration_iterations", static_cast<std::int64_t>(cal.iterations));
    }
    return rec;
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Random-Hamiltonian measurement dynamics simulator", "rmdyn"};
    app.require_subcommand(1);

    std::string config_path, out_dir, suite_name;
    std::uint64_t seed = 0;
    std::size_t trials = 0, threads = 0;

    auto* run = app.add_subcommand("run", "run the configured experiment");
    run->add_option("--config", config_path, "config file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "master seed (overrides config)");
    auto* trials_opt = run->add_option("--trials", trials, "trial count (overrides config)");
    auto* out_opt = run->add_option("--out", out_dir, "output directory (overrides config)");
    auto* threads_opt = run->add_option("--threads", threads, "worker threads (default RMDYN_THREADS or 1)");

    auto* validate = app.add_subcommand("validate", "parse and validate a config");
    validate->add_option("--config", config_path, "config file")->required();

    auto* calibrate = app.add_subcommand("calibrate", "calibrate the ensemble scale and print it");
    calibrate->add_option("--config", config_path, "config file")->required();

    auto* suite = app.add_subcommand("suite", "run a deterministic invariant suite");
    suite->add_option("name", suite_name, "geometry | decomposition")
        ->required()
        ->check(CLI::IsMember({"geometry", "decomposition"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    RunConfig cfg;
    if (!suite->parsed()) {
        try {
            cfg = parse_config(config_path);
        } catch (const ParseError& e) {
            err << "config error: " << e.what() << "\n";
            return 1;
        }
    }
    if (validate->parsed()) {
        out << "ok: " << to_string(cfg.kind) << "\n";
        return 0;
    }

    try {
        if (suite->parsed()) {
            const SuiteResult r = suite_name == "geometry" ? geometry_suite() : decomposition_suite();
            for (const auto& c : r.checks)
                out << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value
                    << " tolerance=" << c.tolerance << "\n";
            return r.passed() ? 0 : 1;
        }
        if (calibrate->parsed()) {
            const CalibrationResult c = resolve_scale(cfg);
            out.precision(17);
            out << c.scale << "\n";
            return 0;
        }
        if (*seed_opt) cfg.seed = seed;
        if (*trials_opt) {
            if (trials < 1) {
                err << "--trials must be at least 1\n";
                return 1;
            }
            cfg.trials = trials;
        }
        if (*out_opt) cfg.out_dir = out_dir;
        if (*threads_opt) cfg.threads = threads;
        const ExperimentRecord rec = run_experiment(cfg);
        write_record(rec, cfg.out_dir);
        if (cfg.plots) {
            try {
                emit_plots(rec, cfg.out_dir);
            } catch (const std::exception& e) {
                err << "plot skipped: " << e.what() << "\n";
            }
        }
        out << rec.kind << " -> " << cfg.out_dir << "\n";
        for (const auto& note : rec.notes) out << "  note: " << note << "\n";
        return 0;
    } catch (const ParseError& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace rmdyn
