#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmdyn/gue.hpp"

namespace rmdyn {

enum class ExperimentKind {
    born,
    half_prob,
    brownian,
    qct,
    double_slit,
    epr,
    zeno,
    product_form,
    geometry_suite,
    decomposition_suite,
};

const char* to_string(ExperimentKind kind) noexcept;

/// Every run parameter, with defaults resolved at parse time so that
/// parse(snapshot(cfg)) == cfg. Units are natural (hbar = m = 1 unless set).
struct RunConfig {
    // [experiment]
    ExperimentKind kind = ExperimentKind::born;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    std::size_t threads = 0;             // 0: RMDYN_THREADS or 1
    double mass = 1.0;
    std::vector<double> centers;         // lobe centers of the initial superposition
    std::vector<double> weights;         // lobe probabilities (normalized on use)
    double packet_a = 0.0;               // qct packet / double-slit midpoint
    double packet_p = 0.0;
    double packet_sigma = 1.0;
    std::size_t kick_every = 10;
    double substep_dt = 0.01;
    double horizon = 1.0;                // qct and zeno total time
    double t_obs = 100.0;                // half_prob observation time
    double screen_time = 10.0;
    double propagation_dt = 0.01;
    bool measure_at_slits = false;
    double slit_separation = 4.0;
    std::vector<double> kick_intervals;  // zeno
    std::vector<double> device_sigmas;   // product_form
    std::size_t n_records = 10;          // brownian records per chain
    double start = 0.0;                  // brownian start, zeno class center

    // [grid]  second factor (epr, product_form) in n_b, x_min_b, x_max_b
    std::size_t n = 256;
    double x_min = -32.0;
    double x_max = 32.0;
    std::size_t n_b = 64;
    double x_min_b = -16.0;
    double x_max_b = 16.0;

    // [walk]
    double dt = 1.0;
    double dz = 0.1;
    std::size_t max_steps = 1000;
    double hbar = 1.0;
    Propagator propagator = Propagator::tridiagonal;
    bool calibrate = true;
    CalibrationTarget calibration_target = CalibrationTarget::rms_shift;
    std::size_t calibration_trials = 400;

    // [gue]
    std::optional<double> scale;         // unset: calibrated from dz

    // [detector]
    double sigma = 1.0;
    double mu_tol = 0.0;                 // default dx
    double spacing = 6.0;                // default 6 sigma
    double anchor = 0.0;                 // default first center
    double sigma_b = 1.0;                // default sigma
    double sigma_b_alt = 0.5;            // default sigma_b / 2

    // [potential]
    std::string potential = "free";      // free | harmonic | linear
    double k = 0.0;
    double force = 0.0;
    double potential_center = 0.0;
    double quartic = 0.0;

    // [output]
    std::string out_dir = "out";
    bool plots = true;

    bool operator==(const RunConfig&) const = default;

    WalkConfig walk() const;
    /// Effective worker count: threads, else RMDYN_THREADS, else 1.
    std::size_t effective_threads() const;
};

/// Throws ParseError naming "section.key" and the line for unknown, missing,
/// malformed or out-of-range keys.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

/// Re-parseable text with every key and its resolved value (%.17g reals).
std::string snapshot(const RunConfig& cfg);

}  // namespace rmdyn
