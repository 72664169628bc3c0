#pragma once

#include <iosfwd>

#include "rmdyn/config.hpp"
#include "rmdyn/record.hpp"

namespace rmdyn {

/// Seed master used for calibration streams of a run with this master seed.
std::uint64_t calibration_seed(std::uint64_t master_seed) noexcept;

/// Ensemble scale for cfg: gue.scale when set, otherwise calibrated from walk.dz.
/// Throws ConfigError when neither is available, CalibrationError on failure.
CalibrationResult resolve_scale(const RunConfig& cfg);

/// Runs the configured experiment. The record carries the config snapshot.
ExperimentRecord run_experiment(const RunConfig& cfg);

/// Command-line entry point: run | validate | calibrate | suite.
/// Returns 0 on success, 1 on validation failure, 2 on runtime error.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace rmdyn
