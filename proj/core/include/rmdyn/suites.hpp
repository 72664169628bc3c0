#pragma once

#include <string>
#include <vector>

#include "rmdyn/record.hpp"

namespace rmdyn {

struct SuiteCheck {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct SuiteResult {
    std::string name;
    std::vector<SuiteCheck> checks;

    bool passed() const;
    ExperimentRecord to_record() const;
};

/// Position and phase-space metric relations on a grid of n points with the
/// given padding (in widths) beyond the outermost packet:
///   position:    17 separations da/sigma in [0, 4]
///   phase space: 9 x 9 lattice of (da/sigma, dp sigma/hbar) in [0, 4]^2
/// Each check is the largest |cos^2 rho_grid - closed form| against 1e-6.
SuiteResult geometry_suite(std::size_t n = 256, double padding = 8.0);

/// FS speed from the energy variance against the three-term decomposition,
/// over sigma in {0.25, 0.5, 1, 2}, p in {0, 2, 4} hbar/sigma and free, linear
/// and harmonic potentials (harmonic packets sit 32 sigma from the minimum with
/// k = hbar^2/(m sigma^4), where the closed form is accurate to 3e-4).
SuiteResult decomposition_suite();

}  // namespace rmdyn
