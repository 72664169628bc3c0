#include "rmdyn/suites.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rmdyn/dynamics.hpp"
#include "rmdyn/geometry.hpp"

namespace rmdyn {

bool SuiteResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const SuiteCheck& c) { return c.pass; });
}

ExperimentRecord SuiteResult::to_record() const {
    ExperimentRecord rec;
    rec.kind = name;
    rec.columns = {{"trial_index", true}, {"value", false}, {"tolerance", false}, {"pass", true}};
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto& c = checks[i];
        rec.rows.push_back({static_cast<double>(i), c.value, c.tolerance, c.pass ? 1.0 : 0.0});
        rec.set(c.name, c.value);
        rec.set(c.name + "_pass", c.pass);
    }
    rec.set("passed", passed());
    return rec;
}

SuiteResult geometry_suite(std::size_t n, double padding) {
    constexpr double sigma = 1.0, hbar = 1.0, max_sep = 4.0;
    const double half = 0.5 * max_sep + padding * sigma;
    const Grid1D grid(n, -half, half);
    SuiteResult out;
    out.name = "geometry_suite";

    double worst_pos = 0.0;
    for (int i = 0; i <= 16; ++i) {
        const double da = max_sep * i / 16.0;
        const GaussianParams a{-0.5 * da, 0.0, sigma}, b{0.5 * da, 0.0, sigma};
        worst_pos = std::max(worst_pos, metric_relation_residual(a, b, grid, hbar));
    }
    out.checks.push_back({"position_metric_residual", worst_pos, 1e-6, worst_pos < 1e-6});

    double worst_ps = 0.0;
    for (int i = 0; i <= 8; ++i)
        for (int j = 0; j <= 8; ++j) {
            const double da = max_sep * i / 8.0, dp = max_sep * j / 8.0 * hbar / sigma;
            const GaussianParams a{-0.5 * da, -0.5 * dp, sigma}, b{0.5 * da, 0.5 * dp, sigma};
            worst_ps = std::max(worst_ps, metric_relation_residual(a, b, grid, hbar));
        }
    out.checks.push_back({"phase_space_metric_residual", worst_ps, 1e-6, worst_ps < 1e-6});
    return out;
}

SuiteResult decomposition_suite() {
    const ParticleParams particle{1.0, 1.0};
    const double m = particle.mass, hb = particle.hbar;
    SuiteResult out;
    out.name = "decomposition_suite";

    double worst = 0.0;
    for (double sigma : {0.25, 0.5, 1.0, 2.0}) {
        for (double pk : {0.0, 2.0, 4.0}) {
            const double p = pk * hb / sigma;
            for (int kind = 0; kind < 3; ++kind) {
                PotentialSpec V;
                double a = 0.0;
                if (kind == 1) {
                    V = PotentialSpec::linear(hb * hb / (m * sigma * sigma * sigma));
                } else if (kind == 2) {
                    V = PotentialSpec::harmonic(hb * hb / (m * std::pow(sigma, 4)));
                    a = 32.0 * sigma;
                }
                const Grid1D grid(256, a - 16.0 * sigma, a + 16.0 * sigma);
                const GaussianParams gp{a, p, sigma};
                const WaveFunction psi = gaussian_packet(gp, grid, hb);
                const double speed2 = fs_velocity_norm2(psi, V, particle);
                const double terms = decomposition_terms(gp, V, particle).sum();
                worst = std::max(worst, std::abs(speed2 - terms) / speed2);
            }
        }
    }
    out.checks.push_back({"decomposition_relative_error", worst, 1e-3, worst < 1e-3});

    const Grid1D grid(256, -16.0, 16.0);
    const double free_point =
        fs_velocity_norm2(gaussian_packet({0.0, 0.0, 1.0}, grid, hb), PotentialSpec::free_space(), particle);
    const double err = std::abs(free_point - 1.0 / 32.0);
    out.checks.push_back({"free_spreading_abs_error", err, 1e-4, err < 1e-4});
    return out;
}

}  // namespace rmdyn
