#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "rmdyn/dynamics.hpp"
#include "rmdyn/error.hpp"

using namespace rmdyn;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST(SplitStep, FreePacketDrifts) {
    const Grid1D grid(1024, -40.0, 40.0);
    const double a = -5.0, p = 2.0, sigma = 1.0;
    const ParticleParams pp{1.0, 1.0};
    double worst = 0.0;
    split_step_propagate(gaussian_packet({a, p, sigma}, grid, 1.0), PotentialSpec::free_space(), pp,
                         0.01, 500, nullptr, [&](std::size_t k, const WaveFunction& psi) {
                             const double t = 0.01 * static_cast<double>(k);
                             worst = std::max(worst, std::abs(position_moments(psi).mu - (a + p * t)));
                         });
    EXPECT_LT(worst, 1e-4);
}

TEST(SplitStep, FreeSpreading) {
    const Grid1D grid(1024, -40.0, 40.0);
    const double sigma = 1.0;
    double worst = 0.0;
    split_step_propagate(gaussian_packet({0.0, 0.0, sigma}, grid, 1.0), PotentialSpec::free_space(),
                         {}, 0.01, 500, nullptr, [&](std::size_t k, const WaveFunction& psi) {
                             const double t = 0.01 * static_cast<double>(k);
                             const double expect = sigma * sigma + std::pow(t / (2.0 * sigma), 2);
                             worst = std::max(worst, std::abs(std::pow(position_moments(psi).delta, 2) - expect));
                         });
    EXPECT_LT(worst, 1e-4);
}

TEST(SplitStep, HarmonicCoherentState) {
    const Grid1D grid(512, -16.0, 16.0);
    const double k = 1.0, a = 2.0;
    const double sigma = std::sqrt(0.5);  // hbar / (2 m omega)
    const double dt = 0.005;
    double worst_mu = 0.0, worst_delta = 0.0;
    split_step_propagate(gaussian_packet({a, 0.0, sigma}, grid, 1.0), PotentialSpec::harmonic(k), {},
                         dt, 1257, nullptr, [&](std::size_t n, const WaveFunction& psi) {
                             const double t = dt * static_cast<double>(n);
                             const auto m = position_moments(psi);
                             worst_mu = std::max(worst_mu, std::abs(m.mu - a * std::cos(t)));
                             worst_delta = std::max(worst_delta, std::abs(m.delta - sigma));
                         });
    EXPECT_LT(worst_mu, 1e-4);
    EXPECT_LT(worst_delta, 1e-4);
}

TEST(SplitStep, NormConservedAndEdgesLogged) {
    const Grid1D grid(128, -8.0, 8.0);
    PropagationLog log;
    const auto out = split_step_propagate(gaussian_packet({0.0, 0.0, 0.5}, grid, 1.0),
                                          PotentialSpec::free_space(), {}, 0.05, 400, &log);
    EXPECT_NEAR(out.norm2(), 1.0, 1e-12);
    EXPECT_TRUE(log.boundary_contamination);

    PropagationLog quiet;
    split_step_propagate(gaussian_packet({0.0, 0.0, 1.0}, grid, 1.0), PotentialSpec::harmonic(1.0, 0.0),
                         {1.0, 1.0}, 0.05, 20, &quiet);
    EXPECT_FALSE(quiet.boundary_contamination);
}

TEST(Potential, TabulatedMatchesAnalytic) {
    const Grid1D grid(64, -4.0, 4.0);
    const auto h = PotentialSpec::harmonic(2.0, 0.5);
    const auto t = PotentialSpec::tabulated(grid, h.on_grid(grid));
    EXPECT_LT((t.on_grid(grid) - h.on_grid(grid)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(t.value(1.0), h.value(1.0), 1e-12);
    EXPECT_NEAR(h.gradient(1.5), 2.0, 1e-14);
    EXPECT_THROW(PotentialSpec::tabulated(grid, Eigen::VectorXd::Zero(5)), ConfigError);
    EXPECT_THROW(t.on_grid(Grid1D(64, -5.0, 5.0)), ConfigError);
}

TEST(FsVelocity, FreeRestingPacket) {
    const Grid1D grid(512, -16.0, 16.0);
    const double v2 = fs_velocity_norm2(gaussian_packet({0.0, 0.0, 1.0}, grid, 1.0),
                                        PotentialSpec::free_space(), {});
    EXPECT_NEAR(v2, 1.0 / 32.0, 1e-4);
}

TEST(FsVelocity, MovingPacket) {
    const Grid1D grid(512, -16.0, 16.0);
    const double sigma = 1.0, p = 1.5;
    const double expect = p * p / (4.0 * sigma * sigma) + 1.0 / (32.0 * std::pow(sigma, 4));
    const double v2 = fs_velocity_norm2(gaussian_packet({0.0, p, sigma}, grid, 1.0),
                                        PotentialSpec::free_space(), {});
    EXPECT_LT(std::abs(v2 - expect) / expect, 1e-3);
}

TEST(FsVelocity, LinearPotential) {
    const Grid1D grid(512, -16.0, 16.0);
    const double sigma = 0.7, force = 0.8;
    const double expect = force * force * sigma * sigma + 1.0 / (32.0 * std::pow(sigma, 4));
    const double v2 = fs_velocity_norm2(gaussian_packet({0.0, 0.0, sigma}, grid, 1.0),
                                        PotentialSpec::linear(force), {});
    EXPECT_LT(std::abs(v2 - expect) / expect, 1e-3);
}

TEST(Decomposition, RestingFreePacket) {
    const auto d = decomposition_terms({0.0, 0.0, 1.0}, PotentialSpec::free_space(), {});
    EXPECT_EQ(d.velocity, 0.0);
    EXPECT_EQ(d.acceleration, 0.0);
    EXPECT_DOUBLE_EQ(d.spreading, 1.0 / 32.0);
}

TEST(Decomposition, HarmonicAcceleration) {
    const double k = 0.3, a = 2.0, sigma = 0.5, m = 2.0;
    const auto d = decomposition_terms({a, 0.0, sigma}, PotentialSpec::harmonic(k), {m, 1.0});
    const double w = k * a / m;
    EXPECT_NEAR(d.acceleration, m * m * w * w * sigma * sigma, 1e-14);
}

TEST(Decomposition, SumMatchesGridSpeed) {
    const double sigma = 0.5;
    // Curvature adds k^2 sigma^4 / 2 and the kinetic cross term -k / 4; both are
    // below 1e-3 of the total once the gradient term k^2 a^2 sigma^2 dominates.
    const Grid1D grid(512, 8.0, 24.0);
    const PotentialSpec v = PotentialSpec::harmonic(1.0 / std::pow(sigma, 4));
    const GaussianParams gp{16.0, 1.0, sigma};
    const double grid_v2 = fs_velocity_norm2(gaussian_packet(gp, grid, 1.0), v, {});
    EXPECT_LT(std::abs(decomposition_terms(gp, v, {}).sum() - grid_v2) / grid_v2, 1e-3);
}

TEST(Leapfrog, FreeMotionExact) {
    const auto orbit = newton_trajectory({1.0, 0.5}, PotentialSpec::free_space(), {2.0, 1.0}, 0.1, 100);
    ASSERT_EQ(orbit.size(), 101u);
    for (std::size_t k = 0; k < orbit.size(); ++k)
        EXPECT_NEAR(orbit[k].a, 1.0 + 0.25 * 0.1 * static_cast<double>(k), 1e-12);
}

TEST(Leapfrog, LinearForceMomentum) {
    const double force = 0.7, dt = 0.01;
    const auto orbit = newton_trajectory({0.0, 0.2}, PotentialSpec::linear(force), {}, dt, 300);
    for (std::size_t k = 0; k < orbit.size(); ++k)
        EXPECT_NEAR(orbit[k].p, 0.2 + force * dt * static_cast<double>(k), 1e-12);
}

TEST(Leapfrog, HarmonicPeriod) {
    const double k = 4.0, m = 1.0, dt = 1e-4;
    const double period = 2.0 * kPi * std::sqrt(m / k);
    const auto orbit = newton_trajectory({1.0, 0.0}, PotentialSpec::harmonic(k), {m, 1.0}, dt,
                                         static_cast<std::size_t>(1.5 * period / dt));
    // Zero crossings of a, interpolated linearly; every second one is a period later.
    std::vector<double> crossings;
    for (std::size_t j = 1; j < orbit.size(); ++j) {
        if (orbit[j - 1].a < 0.0 && orbit[j].a >= 0.0) {
            const double f = -orbit[j - 1].a / (orbit[j].a - orbit[j - 1].a);
            crossings.push_back(dt * (static_cast<double>(j - 1) + f));
        }
        if (orbit[j - 1].a > 0.0 && orbit[j].a <= 0.0) {
            const double f = orbit[j - 1].a / (orbit[j - 1].a - orbit[j].a);
            crossings.push_back(dt * (static_cast<double>(j - 1) + f));
        }
    }
    ASSERT_GE(crossings.size(), 3u);
    EXPECT_NEAR((crossings[2] - crossings[0]) / period, 1.0, 1e-4);
}

TEST(Leapfrog, EnergyBounded) {
    const auto v = PotentialSpec::harmonic(1.0);
    const auto orbit = newton_trajectory({1.0, 0.0}, v, {}, 0.01, 100000);
    const double e0 = classical_energy(orbit.front(), v, {});
    double worst = 0.0;
    for (const auto& c : orbit) worst = std::max(worst, std::abs(classical_energy(c, v, {}) - e0));
    EXPECT_LT(worst / e0, 1e-4);
}

TEST(Ehrenfest, HarmonicOnePeriod) {
    const Grid1D grid(512, -16.0, 16.0);
    const double sigma = std::sqrt(0.5);
    const double dev = ehrenfest_deviation({2.0, 0.0, sigma}, grid, PotentialSpec::harmonic(1.0), {},
                                           2.0 * kPi, 0.001);
    EXPECT_LT(dev, 1e-3 * sigma);
}

TEST(Ehrenfest, FreeTenWidths) {
    const Grid1D grid(1024, -40.0, 40.0);
    const double dev = ehrenfest_deviation({-5.0, 1.0, 1.0}, grid, PotentialSpec::free_space(), {},
                                           10.0, 0.01);
    EXPECT_LT(dev, 1e-3);
}

TEST(Ehrenfest, QuarticBreakdownGrowsWithStrength) {
    const Grid1D grid(512, -16.0, 16.0);
    double previous = -1.0;
    for (double eps : {0.0, 1e-3, 1e-2}) {
        PotentialSpec v = PotentialSpec::harmonic(1.0);
        v.quartic = eps;
        const double dev = ehrenfest_deviation({2.0, 0.0, std::sqrt(0.5)}, grid, v, {}, 2.0 * kPi, 0.002);
        EXPECT_GT(dev, previous) << eps;
        previous = dev;
    }
}

TEST(Energy, HarmonicGroundState) {
    const Grid1D grid(256, -12.0, 12.0);
    const double e = energy_expectation(gaussian_packet({0.0, 0.0, std::sqrt(0.5)}, grid, 1.0),
                                        PotentialSpec::harmonic(1.0), {});
    EXPECT_NEAR(e, 0.5, 1e-10);
}
