#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "rmdyn/error.hpp"
#include "rmdyn/geometry.hpp"
#include "rmdyn/grid.hpp"

using namespace rmdyn;

namespace {

WaveFunction packet(const Grid1D& g, double a, double sigma, double p = 0.0) {
    return gaussian_packet({a, p, sigma}, g, 1.0);
}

// Midpoint quadrature of the first two density moments, written out directly.
Moments brute_moments(const WaveFunction& psi) {
    const Grid1D& g = psi.grid();
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double w = std::norm(psi.amp()[static_cast<Eigen::Index>(j)]) * g.dx();
        m0 += w;
        m1 += w * g.x(j);
        m2 += w * g.x(j) * g.x(j);
    }
    const double mu = m1 / m0;
    return {mu, std::sqrt(m2 / m0 - mu * mu)};
}

}  // namespace

TEST(Grid, RejectsNonPowerOfTwo) {
    EXPECT_THROW(Grid1D(100, -1.0, 1.0), ConfigError);
    EXPECT_THROW(Grid1D(64, 1.0, -1.0), ConfigError);
    EXPECT_NO_THROW(Grid1D(64, -1.0, 1.0));
}

TEST(Grid, WavenumbersFoldIntoNyquistBand) {
    const Grid1D g(16, -4.0, 4.0);
    const double kmax = std::numbers::pi / g.dx();
    for (std::size_t j = 0; j < g.size(); ++j) {
        EXPECT_GE(g.wavenumber(j), -kmax - 1e-12);
        EXPECT_LT(g.wavenumber(j), kmax);
    }
    EXPECT_DOUBLE_EQ(g.wavenumber(1), 2.0 * std::numbers::pi / g.length());
}

TEST(Inner, NormalizedSelfOverlapIsOne) {
    const Grid1D g(256, -16.0, 16.0);
    const auto phi = packet(g, 0.3, 1.1, 0.7);
    const cplx z = inner(phi, phi);
    EXPECT_NEAR(z.real(), 1.0, 1e-10);
    EXPECT_NEAR(z.imag(), 0.0, 1e-10);
}

TEST(Inner, DisplacedGaussiansOverlap) {
    const Grid1D g(256, -16.0, 16.0);
    const cplx z = inner(packet(g, 0.0, 1.0), packet(g, 2.0, 1.0));
    EXPECT_NEAR(z.real(), std::exp(-0.5), 1e-10);
    EXPECT_NEAR(z.imag(), 0.0, 1e-12);
    EXPECT_NEAR(std::exp(-0.5), 0.60653, 1e-5);
}

TEST(Inner, DistinctSineModesAreOrthogonal) {
    const Grid1D g(128, 0.0, 1.0);
    Eigen::VectorXcd a(128), b(128);
    for (std::size_t j = 0; j < 128; ++j) {
        const double x = g.x(j);
        a[static_cast<Eigen::Index>(j)] = std::sin(2.0 * std::numbers::pi * 3.0 * x);
        b[static_cast<Eigen::Index>(j)] = std::sin(2.0 * std::numbers::pi * 5.0 * x);
    }
    EXPECT_NEAR(std::abs(inner(WaveFunction(g, a), WaveFunction(g, b))), 0.0, 1e-10);
}

TEST(Inner, GridMismatchThrows) {
    const Grid1D g1(64, -8.0, 8.0), g2(64, -9.0, 9.0);
    EXPECT_THROW(inner(packet(g1, 0, 1), packet(g2, 0, 1)), ConfigError);
}

TEST(Normalize, ScalingAndPhase) {
    const Grid1D g(128, -10.0, 10.0);
    const auto phi = packet(g, 0.5, 1.0, 1.0);
    const auto twice = normalize(WaveFunction(g, 2.0 * phi.amp()));
    EXPECT_LT((twice.amp() - phi.amp()).cwiseAbs().maxCoeff(), 1e-12);

    const cplx phase = std::polar(1.0, 0.9);
    const auto rotated = normalize(WaveFunction(g, phase * phi.amp()));
    EXPECT_LT((rotated.amp() - phase * phi.amp()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Normalize, SumOfPackets) {
    const Grid1D g(256, -16.0, 16.0);
    const auto sum = superpose({1.0, 1.0}, {packet(g, 0.0, 1.0), packet(g, 5.0, 1.0)});
    EXPECT_NEAR(normalize(sum).norm2(), 1.0, 1e-10);
}

TEST(Normalize, ZeroStateThrows) {
    const Grid1D g(64, -8.0, 8.0);
    EXPECT_THROW(normalize(WaveFunction(g, Eigen::VectorXcd::Zero(64))), DegenerateStateError);
}

TEST(Moments, GaussianPacket) {
    const Grid1D g(512, -16.0, 16.0);
    const auto m = position_moments(packet(g, 1.5, 0.5));
    EXPECT_NEAR(m.mu, 1.5, 1e-6);
    EXPECT_NEAR(m.delta, 0.5, 1e-6);
}

TEST(Moments, SymmetricTwoLobe) {
    const Grid1D g(512, -16.0, 16.0);
    const auto psi = normalize(superpose({1.0, 1.0}, {packet(g, -2.0, 0.5), packet(g, 2.0, 0.5)}));
    const auto m = position_moments(psi);
    const auto brute = brute_moments(psi);
    EXPECT_NEAR(m.mu, 0.0, 1e-12);
    // Lobe overlap e^{-8} shifts the second moment: (4 + s^2 + ov s^2) / (1 + ov).
    const double ov = std::exp(-8.0);
    EXPECT_NEAR(m.delta, std::sqrt((4.25 + 0.25 * ov) / (1.0 + ov)), 1e-9);
    EXPECT_NEAR(m.delta, 2.062, 1e-3);
    EXPECT_NEAR(m.delta, brute.delta, 1e-12);
}

TEST(Momentum, PlaneWaveShift) {
    const Grid1D g(512, -16.0, 16.0);
    EXPECT_NEAR(momentum_expectation(packet(g, 0.0, 1.0, 3.0), 1.0), 3.0, 1e-6);
    EXPECT_NEAR(momentum_expectation(packet(g, 0.0, 1.0, -3.0), 1.0), -3.0, 1e-6);
    EXPECT_NEAR(momentum_expectation(packet(g, 0.4, 0.8), 1.0), 0.0, 1e-12);
}

TEST(Momentum, DensityIntegratesToNorm) {
    const Grid1D g(256, -16.0, 16.0);
    const auto psi = packet(g, 1.0, 0.7, 2.0);
    const double dk = 2.0 * std::numbers::pi / g.length();
    EXPECT_NEAR(momentum_density(psi).sum() * dk, 1.0, 1e-10);
}

TEST(Tensor, ProductNormAndMoments) {
    const Grid1D ga(256, -16.0, 16.0), gb(256, -16.0, 16.0);
    const auto phi = packet(ga, 0.0, 1.0), psi = packet(gb, 1.0, 2.0);
    const auto t = tensor(phi, psi);
    EXPECT_NEAR(t.norm2(), 1.0, 1e-10);

    const auto ma = density_moments(ga, marginal(t, Axis::first));
    const auto mb = density_moments(gb, marginal(t, Axis::second));
    EXPECT_NEAR(ma.mu, 0.0, 1e-6);
    EXPECT_NEAR(ma.delta, 1.0, 1e-6);
    EXPECT_NEAR(mb.mu, 1.0, 1e-6);
    EXPECT_NEAR(mb.delta, 2.0, 1e-6);

    const Eigen::VectorXd first = marginal(t, Axis::first);
    EXPECT_LT((first - phi.density()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(first.sum() * ga.dx(), 1.0, 1e-10);
}

TEST(Marginal, EntangledPairIsBimodal) {
    const Grid1D g(128, -8.0, 8.0);
    const auto lo = packet(g, -1.0, 0.25), hi = packet(g, 1.0, 0.25);
    const auto ll = tensor(lo, lo), hh = tensor(hi, hi);
    const auto psi = normalize(WaveFunction2(g, g, ll.amp() + hh.amp()));
    const Eigen::VectorXd m = marginal(psi, Axis::first);
    double left = 0.0, right = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        (g.x(j) < 0.0 ? left : right) += m[static_cast<Eigen::Index>(j)] * g.dx();
    EXPECT_NEAR(left, 0.5, 1e-3);
    EXPECT_NEAR(right, 0.5, 1e-3);

    const Eigen::VectorXd s = schmidt_coefficients(psi);
    // Non-orthogonal branches with overlap o: lambda = (1 +- o) / sqrt(2 (1 + o^2)).
    const double o = std::exp(-8.0);
    EXPECT_NEAR(s[0], (1.0 + o) / std::sqrt(2.0 * (1.0 + o * o)), 1e-9);
    EXPECT_NEAR(s[1], (1.0 - o) / std::sqrt(2.0 * (1.0 + o * o)), 1e-9);
}
