#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "rmdyn/error.hpp"
#include "rmdyn/geometry.hpp"
#include "rmdyn/gue.hpp"
#include "rmdyn/stats.hpp"

using namespace rmdyn;

namespace {

double semicircle_cdf(double x, double radius) {
    if (x <= -radius) return 0.0;
    if (x >= radius) return 1.0;
    const double r2 = radius * radius;
    return 0.5 + (x * std::sqrt(r2 - x * x)) / (std::numbers::pi * r2) +
           std::asin(x / radius) / std::numbers::pi;
}

Eigen::VectorXcd random_unit(std::size_t n, Stream& s) {
    ComplexNormal cn;
    Eigen::VectorXcd u(static_cast<Eigen::Index>(n));
    for (auto& z : u) z = cn(s);
    return u.normalized();
}

}  // namespace

TEST(SampleGue, HermitianByConstruction) {
    Stream s = make_stream(7, 0);
    const auto H = sample_gue({16, 0.3, 7}, s);
    EXPECT_EQ((H - H.adjoint()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SampleGue, SemicircleLaw) {
    const std::size_t dim = 64, draws = 200;
    const double scale = 0.5;
    std::vector<double> eig;
    Stream s = make_stream(11, 0);
    for (std::size_t d = 0; d < draws; ++d) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sample_gue({dim, scale, 11}, s),
                                                           Eigen::EigenvaluesOnly);
        for (double e : es.eigenvalues()) eig.push_back(e);
    }
    std::sort(eig.begin(), eig.end());
    const double radius = 2.0 * scale * std::sqrt(static_cast<double>(dim));
    double worst = 0.0;
    for (int b = 1; b < 40; ++b) {
        const double x = -radius + 2.0 * radius * b / 40.0;
        const auto below = std::lower_bound(eig.begin(), eig.end(), x) - eig.begin();
        const double emp = static_cast<double>(below) / static_cast<double>(eig.size());
        worst = std::max(worst, std::abs(emp - semicircle_cdf(x, radius)));
    }
    EXPECT_LT(worst, 0.05);
}

TEST(SampleGue, EnsembleMeanVanishes) {
    const std::size_t dim = 6, draws = 10000;
    const double scale = 2.0;
    Stream s = make_stream(3, 0);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t d = 0; d < draws; ++d) sum += sample_gue({dim, scale, 3}, s);
    sum /= static_cast<double>(draws);
    EXPECT_LT(sum.cwiseAbs().maxCoeff(), 4.0 * scale / std::sqrt(static_cast<double>(draws)));
}

TEST(UnitaryStep, ZeroHamiltonianIsIdentity) {
    Stream s = make_stream(1, 0);
    const auto psi = random_unit(8, s);
    const auto out = unitary_step(psi, Eigen::MatrixXcd::Zero(8, 8), 0.7, 1.0);
    EXPECT_LT((out - psi).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(UnitaryStep, DiagonalPhases) {
    Stream s = make_stream(2, 0);
    const auto psi = random_unit(5, s);
    Eigen::VectorXd e(5);
    e << -1.0, 0.0, 0.5, 2.0, 3.5;
    const Eigen::MatrixXcd H = e.cast<cplx>().asDiagonal();
    const double dt = 0.3, hbar = 1.5;
    const auto out = unitary_step(psi, H, dt, hbar);
    for (Eigen::Index j = 0; j < 5; ++j) {
        const cplx expect = psi[j] * std::exp(cplx(0.0, -e[j] * dt / hbar));
        EXPECT_NEAR(std::abs(out[j] - expect), 0.0, 1e-13);
        EXPECT_NEAR(std::abs(out[j]), std::abs(psi[j]), 1e-14);
    }
}

TEST(UnitaryStep, RandomHamiltonianPreservesNorm) {
    Stream s = make_stream(4, 0);
    const auto psi = random_unit(32, s);
    const auto out = unitary_step(psi, sample_gue({32, 0.2, 4}, s), 1.0, 1.0);
    EXPECT_LT(std::abs(out.squaredNorm() - 1.0), 1e-12);
    EXPECT_GT(fs_distance_unit(psi, out), 0.0);
}

TEST(UnitaryStep, DimensionMismatchThrows) {
    EXPECT_THROW(unitary_step(Eigen::VectorXcd::Ones(3), Eigen::MatrixXcd::Zero(4, 4), 1.0, 1.0),
                 ConfigError);
}

TEST(RandomStepper, DenseAndTridiagonalAgreeInDistribution) {
    const std::size_t dim = 32, n = 3000;
    Stream s0 = make_stream(5, 0);
    const auto psi = random_unit(dim, s0);
    for (double scale : {0.01, 0.1, 0.5}) {
        WalkConfig dense_walk;
        dense_walk.propagator = Propagator::dense;
        WalkConfig tri_walk;
        tri_walk.propagator = Propagator::tridiagonal;
        const GUEConfig gue{dim, scale, 99};
        const auto a = single_step_distances(psi, dense_walk, gue, n, 0);
        const auto b = single_step_distances(psi, tri_walk, gue, n, n);
        EXPECT_LT(stats::ks_two_sample(a, b), stats::ks_critical(0.01, n, n)) << scale;
    }
}

TEST(RandomStepper, ZeroScaleFreezesState) {
    Stream s = make_stream(6, 0);
    auto u = random_unit(16, s);
    const auto before = u;
    RandomStepper stepper(16, 0.0, 1.0, 1.0, Propagator::tridiagonal);
    stepper.step(u, s);
    EXPECT_EQ((u - before).cwiseAbs().maxCoeff(), 0.0);
}

TEST(RandomStepper, SameStreamSameStep) {
    Stream s = make_stream(8, 0);
    const auto psi = random_unit(64, s);
    RandomStepper a(64, 0.05, 1.0, 1.0, Propagator::tridiagonal);
    RandomStepper b(64, 0.05, 1.0, 1.0, Propagator::tridiagonal);
    Stream sa = make_stream(8, 1), sb = make_stream(8, 1);
    auto ua = psi, ub = psi;
    a.step(ua, sa);
    b.step(ub, sb);
    EXPECT_EQ((ua - ub).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(ua.norm(), 1.0, 1e-12);
}

TEST(RunWalk, AlwaysStopHitsAfterOneStep) {
    Stream s = make_stream(9, 0);
    const auto psi = random_unit(16, s);
    WalkConfig walk;
    walk.max_steps = 50;
    const auto r = run_walk(psi, walk, {16, 0.1, 9}, [](const Eigen::VectorXcd&) { return true; }, s);
    EXPECT_TRUE(r.hit);
    EXPECT_EQ(r.steps_used, 1u);
}

TEST(RunWalk, NeverStopUsesAllSteps) {
    Stream s = make_stream(10, 0);
    const auto psi = random_unit(16, s);
    WalkConfig walk;
    walk.max_steps = 37;
    const auto r = run_walk(psi, walk, {16, 0.1, 10}, [](const Eigen::VectorXcd&) { return false; }, s);
    EXPECT_FALSE(r.hit);
    EXPECT_EQ(r.steps_used, 37u);
    EXPECT_NEAR(r.final_state.norm(), 1.0, 1e-12);
}

TEST(RunWalk, IncrementsAreUncorrelated) {
    const Grid1D grid(64, -8.0, 8.0);
    const auto psi = gaussian_packet({0.0, 0.0, 1.0}, grid, 1.0);
    WalkConfig walk;
    walk.max_steps = 4000;
    Stream s = make_stream(12, 0);
    const auto r = run_walk(psi, walk, {64, 1e-5, 12}, [](const Moments&) { return false; }, s, true);
    ASSERT_EQ(r.trace.size(), walk.max_steps);
    std::vector<double> d0, d1;
    for (std::size_t k = 2; k < r.trace.size(); ++k) {
        d0.push_back(r.trace[k - 1].mu - r.trace[k - 2].mu);
        d1.push_back(r.trace[k].mu - r.trace[k - 1].mu);
    }
    EXPECT_LT(std::abs(stats::pearson(d0, d1)), 4.0 / std::sqrt(static_cast<double>(d0.size())));
}

TEST(Calibration, DoublingDtHalvesScale) {
    const Grid1D grid(64, -8.0, 8.0);
    WalkConfig walk;
    walk.dz = 0.05;
    walk.dt = 1.0;
    const auto one = calibrate_scale(grid, 1.0, walk, 400, 21, CalibrationTarget::median_step);
    walk.dt = 2.0;
    const auto two = calibrate_scale(grid, 1.0, walk, 400, 21, CalibrationTarget::median_step);
    EXPECT_NEAR(two.scale / one.scale, 0.5, 0.05);
}

TEST(Calibration, MedianStepSelfConsistent) {
    const Grid1D grid(64, -8.0, 8.0);
    WalkConfig walk;
    walk.dz = 0.1;
    const auto cal = calibrate_scale(grid, 1.0, walk, 400, 22, CalibrationTarget::median_step);
    const double again = median_step_length(grid, 1.0, walk, cal.scale, 2000, 2222);
    EXPECT_GE(again, 0.95 * walk.dz);
    EXPECT_LE(again, 1.05 * walk.dz);
}

TEST(Calibration, RmsShiftSelfConsistent) {
    const Grid1D grid(64, -8.0, 8.0);
    WalkConfig walk;
    walk.dz = 1e-3;
    const auto cal = calibrate_scale(grid, 1.0, walk, 400, 23);
    const double again = projected_step_rms(grid, 1.0, walk, cal.scale, 2000, 2323);
    EXPECT_NEAR(again / walk.dz, 1.0, 0.05);
}

TEST(Calibration, ScaleShrinksWithDz) {
    const Grid1D grid(64, -8.0, 8.0);
    WalkConfig walk;
    double previous = std::numeric_limits<double>::infinity();
    for (double dz : {0.2, 0.1, 0.05, 0.01, 0.001}) {
        walk.dz = dz;
        const double s = calibrate_scale(grid, 1.0, walk, 200, 24).scale;
        EXPECT_LT(s, previous) << dz;
        EXPECT_GT(s, 0.0);
        previous = s;
    }
}

TEST(Calibration, RejectsBadInputs) {
    const Grid1D grid(64, -8.0, 8.0);
    WalkConfig walk;
    EXPECT_THROW(calibrate_scale(grid, 1.0, walk, 10, 1), CalibrationError);
    walk.dz = 0.0;
    EXPECT_THROW(calibrate_scale(grid, 1.0, walk, 400, 1), CalibrationError);
}

TEST(Isotropy, IdenticalStates) {
    Stream s = make_stream(30, 0);
    const auto psi = random_unit(48, s);
    const std::size_t n = 2000;
    EXPECT_LT(isotropy_statistic(psi, psi, WalkConfig{}, {48, 0.05, 30}, n),
              stats::ks_critical(0.01, n, n));
}

TEST(Isotropy, FixedUnitaryImage) {
    Stream s = make_stream(31, 0);
    const std::size_t dim = 48, n = 2000;
    const auto psi = random_unit(dim, s);
    Eigen::MatrixXcd m(dim, dim);
    ComplexNormal cn;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = cn(s);
    const Eigen::MatrixXcd U = Eigen::HouseholderQR<Eigen::MatrixXcd>(m).householderQ();
    EXPECT_LT(isotropy_statistic(psi, U * psi, WalkConfig{}, {dim, 0.05, 31}, n),
              stats::ks_critical(0.01, n, n));
}
