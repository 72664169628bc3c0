#include <complex>

#include <benchmark/benchmark.h>

#include "rmdyn/dynamics.hpp"
#include "rmdyn/geometry.hpp"
#include "rmdyn/gue.hpp"

using namespace rmdyn;

static void BM_SampleGue(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    Stream s = make_stream(1, 0);
    for (auto _ : state) benchmark::DoNotOptimize(sample_gue({dim, 0.1, 1}, s));
}
BENCHMARK(BM_SampleGue)->Arg(32)->Arg(128);

static void BM_DenseUnitaryStep(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    Stream s = make_stream(2, 0);
    const Eigen::MatrixXcd H = sample_gue({dim, 0.1, 2}, s);
    const Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(dim)).normalized();
    for (auto _ : state) benchmark::DoNotOptimize(unitary_step(psi, H, 1.0, 1.0));
}
BENCHMARK(BM_DenseUnitaryStep)->Arg(32)->Arg(128);

static void BM_TridiagonalStep(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    RandomStepper stepper(dim, 1e-3, 1.0, 1.0, Propagator::tridiagonal);
    Eigen::VectorXcd u = Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(dim)).normalized();
    Stream s = make_stream(3, 0);
    for (auto _ : state) {
        stepper.step(u, s);
        benchmark::DoNotOptimize(u.data());
    }
}
BENCHMARK(BM_TridiagonalStep)->Arg(128)->Arg(1024)->Arg(4096);

static void BM_SplitStep(benchmark::State& state) {
    const Grid1D grid(static_cast<std::size_t>(state.range(0)), -32.0, 32.0);
    const auto psi = gaussian_packet({0.0, 1.0, 1.0}, grid, 1.0);
    const auto V = PotentialSpec::harmonic(0.1);
    for (auto _ : state) benchmark::DoNotOptimize(split_step_propagate(psi, V, {}, 0.01, 10));
}
BENCHMARK(BM_SplitStep)->Arg(256)->Arg(1024);

static void BM_FsDistance(benchmark::State& state) {
    const Grid1D grid(static_cast<std::size_t>(state.range(0)), -16.0, 16.0);
    const auto a = gaussian_packet({0.0, 0.0, 1.0}, grid, 1.0);
    const auto b = gaussian_packet({1.0, 0.5, 1.0}, grid, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(fs_distance(a, b));
}
BENCHMARK(BM_FsDistance)->Arg(256)->Arg(4096);
BENCHMARK_MAIN();
