#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rmdyn/grid.hpp"
#include "rmdyn/random.hpp"

namespace rmdyn {

/// Hermitian ensemble: diagonal N(0, scale^2), off-diagonal complex with
/// E|H_jk|^2 = scale^2 (real and imaginary parts N(0, scale^2/2)).
struct GUEConfig {
    std::size_t dim = 2;
    double scale = 1.0;
    std::uint64_t seed = 0;
};

/// How a walk step e^{-iH dt/hbar} psi is realized.
///  - dense: draw the full matrix and propagate by eigendecomposition.
///  - tridiagonal: draw the Krylov tridiagonal of H seen from psi (exact in
///    distribution for this ensemble), O(dim) per step.
enum class Propagator { dense, tridiagonal };

struct WalkConfig {
    double dt = 1.0;
    double dz = 0.1;
    std::size_t max_steps = 1000;
    double hbar = 1.0;
    Propagator propagator = Propagator::tridiagonal;

    /// Diffusion coefficient (dz)^2 / dt of the recorded classical walk.
    double diffusion() const noexcept { return dz * dz / dt; }
};

Eigen::MatrixXcd sample_gue(const GUEConfig& cfg, Stream& stream);

/// exp(-i H dt/hbar) psi via the eigendecomposition of H. Throws NumericalError.
Eigen::VectorXcd unitary_step(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& H, double dt,
                              double hbar);
WaveFunction unitary_step(const WaveFunction& psi, const Eigen::MatrixXcd& H, double dt,
                          double hbar);

/// Applies independent random steps in place to unit vectors.
class RandomStepper {
public:
    RandomStepper(std::size_t dim, double scale, double dt, double hbar, Propagator propagator);

    void step(Eigen::VectorXcd& u, Stream& stream);

    std::size_t dim() const noexcept { return dim_; }
    double scale() const noexcept { return scale_; }

private:
    void step_dense(Eigen::VectorXcd& u, Stream& stream);
    void step_tridiagonal(Eigen::VectorXcd& u, Stream& stream);

    std::size_t dim_;
    double scale_;
    double dt_;
    double hbar_;
    Propagator propagator_;
    Eigen::VectorXcd eta_;
    std::vector<double> diag_;
    std::vector<double> offdiag_;
    std::vector<double> bessel_;
    Eigen::VectorXd w_prev_, w_cur_, w_next_, c_re_, c_im_;
};

/// Unit-vector moments on a grid (the unit vector is amp * sqrt(dx)).
Moments unit_moments(const Grid1D& grid, const Eigen::VectorXcd& u);

using UnitPredicate = std::function<bool(const Eigen::VectorXcd&)>;

struct WalkResult {
    bool hit = false;
    std::size_t steps_used = 0;
    Eigen::VectorXcd final_state;
    std::vector<Moments> trace;       // one entry per step when a trace grid is given
    std::size_t renormalizations = 0; // steps whose norm drift exceeded 1e-12
};

/// Iterate random steps (fresh Hamiltonian each step), testing stop after each step.
WalkResult run_walk(const Eigen::VectorXcd& psi0, const WalkConfig& walk, const GUEConfig& gue,
                    const UnitPredicate& stop, Stream& stream,
                    const Grid1D* trace_grid = nullptr);

WalkResult run_walk(const WaveFunction& psi0, const WalkConfig& walk, const GUEConfig& gue,
                    const std::function<bool(const Moments&)>& stop, Stream& stream,
                    bool record_trace = false);

/// Root-mean-square one-step shift of mu_z from g_{center,sigma}, using
/// streams derive_seed(seed, i), i < trials.
double projected_step_rms(const Grid1D& grid, double sigma, const WalkConfig& walk, double scale,
                          std::size_t trials, std::uint64_t seed);

/// Median FS length 2 sigma rho of one step from g_{center,sigma}, same streams.
double median_step_length(const Grid1D& grid, double sigma, const WalkConfig& walk, double scale,
                          std::size_t trials, std::uint64_t seed);

/// Which one-step statistic calibrate_scale matches to dz.
///  - rms_shift: rms of the projected shift of mu_z (makes the recorded walk diffuse at dz^2/dt)
///  - median_step: median of the full FS step mapped to length by 2 sigma rho
enum class CalibrationTarget { rms_shift, median_step };

struct CalibrationResult {
    double scale = 0.0;
    double step = 0.0;  // measured statistic at the returned scale
    int iterations = 0;
};

/// Find the ensemble scale whose one-step statistic equals walk.dz (within 0.1%)
/// by log-bisection with common random numbers. Throws CalibrationError when
/// no bracket is found.
CalibrationResult calibrate_scale(const Grid1D& grid, double sigma, const WalkConfig& walk,
                                  std::size_t trials, std::uint64_t seed,
                                  CalibrationTarget target = CalibrationTarget::rms_shift);

/// FS length of one random step from u, for streams derive_seed(seed, offset + i).
std::vector<double> single_step_distances(const Eigen::VectorXcd& u, const WalkConfig& walk,
                                          const GUEConfig& gue, std::size_t trials,
                                          std::uint64_t stream_offset);

/// Two-sample KS statistic between one-step FS displacement samples from psi_a and psi_b.
double isotropy_statistic(const Eigen::VectorXcd& psi_a, const Eigen::VectorXcd& psi_b,
                          const WalkConfig& walk, const GUEConfig& gue, std::size_t trials);

}  // namespace rmdyn
