#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rmdyn/dynamics.hpp"
#include "rmdyn/geometry.hpp"
#include "rmdyn/grid.hpp"
#include "rmdyn/gue.hpp"
#include "rmdyn/record.hpp"

namespace rmdyn {

/// Detector outcome alphabet: centers origin + k*spacing that lie inside the
/// padded interior [x_min + 6 sigma, x_max - 6 sigma] of a grid.
class ClassLattice {
public:
    ClassLattice(std::vector<double> centers, double sigma, double mu_tol);

    /// All centers anchor + k*spacing inside the padded interior of grid.
    static ClassLattice covering(const Grid1D& grid, double anchor, double spacing, double sigma,
                                 double mu_tol);

    const std::vector<double>& centers() const noexcept { return centers_; }
    std::size_t size() const noexcept { return centers_.size(); }
    double sigma() const noexcept { return sigma_; }
    double mu_tol() const noexcept { return mu_tol_; }
    EquivalenceClassSpec cls(std::size_t k) const { return {centers_.at(k), sigma_, mu_tol_}; }

    /// Fraction of the padded interior within half a spacing of some center.
    double coverage(const Grid1D& grid) const;

    /// First-hitting rule: the member class with the smallest |mu - c|, if any.
    std::optional<std::size_t> match(const Moments& m) const;

private:
    std::vector<double> centers_;
    double sigma_;
    double mu_tol_;
};

/// How many trials to run and on how many threads; results never depend on threads.
struct RunControl {
    std::size_t trials = 1000;
    std::size_t threads = 1;
};

struct TrialOutcome {
    std::optional<std::size_t> hit;  // lattice index
    double hit_center = 0.0;         // NaN without a hit
    std::size_t steps_to_hit = 0;    // steps used when there is no hit
    double delta_z_at_hit = 0.0;     // NaN without a hit
    std::size_t renormalizations = 0;
};

/// Walk u0 on grid until it first enters a lattice class. Membership is
/// checked before the first step, so a state already in a class hits at step 0.
/// The state where the walk stopped is stored in final_state when given.
TrialOutcome first_hit(const Eigen::VectorXcd& u0, const Grid1D& grid, const ClassLattice& lattice,
                       const WalkConfig& walk, const GUEConfig& gue, Stream& stream,
                       Eigen::VectorXcd* final_state = nullptr);

/// p_k proportional to |<g_{c_k,sigma}, psi0>|^2 over the lattice, normalized.
/// Throws DegenerateStateError when every overlap is below 1e-12.
Eigen::VectorXd born_targets(const WaveFunction& psi0, const ClassLattice& lattice, double hbar);

/// Fringe contrast (I_max - I_min)/(I_max + I_min) around the global maximum,
/// with I_min the smaller of the nearest local minima on either side; 0 when
/// the maximum has no interior local minimum on either side.
double visibility(const Eigen::VectorXd& pattern);

ExperimentRecord run_born_experiment(const WaveFunction& psi0, const ClassLattice& lattice,
                                     const WalkConfig& walk, const GUEConfig& gue,
                                     const RunControl& control);

/// Fixed-length walks without absorption; indicator delta_z(final) <= sigma.
ExperimentRecord run_half_probability(const WaveFunction& psi0, double sigma,
                                      const WalkConfig& walk, const GUEConfig& gue,
                                      const RunControl& control, double t_obs);

/// Chains of n_records recorded points: walk until membership in a lattice class,
/// record mu_z, restart from g_{mu_z,sigma}. Increments are tested against
/// Normal(0, D * elapsed) with D = dz^2/dt.
ExperimentRecord run_constrained_brownian(const Grid1D& grid, double start,
                                          const ClassLattice& lattice, const WalkConfig& walk,
                                          const GUEConfig& gue, const RunControl& control,
                                          std::size_t n_records);

struct QctSetup {
    GaussianParams packet;
    PotentialSpec potential;
    ParticleParams particle;
    double substep_dt = 0.01;     // deterministic split-step substep
    std::size_t kick_every = 10;  // substeps between kicks
    double horizon = 1.0;         // total deterministic time T
};

/// Deterministic evolution interleaved with single random kicks. On membership,
/// (t, mu_z) is recorded and the state restarts from g_{mu_z,sigma_packet} e^{i<p>x/hbar}.
ExperimentRecord run_qct(const Grid1D& grid, const QctSetup& setup, const ClassLattice& lattice,
                         const WalkConfig& walk, const GUEConfig& gue, const RunControl& control);

struct DoubleSlitSetup {
    GaussianParams slit_a;
    GaussianParams slit_b;
    ParticleParams particle;
    double screen_time = 10.0;
    double propagation_dt = 0.01;
    bool measure_at_slits = false;
};

ExperimentRecord run_double_slit(const Grid1D& grid, const DoubleSlitSetup& setup,
                                 const ClassLattice& slit_lattice,
                                 const ClassLattice& screen_lattice, const WalkConfig& walk,
                                 const GUEConfig& gue, const RunControl& control);

/// Joint walk on the product space with stop on marginal membership on both
/// sides. A second pass with lattice_b_alt (the other side's resolution changed)
/// supplies the no-signaling check on the A marginal.
ExperimentRecord run_epr(const WaveFunction2& psi0, const ClassLattice& lattice_a,
                         const ClassLattice& lattice_b, const ClassLattice& lattice_b_alt,
                         const WalkConfig& walk, const GUEConfig& gue, const RunControl& control);

/// Survival in cls at the horizon under monitoring at each kick interval, with
/// restarts from the representative on membership. Scale is held fixed.
ExperimentRecord run_zeno(const Grid1D& grid, const EquivalenceClassSpec& cls,
                          const WalkConfig& walk, const GUEConfig& gue, const RunControl& control,
                          const std::vector<double>& kick_intervals, double horizon);

/// One random step on phi0 (x) g_{0,sigma_d}; records 1 - lambda_1^2 of the result.
ExperimentRecord run_device_product_form(const WaveFunction& phi0, const Grid1D& device_grid,
                                         const std::vector<double>& device_sigmas,
                                         const WalkConfig& walk, const GUEConfig& gue,
                                         const RunControl& control);

}  // namespace rmdyn
