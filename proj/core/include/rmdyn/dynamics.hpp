#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rmdyn/geometry.hpp"
#include "rmdyn/grid.hpp"

namespace rmdyn {

namespace detail {
class Fft;
}

/// Time-independent external potential.
///   free:      V = 0
///   harmonic:  V = k (x - center)^2 / 2
///   linear:    V = -force * x
///   tabulated: values on a fixed grid; linear interpolation off-grid
/// Analytic kinds accept an extra quartic term quartic * (x - center)^4.
struct PotentialSpec {
    enum class Kind { free, harmonic, linear, tabulated };

    Kind kind = Kind::free;
    double k = 0.0;
    double force = 0.0;
    double center = 0.0;
    double quartic = 0.0;
    std::optional<Grid1D> table_grid;
    Eigen::VectorXd table;

    static PotentialSpec free_space();
    static PotentialSpec harmonic(double k, double center = 0.0);
    static PotentialSpec linear(double force);
    static PotentialSpec tabulated(const Grid1D& grid, Eigen::VectorXd values);

    double value(double x) const;
    /// dV/dx; central differences of the table for the tabulated kind.
    double gradient(double x) const;
    /// Values at every point of grid. Throws ConfigError on a table/grid mismatch
    /// or non-finite values.
    Eigen::VectorXd on_grid(const Grid1D& grid) const;
};

struct ParticleParams {
    double mass = 1.0;
    double hbar = 1.0;
};

struct ClassicalState {
    double a = 0.0;
    double p = 0.0;
};

/// Density within this many cells of either edge triggers a boundary warning.
inline constexpr std::size_t kEdgeCells = 3;
inline constexpr double kEdgeDensity = 1e-8;

struct PropagationLog {
    bool boundary_contamination = false;
    double max_edge_density = 0.0;
};

/// Strang splitting e^{-iV dt/2hbar} e^{-iT dt/hbar} e^{-iV dt/2hbar} on a fixed grid.
class SplitStepPropagator {
public:
    SplitStepPropagator(const Grid1D& grid, const PotentialSpec& V, const ParticleParams& params,
                        double dt);
    ~SplitStepPropagator();
    SplitStepPropagator(SplitStepPropagator&&) noexcept;
    SplitStepPropagator& operator=(SplitStepPropagator&&) noexcept;

    const Grid1D& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }

    /// One step on grid amplitudes in place; updates log when given.
    void step(Eigen::VectorXcd& amp, PropagationLog* log = nullptr);

private:
    Grid1D grid_;
    double dt_;
    Eigen::VectorXcd half_kick_;
    Eigen::VectorXcd drift_;
    Eigen::VectorXcd work_;
    std::unique_ptr<detail::Fft> fft_;
};

using PropagationObserver = std::function<void(std::size_t step, const WaveFunction& psi)>;

/// n_steps Strang steps. The observer, if any, sees the state at step 0 and
/// after every step.
WaveFunction split_step_propagate(const WaveFunction& psi, const PotentialSpec& V,
                                  const ParticleParams& params, double dt, std::size_t n_steps,
                                  PropagationLog* log = nullptr,
                                  const PropagationObserver& observer = {});

/// h psi with the kinetic part applied spectrally and the potential pointwise.
Eigen::VectorXcd apply_hamiltonian(const WaveFunction& psi, const PotentialSpec& V,
                                   const ParticleParams& params);

/// <h> on a normalized state.
double energy_expectation(const WaveFunction& psi, const PotentialSpec& V,
                          const ParticleParams& params);

/// Squared FS speed (<h psi, h psi> - <psi, h psi>^2) / hbar^2.
double fs_velocity_norm2(const WaveFunction& psi, const PotentialSpec& V,
                         const ParticleParams& params);

struct DecompositionTerms {
    double velocity = 0.0;      // v^2 / 4 sigma^2
    double acceleration = 0.0;  // m^2 w^2 sigma^2 / hbar^2, w = -V'(a)/m
    double spreading = 0.0;     // hbar^2 / 32 m^2 sigma^4

    double sum() const noexcept { return velocity + acceleration + spreading; }
};

DecompositionTerms decomposition_terms(const GaussianParams& gp, const PotentialSpec& V,
                                       const ParticleParams& params);

/// Kick-drift-kick leapfrog; returns n_steps + 1 states starting with c0.
std::vector<ClassicalState> newton_trajectory(const ClassicalState& c0, const PotentialSpec& V,
                                              const ParticleParams& params, double dt,
                                              std::size_t n_steps);

double classical_energy(const ClassicalState& c, const PotentialSpec& V,
                        const ParticleParams& params);

/// max_t |<x>(t) - a(t)| between the split-step packet and the leapfrog orbit
/// started from (gp.a, gp.p), sampled at every step over round(T/dt) steps.
double ehrenfest_deviation(const GaussianParams& gp, const Grid1D& grid, const PotentialSpec& V,
                           const ParticleParams& params, double T, double dt,
                           PropagationLog* log = nullptr);

}  // namespace rmdyn
