#include "rmdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "rmdyn/error.hpp"

namespace rmdyn {

PotentialSpec PotentialSpec::free_space() { return {}; }

PotentialSpec PotentialSpec::harmonic(double k, double center) {
    PotentialSpec v;
    v.kind = Kind::harmonic;
    v.k = k;
    v.center = center;
    return v;
}

PotentialSpec PotentialSpec::linear(double force) {
    PotentialSpec v;
    v.kind = Kind::linear;
    v.force = force;
    return v;
}

PotentialSpec PotentialSpec::tabulated(const Grid1D& grid, Eigen::VectorXd values) {
    if (static_cast<std::size_t>(values.size()) != grid.size())
        throw ConfigError("tabulated potential size does not match its grid");
    if (!values.allFinite()) throw ConfigError("tabulated potential has non-finite values");
    PotentialSpec v;
    v.kind = Kind::tabulated;
    v.table_grid = grid;
    v.table = std::move(values);
    return v;
}

namespace {

double table_lookup(const Grid1D& g, const Eigen::VectorXd& t, double x) {
    const double s = (x - g.x_min()) / g.dx();
    const auto last = static_cast<double>(g.size() - 1);
    if (s <= 0.0) return t[0];
    if (s >= last) return t[t.size() - 1];
    const auto j = static_cast<Eigen::Index>(std::floor(s));
    const double f = s - static_cast<double>(j);
    return (1.0 - f) * t[j] + f * t[j + 1];
}

}  // namespace

double PotentialSpec::value(double x) const {
    const double d = x - center;
    const double q = quartic * d * d * d * d;
    switch (kind) {
        case Kind::free: return q;
        case Kind::harmonic: return 0.5 * k * d * d + q;
        case Kind::linear: return -force * x + q;
        case Kind::tabulated: return table_lookup(*table_grid, table, x);
    }
    return 0.0;
}

double PotentialSpec::gradient(double x) const {
    const double d = x - center;
    const double q = 4.0 * quartic * d * d * d;
    switch (kind) {
        case Kind::free: return q;
        case Kind::harmonic: return k * d + q;
        case Kind::linear: return -force + q;
        case Kind::tabulated: {
            const double h = table_grid->dx();
            return (value(x + h) - value(x - h)) / (2.0 * h);
        }
    }
    return 0.0;
}

Eigen::VectorXd PotentialSpec::on_grid(const Grid1D& grid) const {
    if (kind == Kind::tabulated) {
        if (!(*table_grid == grid)) throw ConfigError("tabulated potential grid mismatch");
        return table;
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < grid.size(); ++j) v[static_cast<Eigen::Index>(j)] = value(grid.x(j));
    if (!v.allFinite()) throw ConfigError("potential is not finite on the grid");
    return v;
}

SplitStepPropagator::SplitStepPropagator(const Grid1D& grid, const PotentialSpec& V,
                                         const ParticleParams& params, double dt)
    : grid_(grid), dt_(dt), fft_(std::make_unique<detail::Fft>(grid.size())) {
    if (!(params.mass > 0.0) || !(params.hbar > 0.0))
        throw ConfigError("mass and hbar must be positive");
    if (!(dt > 0.0)) throw ConfigError("propagation dt must be positive");
    const auto n = static_cast<Eigen::Index>(grid.size());
    const Eigen::VectorXd v = V.on_grid(grid);
    const Eigen::VectorXd ks = grid.wavenumbers();
    half_kick_.resize(n);
    drift_.resize(n);
    work_.resize(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        half_kick_[j] = std::polar(1.0, -0.5 * v[j] * dt / params.hbar);
        // The 1/n of the inverse transform is folded into the drift phase.
        drift_[j] = std::polar(inv_n, -params.hbar * ks[j] * ks[j] * dt / (2.0 * params.mass));
    }
}

SplitStepPropagator::~SplitStepPropagator() = default;
SplitStepPropagator::SplitStepPropagator(SplitStepPropagator&&) noexcept = default;
SplitStepPropagator& SplitStepPropagator::operator=(SplitStepPropagator&&) noexcept = default;

void SplitStepPropagator::step(Eigen::VectorXcd& amp, PropagationLog* log) {
    amp.array() *= half_kick_.array();
    fft_->forward(amp, work_);
    work_.array() *= drift_.array();
    fft_->backward(work_, amp);
    amp.array() *= half_kick_.array();
    if (log) {
        const auto n = amp.size();
        const auto e = static_cast<Eigen::Index>(kEdgeCells);
        double edge = 0.0;
        for (Eigen::Index j = 0; j < e; ++j)
            edge = std::max({edge, std::norm(amp[j]), std::norm(amp[n - 1 - j])});
        log->max_edge_density = std::max(log->max_edge_density, edge);
        if (edge > kEdgeDensity) log->boundary_contamination = true;
    }
}

WaveFunction split_step_propagate(const WaveFunction& psi, const PotentialSpec& V,
                                  const ParticleParams& params, double dt, std::size_t n_steps,
                                  PropagationLog* log, const PropagationObserver& observer) {
    SplitStepPropagator prop(psi.grid(), V, params, dt);
    Eigen::VectorXcd amp = psi.amp();
    if (observer) observer(0, psi);
    for (std::size_t s = 1; s <= n_steps; ++s) {
        prop.step(amp, log);
        if (observer) observer(s, WaveFunction(psi.grid(), amp));
    }
    return WaveFunction(psi.grid(), std::move(amp));
}

Eigen::VectorXcd apply_hamiltonian(const WaveFunction& psi, const PotentialSpec& V,
                                   const ParticleParams& params) {
    const Grid1D& g = psi.grid();
    const auto n = static_cast<Eigen::Index>(g.size());
    detail::Fft fft(g.size());
    Eigen::VectorXcd hat(n), kin(n);
    fft.forward(psi.amp(), hat);
    const Eigen::VectorXd ks = g.wavenumbers();
    const double c = params.hbar * params.hbar / (2.0 * params.mass * static_cast<double>(n));
    for (Eigen::Index j = 0; j < n; ++j) hat[j] *= c * ks[j] * ks[j];
    fft.backward(hat, kin);
    const Eigen::VectorXd v = V.on_grid(g);
    return kin + (v.array() * psi.amp().array()).matrix();
}

double energy_expectation(const WaveFunction& psi, const PotentialSpec& V,
                          const ParticleParams& params) {
    const Eigen::VectorXcd h = apply_hamiltonian(psi, V, params);
    return (psi.amp().dot(h) * psi.grid().dx()).real();
}

double fs_velocity_norm2(const WaveFunction& psi, const PotentialSpec& V,
                         const ParticleParams& params) {
    const Eigen::VectorXcd h = apply_hamiltonian(psi, V, params);
    const double dx = psi.grid().dx();
    const double hh = h.squaredNorm() * dx;
    const double e = (psi.amp().dot(h) * dx).real();
    return std::max(hh - e * e, 0.0) / (params.hbar * params.hbar);
}

DecompositionTerms decomposition_terms(const GaussianParams& gp, const PotentialSpec& V,
                                       const ParticleParams& params) {
    const double m = params.mass, hb = params.hbar, s = gp.sigma;
    const double v = gp.p / m;
    const double w = -V.gradient(gp.a) / m;
    DecompositionTerms t;
    t.velocity = v * v / (4.0 * s * s);
    t.acceleration = m * m * w * w * s * s / (hb * hb);
    t.spreading = hb * hb / (32.0 * m * m * s * s * s * s);
    return t;
}

std::vector<ClassicalState> newton_trajectory(const ClassicalState& c0, const PotentialSpec& V,
                                              const ParticleParams& params, double dt,
                                              std::size_t n_steps) {
    std::vector<ClassicalState> out;
    out.reserve(n_steps + 1);
    out.push_back(c0);
    double a = c0.a, p = c0.p;
    for (std::size_t s = 0; s < n_steps; ++s) {
        p -= 0.5 * dt * V.gradient(a);
        a += dt * p / params.mass;
        p -= 0.5 * dt * V.gradient(a);
        out.push_back({a, p});
    }
    return out;
}

double classical_energy(const ClassicalState& c, const PotentialSpec& V,
                        const ParticleParams& params) {
    return c.p * c.p / (2.0 * params.mass) + V.value(c.a);
}

double ehrenfest_deviation(const GaussianParams& gp, const Grid1D& grid, const PotentialSpec& V,
                           const ParticleParams& params, double T, double dt,
                           PropagationLog* log) {
    if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("T and dt must be positive");
    const auto n_steps = static_cast<std::size_t>(std::llround(T / dt));
    const WaveFunction psi0 = gaussian_packet(gp, grid, params.hbar);
    const auto orbit = newton_trajectory({gp.a, gp.p}, V, params, dt, n_steps);
    double worst = 0.0;
    split_step_propagate(psi0, V, params, dt, n_steps, log,
                         [&](std::size_t s, const WaveFunction& psi) {
                             const double mu = position_moments(psi).mu;
                             worst = std::max(worst, std::abs(mu - orbit[s].a));
                         });
    return worst;
}

}  // namespace rmdyn
