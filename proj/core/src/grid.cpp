#include "rmdyn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "rmdyn/error.hpp"

namespace rmdyn {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void require_same_grid(const Grid1D& a, const Grid1D& b) {
    if (!(a == b)) throw ConfigError("grid mismatch between wave functions");
}

void require_finite(const Eigen::Ref<const Eigen::VectorXcd>& v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (!std::isfinite(v[j].real()) || !std::isfinite(v[j].imag()))
            throw DegenerateStateError("non-finite amplitude at index " + std::to_string(j));
    }
}

}  // namespace

Grid1D::Grid1D(std::size_t n_points, double x_min, double x_max)
    : n_(n_points), x_min_(x_min), x_max_(x_max), dx_(0.0) {
    if (!is_power_of_two(n_points))
        throw ConfigError("grid size must be a power of two, got " + std::to_string(n_points));
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
        throw ConfigError("grid requires finite x_min < x_max");
    dx_ = (x_max - x_min) / static_cast<double>(n_points);
}

double Grid1D::wavenumber(std::size_t j) const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(n_);
    auto m = static_cast<std::ptrdiff_t>(j);
    if (m >= n / 2) m -= n;
    return 2.0 * std::numbers::pi * static_cast<double>(m) / (static_cast<double>(n_) * dx_);
}

Eigen::VectorXd Grid1D::points() const {
    Eigen::VectorXd xs(static_cast<Eigen::Index>(n_));
    for (std::size_t j = 0; j < n_; ++j) xs[static_cast<Eigen::Index>(j)] = x(j);
    return xs;
}

Eigen::VectorXd Grid1D::wavenumbers() const {
    Eigen::VectorXd ks(static_cast<Eigen::Index>(n_));
    for (std::size_t j = 0; j < n_; ++j) ks[static_cast<Eigen::Index>(j)] = wavenumber(j);
    return ks;
}

WaveFunction::WaveFunction(Grid1D grid, Eigen::VectorXcd amp) : grid_(grid), amp_(std::move(amp)) {
    if (static_cast<std::size_t>(amp_.size()) != grid_.size())
        throw ConfigError("amplitude count does not match grid size");
    require_finite(amp_);
}

WaveFunction WaveFunction::from_unit_vector(const Grid1D& grid, const Eigen::VectorXcd& u) {
    return WaveFunction(grid, u / std::sqrt(grid.dx()));
}

Eigen::VectorXcd WaveFunction::unit_vector() const { return amp_ * std::sqrt(grid_.dx()); }

double WaveFunction::norm2() const { return amp_.squaredNorm() * grid_.dx(); }

Eigen::VectorXd WaveFunction::density() const { return amp_.cwiseAbs2(); }

WaveFunction2::WaveFunction2(Grid1D grid_a, Grid1D grid_b, Eigen::MatrixXcd amp)
    : grid_a_(grid_a), grid_b_(grid_b), amp_(std::move(amp)) {
    if (static_cast<std::size_t>(amp_.rows()) != grid_a_.size() ||
        static_cast<std::size_t>(amp_.cols()) != grid_b_.size())
        throw ConfigError("two-particle amplitude shape does not match grids");
    require_finite(amp_.reshaped());
}

WaveFunction2 WaveFunction2::from_unit_vector(const Grid1D& grid_a, const Grid1D& grid_b,
                                              const Eigen::VectorXcd& u) {
    const auto na = static_cast<Eigen::Index>(grid_a.size());
    const auto nb = static_cast<Eigen::Index>(grid_b.size());
    if (u.size() != na * nb) throw ConfigError("joint vector size does not match grids");
    Eigen::MatrixXcd amp = u.reshaped(na, nb) / std::sqrt(grid_a.dx() * grid_b.dx());
    return WaveFunction2(grid_a, grid_b, std::move(amp));
}

Eigen::VectorXcd WaveFunction2::unit_vector() const {
    return amp_.reshaped() * std::sqrt(grid_a_.dx() * grid_b_.dx());
}

double WaveFunction2::norm2() const {
    return amp_.squaredNorm() * grid_a_.dx() * grid_b_.dx();
}

cplx inner(const WaveFunction& phi, const WaveFunction& psi) {
    require_same_grid(phi.grid(), psi.grid());
    return phi.amp().dot(psi.amp()) * phi.grid().dx();
}

cplx inner(const WaveFunction2& phi, const WaveFunction2& psi) {
    require_same_grid(phi.grid_a(), psi.grid_a());
    require_same_grid(phi.grid_b(), psi.grid_b());
    return phi.amp().reshaped().dot(psi.amp().reshaped()) * phi.grid_a().dx() * phi.grid_b().dx();
}

WaveFunction normalize(const WaveFunction& psi) {
    const double n2 = psi.norm2();
    if (!(n2 > 0.0)) throw DegenerateStateError("cannot normalize the zero vector");
    return WaveFunction(psi.grid(), psi.amp() / std::sqrt(n2));
}

WaveFunction2 normalize(const WaveFunction2& psi) {
    const double n2 = psi.norm2();
    if (!(n2 > 0.0)) throw DegenerateStateError("cannot normalize the zero vector");
    return WaveFunction2(psi.grid_a(), psi.grid_b(), psi.amp() / std::sqrt(n2));
}

WaveFunction superpose(const std::vector<cplx>& coeffs, const std::vector<WaveFunction>& states) {
    if (coeffs.size() != states.size() || states.empty())
        throw ConfigError("superpose needs matching, nonempty coefficient and state lists");
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(states.front().size()));
    for (std::size_t k = 0; k < states.size(); ++k) {
        require_same_grid(states.front().grid(), states[k].grid());
        amp += coeffs[k] * states[k].amp();
    }
    return WaveFunction(states.front().grid(), std::move(amp));
}

Moments density_moments(const Grid1D& grid, const Eigen::Ref<const Eigen::VectorXd>& density) {
    double m1 = 0.0;
    for (Eigen::Index j = 0; j < density.size(); ++j)
        m1 += density[j] * grid.x(static_cast<std::size_t>(j));
    const double mu = m1 * grid.dx();
    double var = 0.0;
    for (Eigen::Index j = 0; j < density.size(); ++j) {
        const double d = grid.x(static_cast<std::size_t>(j)) - mu;
        var += density[j] * d * d;
    }
    var *= grid.dx();
    return {mu, std::sqrt(std::max(var, 0.0))};
}

Moments position_moments(const WaveFunction& psi) {
    const Eigen::VectorXd rho = psi.density();
    return density_moments(psi.grid(), rho);
}

Eigen::VectorXd momentum_density(const WaveFunction& psi) {
    const auto& g = psi.grid();
    detail::Fft fft(g.size());
    Eigen::VectorXcd hat;
    fft.forward(psi.amp(), hat);
    const double scale = g.dx() * g.dx() / (2.0 * std::numbers::pi);
    return hat.cwiseAbs2() * scale;
}

double momentum_expectation(const WaveFunction& psi, double hbar) {
    const Eigen::VectorXd rho = momentum_density(psi);
    const Eigen::VectorXd ks = psi.grid().wavenumbers();
    const double total = rho.sum();
    if (!(total > 0.0)) throw DegenerateStateError("zero state has no momentum");
    return hbar * rho.dot(ks) / total;
}

WaveFunction2 tensor(const WaveFunction& phi, const WaveFunction& psi) {
    Eigen::MatrixXcd amp = phi.amp() * psi.amp().transpose();
    return normalize(WaveFunction2(phi.grid(), psi.grid(), std::move(amp)));
}

Eigen::VectorXd marginal(const WaveFunction2& psi, Axis keep) {
    const Eigen::MatrixXd rho = psi.amp().cwiseAbs2();
    if (keep == Axis::first) return rho.rowwise().sum() * psi.grid_b().dx();
    return rho.colwise().sum().transpose() * psi.grid_a().dx();
}

Eigen::VectorXd schmidt_coefficients(const WaveFunction2& psi) {
    const Eigen::MatrixXcd m = psi.amp() * std::sqrt(psi.grid_a().dx() * psi.grid_b().dx());
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues();
}

}  // namespace rmdyn
