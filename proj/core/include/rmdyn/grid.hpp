#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace rmdyn {

using cplx = std::complex<double>;

/// Uniform periodic grid x_j = x_min + j*dx, j = 0..n-1, with n a power of two.
class Grid1D {
public:
    Grid1D(std::size_t n_points, double x_min, double x_max);

    std::size_t size() const noexcept { return n_; }
    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    double dx() const noexcept { return dx_; }
    double length() const noexcept { return x_max_ - x_min_; }
    double x(std::size_t j) const noexcept { return x_min_ + static_cast<double>(j) * dx_; }

    /// Angular wavenumber of FFT bin j, folded into [-pi/dx, pi/dx).
    double wavenumber(std::size_t j) const noexcept;

    Eigen::VectorXd points() const;
    Eigen::VectorXd wavenumbers() const;

    friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
    std::size_t n_;
    double x_min_;
    double x_max_;
    double dx_;
};

/// Complex amplitudes on a Grid1D. Norm convention: sum |amp_j|^2 dx.
class WaveFunction {
public:
    WaveFunction(Grid1D grid, Eigen::VectorXcd amp);

    /// Build from a unit Euclidean vector (the representation used by walks).
    static WaveFunction from_unit_vector(const Grid1D& grid, const Eigen::VectorXcd& u);

    const Grid1D& grid() const noexcept { return grid_; }
    const Eigen::VectorXcd& amp() const noexcept { return amp_; }
    std::size_t size() const noexcept { return grid_.size(); }

    /// amp * sqrt(dx): unit Euclidean norm when the state is normalized.
    Eigen::VectorXcd unit_vector() const;

    double norm2() const;
    Eigen::VectorXd density() const;

private:
    Grid1D grid_;
    Eigen::VectorXcd amp_;
};

/// Two-particle amplitudes amp(j, k) on grid_a x grid_b.
class WaveFunction2 {
public:
    WaveFunction2(Grid1D grid_a, Grid1D grid_b, Eigen::MatrixXcd amp);

    static WaveFunction2 from_unit_vector(const Grid1D& grid_a, const Grid1D& grid_b,
                                          const Eigen::VectorXcd& u);

    const Grid1D& grid_a() const noexcept { return grid_a_; }
    const Grid1D& grid_b() const noexcept { return grid_b_; }
    const Eigen::MatrixXcd& amp() const noexcept { return amp_; }

    /// Column-major flattening scaled by sqrt(dx_a dx_b).
    Eigen::VectorXcd unit_vector() const;
    double norm2() const;

private:
    Grid1D grid_a_;
    Grid1D grid_b_;
    Eigen::MatrixXcd amp_;
};

struct Moments {
    double mu;
    double delta;
};

enum class Axis { first, second };

cplx inner(const WaveFunction& phi, const WaveFunction& psi);
cplx inner(const WaveFunction2& phi, const WaveFunction2& psi);

WaveFunction normalize(const WaveFunction& psi);
WaveFunction2 normalize(const WaveFunction2& psi);

/// Linear combination sum_k c_k psi_k on a shared grid (not normalized).
WaveFunction superpose(const std::vector<cplx>& coeffs, const std::vector<WaveFunction>& states);

Moments position_moments(const WaveFunction& psi);

/// Moments of a nonnegative density on a grid (midpoint quadrature, no renormalization).
Moments density_moments(const Grid1D& grid, const Eigen::Ref<const Eigen::VectorXd>& density);

double momentum_expectation(const WaveFunction& psi, double hbar);

/// |psi_hat(k_j)|^2 with the unitary continuum convention, so that
/// sum_j density_j * dk == sum_j |psi_j|^2 dx. Bins in FFT order.
Eigen::VectorXd momentum_density(const WaveFunction& psi);

WaveFunction2 tensor(const WaveFunction& phi, const WaveFunction& psi);

/// Reduced position density of one factor; integrates to the norm under that grid's dx.
Eigen::VectorXd marginal(const WaveFunction2& psi, Axis keep);

/// Schmidt coefficients (descending) of a normalized two-particle state.
Eigen::VectorXd schmidt_coefficients(const WaveFunction2& psi);

}  // namespace rmdyn
