#pragma once

#include "rmdyn/grid.hpp"

namespace rmdyn {

/// A point g_{a,sigma} e^{ipx/hbar} of the Gaussian phase-space submanifold.
struct GaussianParams {
    double a = 0.0;      // center
    double p = 0.0;      // momentum
    double sigma = 1.0;  // width (position standard deviation)
};

/// Detector cell {g_c}: states with |mu_z - c| <= mu_tol and delta_z <= sigma.
struct EquivalenceClassSpec {
    double c = 0.0;
    double sigma = 1.0;
    double mu_tol = 0.0;
};

/// Minimum padding (in widths) between a packet center and the box edge.
inline constexpr double kPaddingWidths = 6.0;

/// Throws ConfigError unless [center - 6 width, center + 6 width] lies inside the box.
void require_padding(const Grid1D& grid, double center, double width, const char* what);
bool fits_padding(const Grid1D& grid, double center, double width) noexcept;

/// Fubini-Study angle between two normalized states, in [0, pi/2].
double fs_distance(const WaveFunction& phi, const WaveFunction& psi);
double fs_distance_unit(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v);

WaveFunction gaussian_packet(const GaussianParams& params, const Grid1D& grid, double hbar);

/// Unit Euclidean vector of the grid-normalized packet; no padding check.
Eigen::VectorXcd gaussian_unit_vector(const Grid1D& grid, double a, double p, double sigma,
                                      double hbar);

/// exp(-(a-b)^2/4 sigma^2 - (p-q)^2 sigma^2/hbar^2) for packets of equal width.
double phase_space_cos2(const GaussianParams& pa, const GaussianParams& pb, double hbar);

/// |cos^2 rho_grid - phase_space_cos2|. Both packets must share sigma.
double metric_relation_residual(const GaussianParams& pa, const GaussianParams& pb,
                                const Grid1D& grid, double hbar);

bool class_membership(const Moments& m, const EquivalenceClassSpec& cls) noexcept;
bool class_membership(const WaveFunction& psi, const EquivalenceClassSpec& cls);

struct ClassDistance {
    double rho = 0.0;    // best FS angle found
    double sigma = 0.0;  // minimizer width, in (0, cls.sigma]
    double p = 0.0;      // minimizer momentum
    bool converged = false;
    int evaluations = 0;
};

/// Infimum of fs_distance(psi, g_{c,s} e^{ipx/hbar}) over s in [dx, sigma] and all
/// grid-resolvable p. This is the Gaussian-with-momentum slice of the class.
ClassDistance class_distance(const WaveFunction& psi, const EquivalenceClassSpec& cls,
                             double hbar);

/// Point (tau, s) of the translate-and-dilate family generated by base_state.
struct TauSChart {
    WaveFunction base_state;
    double tau = 0.0;
    double s = 0.0;
};

/// psi(x) = e^{-s/2} base(mu0 + (x - tau) e^{-s}), evaluated by trigonometric
/// interpolation of the base and renormalized; has mu_z = tau, delta_z = delta0 e^s.
WaveFunction tau_s_state(const TauSChart& chart);

}  // namespace rmdyn
