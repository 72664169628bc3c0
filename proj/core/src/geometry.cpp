#include "rmdyn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "rmdyn/error.hpp"

namespace rmdyn {

namespace {

constexpr double kInvGolden = 0.6180339887498949;

/// Maximize f on [lo, hi] by golden-section search; returns the argmax.
template <typename F>
double golden_max(F&& f, double lo, double hi, double tol, int& evals, bool& converged) {
    double x1 = hi - kInvGolden * (hi - lo);
    double x2 = lo + kInvGolden * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    evals += 2;
    for (int it = 0; it < 200; ++it) {
        if (hi - lo <= tol) {
            converged = true;
            break;
        }
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvGolden * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvGolden * (hi - lo);
            f1 = f(x1);
        }
        ++evals;
    }
    return f1 > f2 ? x1 : x2;
}

}  // namespace

bool fits_padding(const Grid1D& grid, double center, double width) noexcept {
    return center - kPaddingWidths * width >= grid.x_min() &&
           center + kPaddingWidths * width <= grid.x_max();
}

void require_padding(const Grid1D& grid, double center, double width, const char* what) {
    if (!fits_padding(grid, center, width)) {
        throw ConfigError(std::string(what) + " at " + std::to_string(center) + " with width " +
                          std::to_string(width) + " violates the 6-width padding of [" +
                          std::to_string(grid.x_min()) + ", " + std::to_string(grid.x_max()) +
                          ")");
    }
}

double fs_distance(const WaveFunction& phi, const WaveFunction& psi) {
    const double ov = std::abs(inner(phi, psi));
    return std::acos(std::clamp(ov, 0.0, 1.0));
}

double fs_distance_unit(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) {
    return std::acos(std::clamp(std::abs(u.dot(v)), 0.0, 1.0));
}

Eigen::VectorXcd gaussian_unit_vector(const Grid1D& grid, double a, double p, double sigma,
                                      double hbar) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXcd u(n);
    const double k = p / hbar;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double x = grid.x(static_cast<std::size_t>(j));
        const double d = (x - a) / sigma;
        u[j] = std::exp(-0.25 * d * d) * std::polar(1.0, k * x);
    }
    u.normalize();
    return u;
}

WaveFunction gaussian_packet(const GaussianParams& params, const Grid1D& grid, double hbar) {
    if (!(params.sigma > 0.0)) throw DomainError("gaussian width must be positive");
    require_padding(grid, params.a, params.sigma, "gaussian packet");
    const auto n = static_cast<Eigen::Index>(grid.size());
    const double norm = std::pow(2.0 * std::numbers::pi * params.sigma * params.sigma, -0.25);
    Eigen::VectorXcd amp(n);
    const double k = params.p / hbar;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double x = grid.x(static_cast<std::size_t>(j));
        const double d = (x - params.a) / params.sigma;
        amp[j] = norm * std::exp(-0.25 * d * d) * std::polar(1.0, k * x);
    }
    return normalize(WaveFunction(grid, std::move(amp)));
}

double phase_space_cos2(const GaussianParams& pa, const GaussianParams& pb, double hbar) {
    const double s = pa.sigma;
    const double da = pa.a - pb.a;
    const double dp = pa.p - pb.p;
    return std::exp(-da * da / (4.0 * s * s) - dp * dp * s * s / (hbar * hbar));
}

double metric_relation_residual(const GaussianParams& pa, const GaussianParams& pb,
                                const Grid1D& grid, double hbar) {
    if (pa.sigma != pb.sigma) throw DomainError("metric relation is stated for equal widths");
    const WaveFunction phi = gaussian_packet(pa, grid, hbar);
    const WaveFunction psi = gaussian_packet(pb, grid, hbar);
    const double c = std::cos(fs_distance(phi, psi));
    return std::abs(c * c - phase_space_cos2(pa, pb, hbar));
}

bool class_membership(const Moments& m, const EquivalenceClassSpec& cls) noexcept {
    return std::abs(m.mu - cls.c) <= cls.mu_tol && m.delta <= cls.sigma;
}

bool class_membership(const WaveFunction& psi, const EquivalenceClassSpec& cls) {
    return class_membership(position_moments(psi), cls);
}

ClassDistance class_distance(const WaveFunction& psi, const EquivalenceClassSpec& cls,
                             double hbar) {
    const Grid1D& grid = psi.grid();
    require_padding(grid, cls.c, cls.sigma, "equivalence class");
    const auto n = static_cast<Eigen::Index>(grid.size());
    const Eigen::VectorXcd u = psi.unit_vector();
    const Eigen::VectorXd xs = grid.points();
    const double dk = 2.0 * std::numbers::pi / grid.length();

    ClassDistance best;
    int evals = 0;
    bool k_converged = true;

    // |<g_s e^{ikx}, psi>| for the real Gaussian weight g_s.
    auto overlap_at = [&](const Eigen::VectorXd& g, double k) {
        cplx acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) acc += g[j] * std::polar(1.0, -k * xs[j]) * u[j];
        return std::abs(acc);
    };

    detail::Fft fft(grid.size());
    auto best_over_k = [&](double s, double& k_out) {
        Eigen::VectorXd g(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = (xs[j] - cls.c) / s;
            g[j] = std::exp(-0.25 * d * d);
        }
        g.normalize();
        Eigen::VectorXcd prod = g.cast<cplx>().cwiseProduct(u);
        Eigen::VectorXcd hat;
        fft.forward(prod, hat);
        Eigen::Index jbest = 0;
        hat.cwiseAbs().maxCoeff(&jbest);
        const double k0 = grid.wavenumber(static_cast<std::size_t>(jbest));
        bool conv = false;
        const double k = golden_max([&](double kk) { return overlap_at(g, kk); }, k0 - dk,
                                    k0 + dk, 1e-10 * (1.0 + std::abs(k0)), evals, conv);
        k_converged = k_converged && conv;
        k_out = k;
        return overlap_at(g, k);
    };

    const double s_min = grid.dx();
    const double s_max = cls.sigma;
    if (!(s_max > s_min)) throw DomainError("class resolution must exceed the grid spacing");

    // Coarse log-spaced scan, then golden refinement in ln s around the best sample.
    constexpr int kScan = 24;
    const double l_min = std::log(s_min), l_max = std::log(s_max);
    int i_best = 0;
    double v_best = -1.0, k_best = 0.0;
    for (int i = 0; i <= kScan; ++i) {
        const double l = l_min + (l_max - l_min) * i / kScan;
        double k = 0.0;
        const double v = best_over_k(std::exp(l), k);
        if (v > v_best) {
            v_best = v;
            i_best = i;
            k_best = k;
        }
    }
    const double step = (l_max - l_min) / kScan;
    const double lo = std::max(l_min, l_min + step * (i_best - 1));
    const double hi = std::min(l_max, l_min + step * (i_best + 1));
    bool s_converged = false;
    const double l_opt = golden_max(
        [&](double l) {
            double k = 0.0;
            return best_over_k(std::exp(l), k);
        },
        lo, hi, 1e-9, evals, s_converged);
    double k_opt = 0.0;
    const double v_opt = best_over_k(std::exp(l_opt), k_opt);

    if (v_opt >= v_best) {
        best.sigma = std::exp(l_opt);
        best.p = hbar * k_opt;
        v_best = v_opt;
    } else {
        best.sigma = std::exp(l_min + step * i_best);
        best.p = hbar * k_best;
    }
    best.rho = std::acos(std::clamp(v_best, 0.0, 1.0));
    best.converged = s_converged && k_converged;
    best.evaluations = evals;
    return best;
}

WaveFunction tau_s_state(const TauSChart& chart) {
    const WaveFunction& base = chart.base_state;
    const Grid1D& grid = base.grid();
    const Moments m0 = position_moments(base);
    const double scale = std::exp(chart.s);
    require_padding(grid, chart.tau, m0.delta * scale, "(tau, s) chart state");

    const auto n = static_cast<Eigen::Index>(grid.size());
    detail::Fft fft(grid.size());
    Eigen::VectorXcd coef;
    fft.forward(base.amp(), coef);
    coef /= static_cast<double>(n);
    const Eigen::VectorXd ks = grid.wavenumbers();

    // Band-limited interpolant: base(y) = sum_k coef_k exp(i k (y - x_min)).
    Eigen::VectorXcd amp(n);
    const double inv = 1.0 / scale;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double y = m0.mu + (grid.x(static_cast<std::size_t>(j)) - chart.tau) * inv;
        const double r = y - grid.x_min();
        // The base vanishes outside its padded grid; skip periodic images.
        if (r < 0.0 || r >= grid.length()) {
            amp[j] = 0.0;
            continue;
        }
        cplx acc = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) acc += coef[k] * std::polar(1.0, ks[k] * r);
        amp[j] = acc * std::sqrt(inv);
    }
    return normalize(WaveFunction(grid, std::move(amp)));
}

}  // namespace rmdyn
