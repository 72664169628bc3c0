#include "rmdyn/gue.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rmdyn/error.hpp"
#include "rmdyn/geometry.hpp"
#include "rmdyn/stats.hpp"

namespace rmdyn {

Eigen::MatrixXcd sample_gue(const GUEConfig& cfg, Stream& stream) {
    const auto n = static_cast<Eigen::Index>(cfg.dim);
    Eigen::MatrixXcd H(n, n);
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexNormal cnormal;
    for (Eigen::Index i = 0; i < n; ++i) {
        H(i, i) = cfg.scale * normal(stream);
        for (Eigen::Index j = 0; j < i; ++j) {
            const cplx z = cfg.scale * cnormal(stream);
            H(i, j) = z;
            H(j, i) = std::conj(z);
        }
    }
    return H;
}

Eigen::VectorXcd unitary_step(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& H, double dt,
                              double hbar) {
    if (H.rows() != psi.size() || H.cols() != psi.size())
        throw ConfigError("hamiltonian dimension does not match the state");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success) throw NumericalError("hermitian eigendecomposition failed");
    const Eigen::MatrixXcd& V = es.eigenvectors();
    Eigen::VectorXcd coeff = V.adjoint() * psi;
    const Eigen::VectorXd& lambda = es.eigenvalues();
    for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff[k] *= std::polar(1.0, -lambda[k] * dt / hbar);
    return V * coeff;
}

WaveFunction unitary_step(const WaveFunction& psi, const Eigen::MatrixXcd& H, double dt,
                          double hbar) {
    return WaveFunction(psi.grid(), unitary_step(psi.amp(), H, dt, hbar));
}

RandomStepper::RandomStepper(std::size_t dim, double scale, double dt, double hbar,
                             Propagator propagator)
    : dim_(dim), scale_(scale), dt_(dt), hbar_(hbar), propagator_(propagator) {
    if (dim < 2) throw ConfigError("random walk dimension must be at least 2");
    if (!(scale >= 0.0)) throw ConfigError("ensemble scale must be nonnegative");
    if (!(dt > 0.0) || !(hbar > 0.0)) throw ConfigError("dt and hbar must be positive");
    eta_.resize(static_cast<Eigen::Index>(dim));
}

void RandomStepper::step(Eigen::VectorXcd& u, Stream& stream) {
    if (static_cast<std::size_t>(u.size()) != dim_)
        throw ConfigError("state dimension does not match the random stepper");
    if (propagator_ == Propagator::dense)
        step_dense(u, stream);
    else
        step_tridiagonal(u, stream);
}

void RandomStepper::step_dense(Eigen::VectorXcd& u, Stream& stream) {
    const GUEConfig cfg{dim_, scale_, 0};
    const Eigen::MatrixXcd H = sample_gue(cfg, stream);
    u = unitary_step(u, H, dt_, hbar_);
}

namespace {

// J_0(z)..J_K(z) by Miller's backward recurrence, normalized with
// J_0 + 2 sum J_2k = 1; rescaled on the way down to stay in range.
void bessel_j_sequence(double z, std::size_t K, std::vector<double>& out) {
    const std::size_t top = K + 30;
    std::vector<double> j(top + 2, 0.0);
    j[top] = 1e-30;
    for (std::size_t k = top; k >= 1; --k) {
        j[k - 1] = (2.0 * static_cast<double>(k) / z) * j[k] - j[k + 1];
        if (std::abs(j[k - 1]) > 1e250)
            for (std::size_t i = k - 1; i <= top; ++i) j[i] *= 1e-250;
    }
    double norm = j[0];
    for (std::size_t k = 2; k <= top; k += 2) norm += 2.0 * j[k];
    out.assign(j.begin(), j.begin() + static_cast<std::ptrdiff_t>(K + 1));
    for (double& v : out) v /= norm;
}

// Chebyshev degree at which J_k(z) has dropped below 1e-18.
std::size_t chebyshev_degree(double z) {
    return static_cast<std::size_t>(std::ceil(z + 10.0 * std::cbrt(z) + 20.0));
}

}  // namespace

// In the Krylov basis generated from u, a draw of the ensemble is tridiagonal with
// independent entries a_k ~ N(0, s^2) and b_k = s sqrt(Gamma(dim - k, 1)), and the
// remaining basis vectors are uniformly distributed in the complement of u. So
// e^{-iH dt}u = c_1 u + |c_{2:}| eta with c = e^{-i T dt} e_1 and eta uniform on the
// unit sphere orthogonal to u. The direction is drawn first so that runs at
// different scales share random numbers.
//
// c is evaluated by the Chebyshev series of e^{-i theta x} on the Gershgorin
// interval of the drawn block. A degree-K polynomial applied to e_1 only sees the
// leading (K+1)-block, so entries are drawn until the block covers the degree.
void RandomStepper::step_tridiagonal(Eigen::VectorXcd& u, Stream& stream) {
    const auto n = static_cast<std::size_t>(dim_);
    ComplexNormal cnormal;
    double eta_norm = 0.0;
    do {
        for (Eigen::Index j = 0; j < eta_.size(); ++j) eta_[j] = cnormal(stream);
        eta_ -= u.dot(eta_) * u;
        eta_norm = eta_.norm();
    } while (!(eta_norm > 0.0));
    eta_ /= eta_norm;

    const double theta = scale_ * dt_ / hbar_;
    if (!(theta > 0.0)) return;

    diag_.clear();
    offdiag_.clear();
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw_to = [&](std::size_t m) {
        while (diag_.size() < m) {
            const std::size_t k = diag_.size();
            diag_.push_back(normal(stream));
            if (k + 1 < n) {
                std::gamma_distribution<double> gamma(static_cast<double>(n - k - 1), 1.0);
                offdiag_.push_back(std::sqrt(gamma(stream)));
            }
        }
    };

    std::size_t m = std::min<std::size_t>(n, 24);
    double radius = 0.0;
    std::size_t K = 0;
    for (;;) {
        draw_to(m);
        radius = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            double r = std::abs(diag_[k]);
            if (k > 0) r += offdiag_[k - 1];
            if (k + 1 < m) r += offdiag_[k];
            radius = std::max(radius, r);
        }
        K = chebyshev_degree(theta * radius);
        if (K + 1 <= m || m == n) break;
        m = std::min(n, std::max(2 * m, K + 1));
    }
    if (m == n) K = std::max<std::size_t>(K, 1);
    else K = m - 1;

    bessel_j_sequence(theta * radius, K, bessel_);

    // Chebyshev recurrence on x = T / radius, tracking real and imaginary parts.
    const auto mi = static_cast<Eigen::Index>(m);
    w_prev_.setZero(mi);
    w_cur_.setZero(mi);
    w_next_.setZero(mi);
    c_re_.setZero(mi);
    c_im_.setZero(mi);
    w_prev_[0] = 1.0;
    c_re_[0] = bessel_[0];
    const double inv_r = 1.0 / radius;
    auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y, Eigen::Index support) {
        for (Eigen::Index i = 0; i < support; ++i) {
            double v = diag_[static_cast<std::size_t>(i)] * x[i];
            if (i > 0) v += offdiag_[static_cast<std::size_t>(i - 1)] * x[i - 1];
            if (i + 1 < mi) v += offdiag_[static_cast<std::size_t>(i)] * x[i + 1];
            y[i] = v * inv_r;
        }
    };
    apply(w_prev_, w_cur_, std::min<Eigen::Index>(2, mi));
    for (std::size_t k = 1; k <= K; ++k) {
        const double coeff = 2.0 * bessel_[k];
        const Eigen::Index support = std::min<Eigen::Index>(static_cast<Eigen::Index>(k) + 1, mi);
        switch (k % 4) {
            case 0: c_re_.head(support) += coeff * w_cur_.head(support); break;
            case 1: c_im_.head(support) -= coeff * w_cur_.head(support); break;
            case 2: c_re_.head(support) -= coeff * w_cur_.head(support); break;
            case 3: c_im_.head(support) += coeff * w_cur_.head(support); break;
        }
        if (k == K) break;
        const Eigen::Index next_support = std::min<Eigen::Index>(support + 1, mi);
        apply(w_cur_, w_next_, next_support);
        w_next_.head(next_support) = 2.0 * w_next_.head(next_support) - w_prev_.head(next_support);
        std::swap(w_prev_, w_cur_);
        std::swap(w_cur_, w_next_);
    }
    const cplx c0(c_re_[0], c_im_[0]);
    const double r = std::sqrt(c_re_.tail(mi - 1).squaredNorm() + c_im_.tail(mi - 1).squaredNorm());
    u = c0 * u + r * eta_;
}

Moments unit_moments(const Grid1D& grid, const Eigen::VectorXcd& u) {
    const auto n = u.size();
    double m1 = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) m1 += std::norm(u[j]) * grid.x(static_cast<std::size_t>(j));
    double var = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double d = grid.x(static_cast<std::size_t>(j)) - m1;
        var += std::norm(u[j]) * d * d;
    }
    return {m1, std::sqrt(std::max(var, 0.0))};
}

WalkResult run_walk(const Eigen::VectorXcd& psi0, const WalkConfig& walk, const GUEConfig& gue,
                    const UnitPredicate& stop, Stream& stream, const Grid1D* trace_grid) {
    if (static_cast<std::size_t>(psi0.size()) != gue.dim)
        throw ConfigError("initial state dimension does not match the ensemble");
    if (walk.max_steps < 1) throw ConfigError("max_steps must be at least 1");
    RandomStepper stepper(gue.dim, gue.scale, walk.dt, walk.hbar, walk.propagator);
    WalkResult result;
    Eigen::VectorXcd u = psi0;
    if (trace_grid) result.trace.reserve(walk.max_steps);
    for (std::size_t step = 1; step <= walk.max_steps; ++step) {
        stepper.step(u, stream);
        const double n2 = u.squaredNorm();
        if (std::abs(n2 - 1.0) > 1e-12) {
            u /= std::sqrt(n2);
            ++result.renormalizations;
        }
        if (trace_grid) result.trace.push_back(unit_moments(*trace_grid, u));
        result.steps_used = step;
        if (stop(u)) {
            result.hit = true;
            break;
        }
    }
    result.final_state = std::move(u);
    return result;
}

WalkResult run_walk(const WaveFunction& psi0, const WalkConfig& walk, const GUEConfig& gue,
                    const std::function<bool(const Moments&)>& stop, Stream& stream,
                    bool record_trace) {
    const Grid1D& grid = psi0.grid();
    return run_walk(
        psi0.unit_vector(), walk, gue,
        [&](const Eigen::VectorXcd& u) { return stop(unit_moments(grid, u)); }, stream,
        record_trace ? &grid : nullptr);
}

double projected_step_rms(const Grid1D& grid, double sigma, const WalkConfig& walk, double scale,
                          std::size_t trials, std::uint64_t seed) {
    const double center = grid.x_min() + 0.5 * grid.length();
    require_padding(grid, center, sigma, "calibration reference state");
    const Eigen::VectorXcd u0 = gaussian_unit_vector(grid, center, 0.0, sigma, walk.hbar);
    const double mu0 = unit_moments(grid, u0).mu;
    RandomStepper stepper(grid.size(), scale, walk.dt, walk.hbar, walk.propagator);
    double acc = 0.0;
    Eigen::VectorXcd u;
    for (std::size_t i = 0; i < trials; ++i) {
        Stream stream = make_stream(seed, i);
        u = u0;
        stepper.step(u, stream);
        const double d = unit_moments(grid, u).mu - mu0;
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(trials));
}

double median_step_length(const Grid1D& grid, double sigma, const WalkConfig& walk, double scale,
                          std::size_t trials, std::uint64_t seed) {
    const double center = grid.x_min() + 0.5 * grid.length();
    require_padding(grid, center, sigma, "calibration reference state");
    const Eigen::VectorXcd u0 = gaussian_unit_vector(grid, center, 0.0, sigma, walk.hbar);
    RandomStepper stepper(grid.size(), scale, walk.dt, walk.hbar, walk.propagator);
    std::vector<double> lengths(trials);
    Eigen::VectorXcd u;
    for (std::size_t i = 0; i < trials; ++i) {
        Stream stream = make_stream(seed, i);
        u = u0;
        stepper.step(u, stream);
        lengths[i] = 2.0 * sigma * fs_distance_unit(u0, u);
    }
    return stats::median(std::move(lengths));
}

CalibrationResult calibrate_scale(const Grid1D& grid, double sigma, const WalkConfig& walk,
                                  std::size_t trials, std::uint64_t seed,
                                  CalibrationTarget target) {
    if (trials < 100) throw CalibrationError("calibration needs at least 100 trials");
    if (!(walk.dz > 0.0)) throw CalibrationError("target step dz must be positive");
    const bool rms_target = target == CalibrationTarget::rms_shift;
    // Hard ceilings: a projected shift cannot exceed the box, an FS step cannot exceed pi/2.
    const double ceiling = rms_target ? grid.length() : std::numbers::pi * sigma;
    if (walk.dz >= ceiling) {
        std::ostringstream msg;
        msg << "cannot reach dz=" << walk.dz << ": the one-step statistic is bounded by " << ceiling;
        throw CalibrationError(msg.str());
    }
    auto measure = [&](double s) {
        return rms_target ? projected_step_rms(grid, sigma, walk, s, trials, seed)
                          : median_step_length(grid, sigma, walk, s, trials, seed);
    };

    // Small-step estimates: rms shift = sqrt(2) sigma s dt / hbar and
    // FS step = sqrt(dim - 1) s dt / hbar.
    const double rate = rms_target ? std::sqrt(2.0) * sigma
                                   : 2.0 * sigma * std::sqrt(static_cast<double>(grid.size() - 1));
    const double guess = walk.dz * walk.hbar / (rate * walk.dt);
    double lo = 0.5 * guess, hi = 2.0 * guess;
    double r_lo = measure(lo), r_hi = measure(hi);
    int iters = 2;
    for (int k = 0; k < 60 && r_lo > walk.dz; ++k, ++iters) r_lo = measure(lo *= 0.5);
    for (int k = 0; k < 60 && r_hi < walk.dz; ++k, ++iters) r_hi = measure(hi *= 2.0);
    if (!(r_lo <= walk.dz && r_hi >= walk.dz)) {
        std::ostringstream msg;
        msg << "cannot bracket dz=" << walk.dz << ": step(" << lo << ")=" << r_lo << ", step("
            << hi << ")=" << r_hi << " (the one-step statistic saturates on this grid)";
        throw CalibrationError(msg.str());
    }
    CalibrationResult out;
    for (int k = 0; k < 100; ++k, ++iters) {
        const double mid = std::sqrt(lo * hi);
        const double r = measure(mid);
        out.scale = mid;
        out.step = r;
        if (std::abs(r - walk.dz) <= 1e-3 * walk.dz) break;
        if (r < walk.dz)
            lo = mid;
        else
            hi = mid;
    }
    out.iterations = iters;
    return out;
}

std::vector<double> single_step_distances(const Eigen::VectorXcd& u, const WalkConfig& walk,
                                          const GUEConfig& gue, std::size_t trials,
                                          std::uint64_t stream_offset) {
    RandomStepper stepper(gue.dim, gue.scale, walk.dt, walk.hbar, walk.propagator);
    std::vector<double> out(trials);
    Eigen::VectorXcd v;
    for (std::size_t i = 0; i < trials; ++i) {
        Stream stream = make_stream(gue.seed, stream_offset + i);
        v = u;
        stepper.step(v, stream);
        out[i] = fs_distance_unit(u, v);
    }
    return out;
}

double isotropy_statistic(const Eigen::VectorXcd& psi_a, const Eigen::VectorXcd& psi_b,
                          const WalkConfig& walk, const GUEConfig& gue, std::size_t trials) {
    auto da = single_step_distances(psi_a, walk, gue, trials, 0);
    auto db = single_step_distances(psi_b, walk, gue, trials, trials);
    return stats::ks_two_sample(std::move(da), std::move(db));
}

}  // namespace rmdyn
