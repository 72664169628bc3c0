#include "rmdyn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "rmdyn/error.hpp"
#include "rmdyn/parallel.hpp"
#include "rmdyn/stats.hpp"

namespace rmdyn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

GUEConfig with_dim(GUEConfig gue, std::size_t dim) {
    gue.dim = dim;
    return gue;
}

Eigen::VectorXcd normalized_unit_vector(const WaveFunction& psi, const char* what) {
    if (std::abs(psi.norm2() - 1.0) > 1e-10)
        throw ConfigError(std::string(what) + " must be normalized");
    return psi.unit_vector();
}

void renormalize(Eigen::VectorXcd& u, std::size_t& count) {
    const double n2 = u.squaredNorm();
    if (std::abs(n2 - 1.0) > 1e-12) {
        u /= std::sqrt(n2);
        ++count;
    }
}

void add_walk_settings(ExperimentRecord& rec, const WalkConfig& walk, const GUEConfig& gue) {
    rec.set("dim", static_cast<std::int64_t>(gue.dim));
    rec.set("scale", gue.scale);
    rec.set("dt", walk.dt);
    rec.set("dz", walk.dz);
    rec.set("max_steps", static_cast<std::int64_t>(walk.max_steps));
    if (walk.propagator == Propagator::tridiagonal)
        rec.notes.push_back(
            "walk steps sampled through the Krylov tridiagonal form of the ensemble (exact in "
            "distribution)");
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// Moments of the two marginals of a column-major n_a x n_b unit vector.
std::pair<Moments, Moments> marginal_moments(const Grid1D& ga, const Grid1D& gb,
                                             const Eigen::VectorXcd& u) {
    const auto na = static_cast<Eigen::Index>(ga.size());
    const auto nb = static_cast<Eigen::Index>(gb.size());
    Eigen::Map<const Eigen::MatrixXcd> m(u.data(), na, nb);
    const Eigen::MatrixXd p = m.cwiseAbs2();
    const Eigen::VectorXd pa = p.rowwise().sum();
    const Eigen::VectorXd pb = p.colwise().sum().transpose();
    auto moments = [](const Grid1D& g, const Eigen::VectorXd& w) {
        double m1 = 0.0;
        for (Eigen::Index j = 0; j < w.size(); ++j) m1 += w[j] * g.x(static_cast<std::size_t>(j));
        double var = 0.0;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            const double d = g.x(static_cast<std::size_t>(j)) - m1;
            var += w[j] * d * d;
        }
        return Moments{m1, std::sqrt(std::max(var, 0.0))};
    };
    return {moments(ga, pa), moments(gb, pb)};
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

// ---------------------------------------------------------------------------
// Lattice

ClassLattice::ClassLattice(std::vector<double> centers, double sigma, double mu_tol)
    : centers_(std::move(centers)), sigma_(sigma), mu_tol_(mu_tol) {
    if (centers_.empty()) throw ConfigError("class lattice has no centers");
    if (!(sigma > 0.0)) throw ConfigError("class lattice sigma must be positive");
    if (!(mu_tol >= 0.0)) throw ConfigError("class lattice mu_tol must be nonnegative");
    for (std::size_t k = 1; k < centers_.size(); ++k)
        if (!(centers_[k] > centers_[k - 1]))
            throw ConfigError("class lattice centers must be strictly increasing");
}

ClassLattice ClassLattice::covering(const Grid1D& grid, double anchor, double spacing,
                                    double sigma, double mu_tol) {
    if (!(spacing > 0.0)) throw ConfigError("class lattice spacing must be positive");
    const double lo = grid.x_min() + kPaddingWidths * sigma;
    const double hi = grid.x_max() - kPaddingWidths * sigma;
    const auto k0 = static_cast<long long>(std::ceil((lo - anchor) / spacing - 1e-9));
    const auto k1 = static_cast<long long>(std::floor((hi - anchor) / spacing + 1e-9));
    if (k1 < k0) throw ConfigError("class lattice does not fit inside the padded grid interior");
    std::vector<double> centers;
    centers.reserve(static_cast<std::size_t>(k1 - k0 + 1));
    for (long long k = k0; k <= k1; ++k) centers.push_back(anchor + static_cast<double>(k) * spacing);
    return ClassLattice(std::move(centers), sigma, mu_tol);
}

double ClassLattice::coverage(const Grid1D& grid) const {
    const double lo = grid.x_min() + kPaddingWidths * sigma_;
    const double hi = grid.x_max() - kPaddingWidths * sigma_;
    if (!(hi > lo)) return 0.0;
    double covered = 0.0;
    for (std::size_t k = 0; k < centers_.size(); ++k) {
        const double left = k > 0 ? 0.5 * (centers_[k] - centers_[k - 1])
                                  : (centers_.size() > 1 ? 0.5 * (centers_[1] - centers_[0]) : 0.0);
        const double right = k + 1 < centers_.size()
                                 ? 0.5 * (centers_[k + 1] - centers_[k])
                                 : (centers_.size() > 1 ? left : 0.0);
        const double a = std::max(lo, centers_[k] - left);
        const double b = std::min(hi, centers_[k] + right);
        if (b > a) covered += b - a;
    }
    return covered / (hi - lo);
}

std::optional<std::size_t> ClassLattice::match(const Moments& m) const {
    if (!(m.delta <= sigma_)) return std::nullopt;
    const auto it = std::lower_bound(centers_.begin(), centers_.end(), m.mu);
    std::size_t best = static_cast<std::size_t>(it - centers_.begin());
    if (best == centers_.size() || (best > 0 && m.mu - centers_[best - 1] <= centers_[best] - m.mu))
        best = best > 0 ? best - 1 : 0;
    if (std::abs(m.mu - centers_[best]) <= mu_tol_) return best;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Born statistics

TrialOutcome first_hit(const Eigen::VectorXcd& u0, const Grid1D& grid, const ClassLattice& lattice,
                       const WalkConfig& walk, const GUEConfig& gue, Stream& stream,
                       Eigen::VectorXcd* final_state) {
    TrialOutcome out;
    out.hit_center = kNaN;
    out.delta_z_at_hit = kNaN;
    Moments last = unit_moments(grid, u0);
    if (auto k = lattice.match(last)) {
        out.hit = k;
        out.hit_center = lattice.centers()[*k];
        out.delta_z_at_hit = last.delta;
        if (final_state) *final_state = u0;
        return out;
    }
    const WalkResult r = run_walk(
        u0, walk, with_dim(gue, grid.size()),
        [&](const Eigen::VectorXcd& u) {
            last = unit_moments(grid, u);
            return lattice.match(last).has_value();
        },
        stream);
    if (final_state) *final_state = r.final_state;
    out.steps_to_hit = r.steps_used;
    out.renormalizations = r.renormalizations;
    if (r.hit) {
        out.hit = lattice.match(last);
        out.hit_center = lattice.centers()[*out.hit];
        out.delta_z_at_hit = last.delta;
    }
    return out;
}

Eigen::VectorXd born_targets(const WaveFunction& psi0, const ClassLattice& lattice, double hbar) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(lattice.size()));
    for (std::size_t k = 0; k < lattice.size(); ++k) {
        const WaveFunction g =
            gaussian_packet({lattice.centers()[k], 0.0, lattice.sigma()}, psi0.grid(), hbar);
        p[static_cast<Eigen::Index>(k)] = std::norm(inner(g, psi0));
    }
    if (!(p.maxCoeff() >= 1e-12))
        throw DegenerateStateError("state has no overlap above 1e-12 with any lattice class");
    return p / p.sum();
}

double visibility(const Eigen::VectorXd& pattern) {
    const auto n = pattern.size();
    if (n < 3) return 0.0;
    Eigen::Index imax = 0;
    const double top = pattern.maxCoeff(&imax);
    if (!(top > 0.0)) return 0.0;
    // A minimum counts as a fringe only if the pattern rises again by more than
    // this fraction of the maximum; round-off ripples in the tails are skipped.
    const double rise = 1e-3 * top;
    auto side = [&](int dir) -> double {
        double low = top;
        for (Eigen::Index j = imax + dir; j >= 0 && j < n; j += dir) {
            if (pattern[j] < low) low = pattern[j];
            else if (pattern[j] - low > rise) return low;
        }
        return kNaN;
    };
    const double l = side(-1), r = side(+1);
    double lo = kNaN;
    if (!std::isnan(l)) lo = l;
    if (!std::isnan(r)) lo = std::isnan(lo) ? r : std::min(lo, r);
    if (std::isnan(lo)) return 0.0;
    return (top - lo) / (top + lo);
}

ExperimentRecord run_born_experiment(const WaveFunction& psi0, const ClassLattice& lattice,
                                     const WalkConfig& walk, const GUEConfig& gue_in,
                                     const RunControl& control) {
    const Grid1D& grid = psi0.grid();
    const GUEConfig gue = with_dim(gue_in, grid.size());
    const Eigen::VectorXcd u0 = normalized_unit_vector(psi0, "initial state");
    const Eigen::VectorXd targets = born_targets(psi0, lattice, walk.hbar);

    std::vector<TrialOutcome> outcomes(control.trials);
    parallel_for(control.trials, control.threads, [&](std::size_t i) {
        Stream stream = make_stream(gue.seed, i);
        outcomes[i] = first_hit(u0, grid, lattice, walk, gue, stream);
    });

    ExperimentRecord rec;
    rec.kind = "born";
    rec.seed = gue.seed;
    rec.columns = {{"trial_index", true}, {"hit_center", false}, {"steps_to_hit", true},
                   {"delta_z_at_hit", false}};
    std::vector<double> counts(lattice.size(), 0.0);
    std::size_t hits = 0, renorms = 0;
    double steps_sum = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        rec.rows.push_back({static_cast<double>(i), o.hit_center, static_cast<double>(o.steps_to_hit),
                            o.delta_z_at_hit});
        renorms += o.renormalizations;
        if (o.hit) {
            ++hits;
            counts[*o.hit] += 1.0;
            steps_sum += static_cast<double>(o.steps_to_hit);
        }
    }
    std::vector<double> empirical(lattice.size(), kNaN);
    if (hits > 0)
        for (std::size_t k = 0; k < counts.size(); ++k) empirical[k] = counts[k] / static_cast<double>(hits);
    const std::vector<double> target = to_std(targets);
    const double tv = hits > 0 ? stats::total_variation(empirical, target) : kNaN;
    const double rate = control.trials > 0 ? static_cast<double>(hits) / static_cast<double>(control.trials) : kNaN;
    const auto ci = stats::wilson_interval(hits, control.trials);

    rec.set("trials", static_cast<std::int64_t>(control.trials));
    rec.set("hits", static_cast<std::int64_t>(hits));
    rec.set("hit_rate", rate);
    rec.set("hit_rate_ci_low", ci.first);
    rec.set("hit_rate_ci_high", ci.second);
    rec.set("total_variation", tv);
    rec.set("mean_steps_to_hit", hits > 0 ? steps_sum / static_cast<double>(hits) : kNaN);
    rec.set("renormalizations", static_cast<std::int64_t>(renorms));
    add_walk_settings(rec, walk, gue);
    rec.set_series("centers", lattice.centers());
    rec.set_series("target", target);
    rec.set_series("empirical", empirical);
    if (!(rate >= 0.5))
        rec.notes.push_back("warning: under-converged walk, hit rate " + fmt(rate) + " below 0.5");
    return rec;
}

ExperimentRecord run_half_probability(const WaveFunction& psi0, double sigma,
                                      const WalkConfig& walk_in, const GUEConfig& gue_in,
                                      const RunControl& control, double t_obs) {
    if (!(sigma > 0.0)) throw ConfigError("half-probability sigma must be positive");
    const auto steps = static_cast<std::size_t>(std::llround(t_obs / walk_in.dt));
    if (steps < 100) throw ConfigError("t_obs must cover at least 100 walk steps");
    const Grid1D& grid = psi0.grid();
    const GUEConfig gue = with_dim(gue_in, grid.size());
    WalkConfig walk = walk_in;
    walk.max_steps = steps;
    const Eigen::VectorXcd u0 = normalized_unit_vector(psi0, "initial state");

    std::vector<double> final_delta(control.trials);
    std::vector<std::size_t> renorms(control.trials);
    parallel_for(control.trials, control.threads, [&](std::size_t i) {
        Stream stream = make_stream(gue.seed, i);
        const WalkResult r = run_walk(u0, walk, gue, [](const Eigen::VectorXcd&) { return false; }, stream);
        final_delta[i] = unit_moments(grid, r.final_state).delta;
        renorms[i] = r.renormalizations;
    });

    ExperimentRecord rec;
    rec.kind = "half_prob";
    rec.seed = gue.seed;
    rec.columns = {{"trial_index", true}, {"delta_z_final", false}, {"within_sigma", true}};
    std::size_t within = 0, renorm_total = 0;
    for (std::size_t i = 0; i < control.trials; ++i) {
        const bool in = final_delta[i] <= sigma;
        within += in ? 1 : 0;
        renorm_total += renorms[i];
        rec.rows.push_back({static_cast<double>(i), final_delta[i], in ? 1.0 : 0.0});
    }
    const auto ci = stats::wilson_interval(within, control.trials);
    rec.set("trials", static_cast<std::int64_t>(control.trials));
    rec.set("steps", static_cast<std::int64_t>(steps));
    rec.set("sigma", sigma);
    rec.set("frequency", control.trials > 0 ? static_cast<double>(within) / static_cast<double>(control.trials) : kNaN);
    rec.set("frequency_ci_low", ci.first);
    rec.set("frequency_ci_high", ci.second);
    rec.set("mean_delta_z_final", stats::mean(final_delta));
    rec.set("renormalizations", static_cast<std::int64_t>(renorm_total));
    add_walk_settings(rec, walk, gue);
    rec.set_series("delta_z_final", final_delta);
    return rec;
}

// ---------------------------------------------------------------------------
// Constrained Brownian motion

ExperimentRecord run_constrained_brownian(const Grid1D& grid, double start,
                                          const ClassLattice& lattice, const WalkConfig& walk,
                                          const GUEConfig& gue_in, const RunControl& control,
                                          std::size_t n_records) {
    if (n_records < 1) throw ConfigError("n_records must be at least 1");
    const GUEConfig gue = with_dim(gue_in, grid.size());
    const double sigma = lattice.sigma();
    require_padding(grid, start, sigma, "brownian start state");

    struct Chain {
        std::vector<double> increments;
        std::vector<double> intervals;
        bool starved = false;
        bool left_box = false;
        std::size_t renorms = 0;
    };
    std::vector<Chain> chains(control.trials);
    parallel_for(control.trials, control.threads, [&](std::size_t i) {
        Chain& ch = chains[i];
        Stream stream = make_stream(gue.seed, i);
        RandomStepper stepper(gue.dim, gue.scale, walk.dt, walk.hbar, walk.propagator);
        Eigen::VectorXcd u = gaussian_unit_vector(grid, start, 0.0, sigma, walk.hbar);
        double mu_prev = unit_moments(grid, u).mu;
        while (ch.increments.size() < n_records) {
            std::size_t steps = 0;
            std::optional<Moments> rec_m;
            while (steps < walk.max_steps) {
                stepper.step(u, stream);
                renormalize(u, ch.renorms);
                ++steps;
                const Moments m = unit_moments(grid, u);
                if (lattice.match(m)) {
                    rec_m = m;
                    break;
                }
            }
            if (!rec_m) {
                ch.starved = true;
                return;
            }
            ch.increments.push_back(rec_m->mu - mu_prev);
            ch.intervals.push_back(static_cast<double>(steps) * walk.dt);
            if (!fits_padding(grid, rec_m->mu, sigma)) {
                ch.left_box = true;
                return;
            }
            u = gaussian_unit_vector(grid, rec_m->mu, 0.0, sigma, walk.hbar);
            mu_prev = unit_moments(grid, u).mu;
        }
    });

    ExperimentRecord rec;
    rec.kind = "brownian";
    rec.seed = gue.seed;
    rec.columns = {{"trial_index", true}, {"records", true}, {"elapsed_time", false},
                   {"displacement", false}, {"starved", true}};
    std::vector<double> inc, dts, z;
    std::size_t starved = 0, left = 0, renorms = 0;
    const double D = walk.diffusion();
    for (std::size_t i = 0; i < chains.size(); ++i) {
        const Chain& ch = chains[i];
        double elapsed = 0.0, disp = 0.0;
        for (std::size_t r = 0; r < ch.increments.size(); ++r) {
            elapsed += ch.intervals[r];
            disp += ch.increments[r];
            inc.push_back(ch.increments[r]);
            dts.push_back(ch.intervals[r]);
            z.push_back(ch.increments[r] / std::sqrt(D * ch.intervals[r]));
        }
        starved += ch.starved ? 1 : 0;
        left += ch.left_box ? 1 : 0;
        renorms += ch.renorms;
        rec.rows.push_back({static_cast<double>(i), static_cast<double>(ch.increments.size()), elapsed,
                            disp, ch.starved ? 1.0 : 0.0});
    }
    double sq = 0.0, total_t = 0.0;
    for (std::size_t r = 0; r < inc.size(); ++r) {
        sq += inc[r] * inc[r];
        total_t += dts[r];
    }
    const double var_rate = total_t > 0.0 ? sq / total_t : kNaN;
    const double n = static_cast<double>(inc.size());
    const double ks = inc.empty() ? kNaN : stats::ks_one_sample(z, stats::normal_cdf);

    rec.set("trials", static_cast<std::int64_t>(control.trials));
    rec.set("n_records", static_cast<std::int64_t>(n_records));
    rec.set("increments", static_cast<std::int64_t>(inc.size()));
    rec.set("increment_mean", inc.empty() ? kNaN : stats::mean(inc));
    rec.set("increment_stderr", inc.size() > 1 ? std::sqrt(stats::variance(inc) / n) : kNaN);
    rec.set("mean_interval", dts.empty() ? kNaN : stats::mean(dts));
    rec.set("variance_per_time", var_rate);
    rec.set("diffusion_target", D);
    rec.set("relative_error", std::abs(var_rate / D - 1.0));
    rec.set("ks_statistic", ks);
    rec.set("ks_critical_1pct", inc.empty() ? kNaN : stats::ks_critical(0.01, inc.size()));
    rec.set("starved_chains", static_cast<std::int64_t>(starved));
    rec.set("chains_left_box", static_cast<std::int64_t>(left));
    rec.set("renormalizations", static_cast<std::int64_t>(renorms));
    add_walk_settings(rec, walk, gue);
    rec.set_series("increments", inc);
    rec.set_series("intervals", dts);
    rec.set_series("standardized", z);
    if (starved > 0)
        rec.notes.push_back("warning: record starvation in " + std::to_string(starved) +
                            " chains; attained " + std::to_string(inc.size()) + " of " +
                            std::to_string(n_records * control.trials) + " records");
    if (left > 0)
        rec.notes.push_back("warning: " + std::to_string(left) +
                            " chains stopped when the recorded point left the padded interior");
    return rec;
}

// ---------------------------------------------------------------------------
// Quantum-classical transition

ExperimentRecord run_qct(const Grid1D& grid, const QctSetup& setup, const ClassLattice& lattice,
                         const WalkConfig& walk, const GUEConfig& gue_in,
                         const RunControl& control) {
    if (setup.kick_every < 1) throw ConfigError("kick_every must be at least 1");
    if (!(setup.substep_dt > 0.0) || !(setup.horizon > 0.0))
        throw ConfigError("substep_dt and horizon must be positive");
    const GUEConfig gue = with_dim(gue_in, grid.size());
    const double sigma_p = setup.packet.sigma;
    const double hbar = setup.particle.hbar;
    const auto n_sub = static_cast<std::size_t>(std::llround(setup.horizon / setup.substep_dt));
    const std::size_t cycles = n_sub / setup.kick_every;
    if (cycles < 1) throw ConfigError("horizon shorter than one kick cycle");
    const auto orbit = newton_trajectory({setup.packet.a, setup.packet.p}, setup.potential,
                                         setup.particle, setup.substep_dt, cycles * setup.kick_every);
    const WaveFunction psi0 = gaussian_packet(setup.packet, grid, hbar);
    const double sqdx = std::sqrt(grid.dx());

    struct Trial {
        std::vector<double> times, mus, residuals;
        PropagationLog log;
        bool left_box = false;
        std::size_t renorms = 0;
    };
    std::vector<Trial> trials(control.trials);
    parallel_for(control.trials, control.threads, [&](std::size_t i) {
        Trial& tr = trials[i];
        Stream stream = make_stream(gue.seed, i);
        SplitStepPropagator prop(grid, setup.potential, setup.particle, setup.substep_dt);
        RandomStepper stepper(gue.dim, gue.scale, walk.dt, walk.hbar, walk.propagator);
        Eigen::VectorXcd amp = psi0.amp();
        Eigen::VectorXcd u;
        for (std::size_t c = 1; c <= cycles; ++c) {
            for (std::size_t s = 0; s < setup.kick_every; ++s) prop.step(amp, &tr.log);
            u = amp * sqdx;
            stepper.step(u, stream);
            renormalize(u, tr.renorms);
            const Moments m = unit_moments(grid, u);
            amp = u / sqdx;
            if (!lattice.match(m)) continue;
            const std::size_t idx = c * setup.kick_every;
            tr.times.push_back(static_cast<double>(idx) * setup.substep_dt);
            tr.mus.push_back(m.mu);
            tr.residuals.push_back(m.mu - orbit[idx].a);
            if (!fits_padding(grid, m.mu, sigma_p)) {
                tr.left_box = true;
                return;
            }
            const double p = momentum_expectation(WaveFunction(grid, amp), hbar);
            amp = gaussian_packet({m.mu, p, sigma_p}, grid, hbar).amp();
        }
    });

    ExperimentRecord rec;
    rec.kind = "qct";
    rec.seed = gue.seed;
    rec.columns = {{"trial_index", true}, {"records", true}, {"final_time", false},
                   {"final_residual", false}, {"boundary_warning", true}};
    std::vector<double> all_t, all_mu, all_res, finals;
    std::size_t boundary = 0, left = 0, renorms = 0;
    double edge = 0.0;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const Trial& tr = trials[i];
        all_t.insert(all_t.end(), tr.times.begin(), tr.times.end());
        all_mu.insert(all_mu.end(), tr.mus.begin(), tr.mus.end());
        all_res.insert(all_res.end(), tr.residuals.begin(), tr.residuals.end());
        const double fin = tr.residuals.empty() ? kNaN : tr.residuals.back();
        if (!tr.residuals.empty()) finals.push_back(fin);
        boundary += tr.log.boundary_contamination ? 1 : 0;
        left += tr.left_box ? 1 : 0;
        renorms += tr.renorms;
        edge = std::max(edge, tr.log.max_edge_density);
        rec.rows.push_back({static_cast<double>(i), static_cast<double>(tr.times.size()),
                            tr.times.empty() ? kNaN : tr.times.back(), fin,
                            tr.log.boundary_contamination ? 1.0 : 0.0});
    }
    const double mean = all_res.empty() ? kNaN : stats::mean(all_res);
    double ks = kNaN;
    if (finals.size() > 2) {
        const double fm = stats::mean(finals);
        const double fs = std::sqrt(stats::variance(finals));
        if (fs > 0.0) {
            std::vector<double> zs(finals.size());
            for (std::size_t k = 0; k < finals.size(); ++k) zs[k] = (finals[k] - fm) / fs;
            ks = stats::ks_one_sample(zs, stats::normal_cdf);
        }
    }
    rec.set("trials", static_cast<std::int64_t>(control.trials));
    rec.set("records", static_cast<std::int64_t>(all_res.size()));
    rec.set("trials_with_records", static_cast<std::int64_t>(finals.size()));
    rec.set("residual_mean", mean);
    rec.set("residual_sd", all_res.size() > 1 ? std::sqrt(stats::variance(all_res)) : kNaN);
    rec.set("bias_over_sigma", std::abs(mean) / sigma_p);
    rec.set("final_residual_mean", finals.empty() ? kNaN : stats::mean(finals));
    rec.set("final_residual_sd", finals.size() > 1 ? std::sqrt(stats::variance(finals)) : kNaN);
    rec.set("ks_statistic", ks);
    rec.set("ks_critical_5pct", finals.empty() ? kNaN : stats::ks_critical(0.05, finals.size()));
    rec.set("max_edge_density", edge);
    rec.set("renormalizations", static_cast<std::int64_t>(renorms));
    add_walk_settings(rec, walk, gue);
    rec.set_series("record_time", all_t);
    rec.set_series("record_mu", all_mu);
    rec.set_series("record_residual", all_res);
    {
        std::vector<double> nt, na;
        const std::size_t stride = std::max<std::size_t>(1, orbit.size() / 400);
        for (std::size_t k = 0; k < orbit.size(); k += stride) {
            nt.push_back(static_cast<double>(k) * setup.substep_dt);
            na.push_back(orbit[k].a);
        }
        rec.set_series("newton_time", nt);
        rec.set_series("newton_a", na);
    }
    rec.notes.push_back("normality tested on per-trial final residuals standardized by their sample "
                        "mean and deviation");
    if (boundary > 0)
        rec.notes.push_back("warning: boundary contamination in " + std::to_string(boundary) + " trials");
    if (left > 0)
        rec.notes.push_back("warning: " + std::to_string(left) + " trials stopped outside the padded interior");
    return rec;
}

// ---------------------------------------------------------------------------
// Double slit

ExperimentRecord run_double_slit(const Grid1D& grid, const DoubleSlitSetup& setup,
                                 const ClassLattice& slit_lattice,
                                 const ClassLattice& screen_lattice, const WalkConfig& walk,
                                 const GUEConfig& gue_in, const RunControl& control) {
    const double hbar = setup.particle.hbar;
    const GUEConfig gue = with_dim(gue_in, grid.size());
    if (setup.slit_a.p != setup.slit_b.p) throw ConfigError("slit packets must share their momentum");
    const WaveFunction ga = gaussian_packet(setup.slit_a, grid, hbar);
    const WaveFunction gb = gaussian_packet(setup.slit_b, grid, hbar);
    const double overlap = std::norm(inner(ga, gb));
    if (!(overlap < 1e-6))
        throw ConfigError("slit packets overlap: |<a,b>|^2 = " + fmt(overlap) + " is not below 1e-6");
    const WaveFunction psi0 = normalize(superpose({1.0, 1.0}, {ga, gb}));
    const auto n_prop = static_cast<std::size_t>(std::llround(setup.screen_time / setup.propagation_dt));
    const PotentialSpec free = PotentialSpec::free_space();
    PropagationLog base_log;
    const WaveFunction psi_screen =
        split_step_propagate(psi0, free, setup.particle, setup.propagation_dt, n_prop, &base_log);
    const Eigen::VectorXd coherent_pattern = born_targets(psi_screen, screen_lattice, hbar);
    const Eigen::VectorXcd u_screen = psi_screen.unit_vector();

    struct Trial {
        TrialOutcome slit;
        TrialOutcome screen;
        Eigen::VectorXd pattern;
        PropagationLog log;
    };
    std::vector<Trial> trials(control.trials);
    parallel_for(control.trials, control.threads, [&](std::size_t i) {
        Trial& tr = trials[i];
        Stream stream = make_stream(gue.seed, i);
        if (!setup.measure_at_slits) {
            tr.screen = first_hit(u_screen, grid, screen_lattice, walk, gue, stream);
            return;
        }
        Eigen::VectorXcd walked;
        tr.slit = first_hit(psi0.unit_vector(), grid, slit_lattice, walk, gue, stream, &walked);
        // Unresolved at the slits: continue from where the walk stopped.
        WaveFunction state = tr.slit.hit
            ? gaussian_packet({tr.slit.hit_center, setup.slit_a.p, slit_lattice.sigma()}, grid, hbar)
            : WaveFunction::from_unit_vector(grid, walked / walked.norm());
        const WaveFunction at_screen =
            split_step_propagate(state, free, setup.particle, setup.propagation_dt, n_prop, &tr.log);
        tr.pattern = born_targets(at_screen, screen_lattice, hbar);
        tr.screen = first_hit(at_screen.unit_vector(), grid, screen_lattice, walk, gue, stream);
    });

    ExperimentRecord rec;
    rec.kind = "double_slit";
    rec.seed = gue.seed;
    rec.columns = {{"trial_index", true}, {"slit_hit_center", false}, {"screen_hit_center", false},
                   {"steps_to_hit", true}};
    Eigen::VectorXd pattern = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(screen_lattice.size()));
    std::vector<double> hist(screen_lattice.size(), 0.0);
    std::size_t slit_hits = 0, screen_hits = 0, boundary = base_log.boundary_contamination ? 1 : 0;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const Trial& tr = trials[i];
        if (setup.measure_at_slits) {
            pattern += tr.pattern;
            slit_hits += tr.slit.hit ? 1 : 0;
            boundary += tr.log.boundary_contamination ? 1 : 0;
        }
        if (tr.screen.hit) {
            ++screen_hits;
            hist[*tr.screen.hit] += 1.0;
        }
        rec.rows.push_back({static_cast<double>(i), setup.measure_at_slits ? tr.slit.hit_center : kNaN,
                            tr.screen.hit_center, static_cast<double>(tr.screen.steps_to_hit)});
    }
    if (setup.measure_at_slits) {
        if (control.trials > 0) pattern /= static_cast<double>(control.trials);
    } else {
        pattern = coherent_pattern;
    }
    const double vis_target = visibility(pattern);
    double vis_emp = kNaN;
    if (screen_hits > 0) {
        Eigen::Map<const Eigen::VectorXd> h(hist.data(), static_cast<Eigen::Index>(hist.size()));
        vis_emp = visibility(h / static_cast<double>(screen_hits));
    }
    rec.set("trials", static_cast<std::int64_t>(control.trials));
    rec.set("measure_at_slits", setup.measure_at_slits);
    rec.set("slit_overlap", overlap);
    rec.set("slit_hit_rate", setup.measure_at_slits && control.trials > 0
                                 ? static_cast<double>(slit_hits) / static_cast<double>(control.trials)
                                 : kNaN);
    rec.set("screen_hit_rate", control.trials > 0 ? static_cast<double>(screen_hits) / static_cast<double>(control.trials) : kNaN);
    rec.set("visibility_target", vis_target);
    rec.set("visibility_empirical", vis_emp);
    rec.set("visibility_coherent", visibility(coherent_pattern));
    add_walk_settings(rec, walk, gue);
    rec.set_series("centers", screen_lattice.centers());
    rec.set_series("target_pattern", to_std(pattern));
    rec.set_series("empirical", hist);
    if (boundary > 0) rec.notes.push_back("warning: boundary contamination during free propagation");
    if (setup.measure_at_slits && slit_hits < control.trials)
        rec.notes.push_back("warning: " + std::to_string(control.trials - slit_hits) +
                            " trials unresolved at the slits; their walked state was propagated");
    if (screen_hits * 2 < control.trials)
        rec.notes.push_back("warning: under-converged screen walk, hit rate below 0.5");
    return rec;
}

// ---------------------------------------------------------------------------
// EPR pair

ExperimentRecord run_epr(const WaveFunction2& psi0, const ClassLattice& lattice_a,
                         const ClassLattice& lattice_b, const ClassLattice& lattice_b_alt,
                         const WalkConfig& walk, const GUEConfig& gue_in,
                         const RunControl& control) {
    const Grid1D& ga = psi0.grid_a();
    const Grid1D& gb = psi0.grid_b();
    const GUEConfig gue = with_dim(gue_in, ga.size() * gb.size());
    if (std::abs(psi0.norm2() - 1.0) > 1e-10) throw ConfigError("joint state must be normalized");
    const Eigen::VectorXcd u0 = psi0.unit_vector();
    const std::size_t na = lattice_a.size(), nb = lattice_b.size();

    // Born targets over lattice pairs.
    Eigen::MatrixXd target(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(nb));
    {
        std::vector<Eigen::VectorXcd> ra, rb;
        for (double c : lattice_a.centers())
            ra.push_back(gaussian_packet({c, 0.0, lattice_a.sigma()}, ga, walk.hbar).amp());
        for (double d : lattice_b.centers())
            rb.push_back(gaussian_packet({d, 0.0, lattice_b.sigma()}, gb, walk.hbar).amp());
        const double w = ga.dx() * gb.dx();
        for (std::size_t j = 0; j < na; ++j)
            for (std::size_t k = 0; k < nb; ++k)
                target(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
                    std::norm(ra[j].dot(psi0.amp() * rb[k].conjugate()) * w);
        if (!(target.maxCoeff() >= 1e-12))
            throw DegenerateStateError("joint state has no overlap with any lattice pair");
        target /= target.sum();
    }

    struct Pair {
        std::optional<std::size_t> a, b;
        std::size_t steps = 0;
    };
    auto run_pass = [&](const ClassLattice& lb) {
        std::vector<Pair> out(control.trials);
        parallel_for(control.trials, control.threads, [&](std::size_t i) {
            Stream stream = make_stream(gue.seed, i);
            std::optional<std::size_t> ka, kb;
            auto stop = [&](const Eigen::VectorXcd& u) {
                const auto [ma, mb] = marginal_moments(ga, gb, u);
                ka = lattice_a.match(ma);
                kb = lb.match(mb);
                return ka.has_value() && kb.has_value();
            };
            Pair& p = out[i];
            if (stop(u0)) {
                p = {ka, kb, 0};
                return;
            }
            const WalkResult r = run_walk(u0, walk, gue, stop, stream);
            p.steps = r.steps_used;
            if (r.hit) {
                p.a = ka;
                p.b = kb;
            }
        });
        return out;
    };
    const std::vector<Pair> pass = run_pass(lattice_b);
    const std::vector<Pair> pass_alt = run_pass(lattice_b_alt);

    ExperimentRecord rec;
    rec.kind = "epr";
    rec.seed = gue.seed;
    rec.columns = {{"trial_index", true}, {"hit_center_a", false}, {"hit_center_b", false},
                   {"steps_to_hit", true}};
    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(nb));
    std::vector<double> xa, xb, marg(na, 0.0), marg_alt(na, 0.0);
    std::size_t hits = 0, hits_alt = 0;
    for (std::size_t i = 0; i < pass.size(); ++i) {
        const Pair& p = pass[i];
        const bool hit = p.a && p.b;
        if (hit) {
            ++hits;
            joint(static_cast<Eigen::Index>(*p.a), static_cast<Eigen::Index>(*p.b)) += 1.0;
            xa.push_back(lattice_a.centers()[*p.a]);
            xb.push_back(lattice_b.centers()[*p.b]);
            marg[*p.a] += 1.0;
        }
        if (pass_alt[i].a && pass_alt[i].b) {
            ++hits_alt;
            marg_alt[*pass_alt[i].a] += 1.0;
        }
        rec.rows.push_back({static_cast<double>(i), hit ? lattice_a.centers()[*p.a] : kNaN,
                            hit ? lattice_b.centers()[*p.b] : kNaN, static_cast<double>(p.steps)});
    }
    double joint_tv = kNaN, diag_mass = kNaN, marg_tv = kNaN, corr = kNaN;
    Eigen::MatrixXd emp = joint;
    if (hits > 0) {
        emp /= static_cast<double>(hits);
        joint_tv = 0.5 * (emp - target).cwiseAbs().sum();
        // Mass on the cells the Born targets occupy (target >= 1% each).
        diag_mass = 0.0;
        for (Eigen::Index j = 0; j < target.rows(); ++j)
            for (Eigen::Index k = 0; k < target.cols(); ++k)
                if (target(j, k) >= 0.01) diag_mass += emp(j, k);
        if (hits > 1) corr = stats::pearson(xa, xb);
    } else {
        emp.setConstant(kNaN);
    }
    if (hits > 0 && hits_alt > 0) {
        for (auto& v : marg) v /= static_cast<double>(hits);
        for (auto& v : marg_alt) v /= static_cast<double>(hits_alt);
        marg_tv = stats::total_variation(marg, marg_alt);
    }
    const double rate = control.trials > 0 ? static_cast<double>(hits) / static_cast<double>(control.trials) : kNaN;
    rec.set("trials", static_cast<std::int64_t>(control.trials));
    rec.set("hits", static_cast<std::int64_t>(hits));
    rec.set("hit_rate", rate);
    rec.set("hit_rate_alt", control.trials > 0 ? static_cast<double>(hits_alt) / static_cast<double>(control.trials) : kNaN);
    rec.set("target_support_mass", diag_mass);
    rec.set("joint_total_variation", joint_tv);
    rec.set("outcome_correlation", corr);
    rec.set("marginal_a_total_variation_alt", marg_tv);
    add_walk_settings(rec, walk, gue);
    rec.set_series("centers_a", lattice_a.centers());
    rec.set_series("centers_b", lattice_b.centers());
    rec.set_series("joint_target", std::vector<double>(target.data(), target.data() + target.size()));
    rec.set_series("joint_empirical", std::vector<double>(emp.data(), emp.data() + emp.size()));
    rec.notes.push_back("joint series are column-major over (centers_a, centers_b)");
    rec.notes.push_back("no-signaling check compares the A marginal between B resolutions " +
                        fmt(lattice_b.sigma()) + " and " + fmt(lattice_b_alt.sigma()));
    if (!(rate >= 0.3))
        rec.notes.push_back("warning: under-converged walk, hit rate " + fmt(rate) + " below 0.3");
    return rec;
}

// ---------------------------------------------------------------------------
// Zeno monitoring

ExperimentRecord run_zeno(const Grid1D& grid, const EquivalenceClassSpec& cls,
                          const WalkConfig& walk, const GUEConfig& gue_in, const RunControl& control,
                          const std::vector<double>& kick_intervals, double horizon) {
    if (kick_intervals.empty()) throw ConfigError("zeno sweep needs at least one kick interval");
    if (!(horizon > 0.0)) throw ConfigError("zeno horizon must be positive");
    const GUEConfig gue = with_dim(gue_in, grid.size());
    require_padding(grid, cls.c, cls.sigma, "zeno representative");
    const Eigen::VectorXcd rep = gaussian_unit_vector(grid, cls.c, 0.0, cls.sigma, walk.hbar);
    const std::size_t nt = control.trials;

    ExperimentRecord rec;
    rec.kind = "zeno";
    rec.seed = gue.seed;
    rec.columns = {{"trial_index", true}, {"interval_index", true}, {"dt", false},
                   {"survived", true}, {"restarts", true}};
    std::vector<double> survival, stderr_v, steps_v;
    for (std::size_t k = 0; k < kick_intervals.size(); ++k) {
        const double dt = kick_intervals[k];
        if (!(dt > 0.0)) throw ConfigError("kick intervals must be positive");
        const auto steps = std::max<long long>(1, std::llround(horizon / dt));
        std::vector<char> alive(nt);
        std::vector<std::size_t> restarts(nt);
        parallel_for(nt, control.threads, [&](std::size_t i) {
            Stream stream = make_stream(gue.seed, k * nt + i);
            RandomStepper stepper(gue.dim, gue.scale, dt, walk.hbar, walk.propagator);
            Eigen::VectorXcd u = rep;
            bool in = true;
            std::size_t renorms = 0;
            for (long long s = 0; s < steps; ++s) {
                stepper.step(u, stream);
                renormalize(u, renorms);
                const Moments m = unit_moments(grid, u);
                in = class_membership(m, cls);
                if (in && s + 1 < steps) {
                    u = gaussian_unit_vector(grid, m.mu, 0.0, cls.sigma, walk.hbar);
                    ++restarts[i];
                }
            }
            alive[i] = in ? 1 : 0;
        });
        std::size_t survived = 0;
        for (std::size_t i = 0; i < nt; ++i) {
            survived += alive[i] ? 1 : 0;
            rec.rows.push_back({static_cast<double>(i), static_cast<double>(k), dt,
                                alive[i] ? 1.0 : 0.0, static_cast<double>(restarts[i])});
        }
        const double f = nt > 0 ? static_cast<double>(survived) / static_cast<double>(nt) : kNaN;
        survival.push_back(f);
        stderr_v.push_back(nt > 0 ? std::sqrt(f * (1.0 - f) / static_cast<double>(nt)) : kNaN);
        steps_v.push_back(static_cast<double>(steps));
    }
    bool monotone = true;
    for (std::size_t k = 1; k < survival.size(); ++k) {
        const double se = std::hypot(stderr_v[k], stderr_v[k - 1]);
        if (survival[k] > survival[k - 1] + 2.0 * se) monotone = false;
    }
    rec.set("trials", static_cast<std::int64_t>(nt));
    rec.set("horizon", horizon);
    rec.set("monotone_nonincreasing", monotone);
    rec.set("survival_min", *std::min_element(survival.begin(), survival.end()));
    rec.set("survival_max", *std::max_element(survival.begin(), survival.end()));
    add_walk_settings(rec, walk, gue);
    rec.set_series("kick_intervals", kick_intervals);
    rec.set_series("survival", survival);
    rec.set_series("survival_stderr", stderr_v);
    rec.set_series("steps", steps_v);
    rec.notes.push_back("ensemble scale held fixed across kick intervals");
    return rec;
}

// ---------------------------------------------------------------------------
// Device product form

ExperimentRecord run_device_product_form(const WaveFunction& phi0, const Grid1D& device_grid,
                                         const std::vector<double>& device_sigmas,
                                         const WalkConfig& walk, const GUEConfig& gue_in,
                                         const RunControl& control) {
    if (device_sigmas.empty()) throw ConfigError("device sigma list is empty");
    if (std::abs(phi0.norm2() - 1.0) > 1e-10) throw ConfigError("system state must be normalized");
    const Grid1D& gs = phi0.grid();
    const GUEConfig gue = with_dim(gue_in, gs.size() * device_grid.size());
    const double center = device_grid.x_min() + 0.5 * device_grid.length();
    const std::size_t nt = control.trials;
    const auto ns = static_cast<Eigen::Index>(gs.size());
    const auto nd = static_cast<Eigen::Index>(device_grid.size());

    ExperimentRecord rec;
    rec.kind = "product_form";
    rec.seed = gue.seed;
    rec.columns = {{"trial_index", true}, {"sigma_index", true}, {"sigma_d", false},
                   {"entanglement", false}};
    std::vector<double> medians, means;
    for (std::size_t k = 0; k < device_sigmas.size(); ++k) {
        const double sd = device_sigmas[k];
        const WaveFunction dev = gaussian_packet({center, 0.0, sd}, device_grid, walk.hbar);
        const Eigen::VectorXcd u0 = tensor(phi0, dev).unit_vector();
        std::vector<double> ent(nt);
        parallel_for(nt, control.threads, [&](std::size_t i) {
            Stream stream = make_stream(gue.seed, k * nt + i);
            RandomStepper stepper(gue.dim, gue.scale, walk.dt, walk.hbar, walk.propagator);
            Eigen::VectorXcd u = u0;
            stepper.step(u, stream);
            u /= u.norm();
            Eigen::Map<const Eigen::MatrixXcd> m(u.data(), ns, nd);
            Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
            const double l1 = svd.singularValues()[0];
            ent[i] = std::max(0.0, 1.0 - l1 * l1);
        });
        for (std::size_t i = 0; i < nt; ++i)
            rec.rows.push_back({static_cast<double>(i), static_cast<double>(k), sd, ent[i]});
        means.push_back(stats::mean(ent));
        medians.push_back(stats::median(ent));
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < medians.size(); ++k)
        if (!(medians[k] < medians[k - 1])) decreasing = false;
    rec.set("trials", static_cast<std::int64_t>(nt));
    rec.set("strictly_decreasing", decreasing);
    add_walk_settings(rec, walk, gue);
    rec.set_series("device_sigmas", device_sigmas);
    rec.set_series("median_entanglement", medians);
    rec.set_series("mean_entanglement", means);
    rec.notes.push_back("entanglement measured as 1 - lambda_1^2 after one step on the joint space");
    return rec;
}

}  // namespace rmdyn
