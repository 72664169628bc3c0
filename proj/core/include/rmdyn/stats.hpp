#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace rmdyn::stats {

double mean(std::span<const double> xs);
/// Unbiased sample variance; 0 for fewer than two samples.
double variance(std::span<const double> xs);
double median(std::vector<double> xs);
double pearson(std::span<const double> xs, std::span<const double> ys);

double normal_cdf(double z);

/// sup |F_a - F_b| over the pooled sample.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// sup |F_n - cdf|.
double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);

/// Asymptotic KS critical values: c(alpha) sqrt(1/n) and c(alpha) sqrt((n+m)/(nm)),
/// with c(alpha) = sqrt(-ln(alpha/2)/2).
double ks_critical(double alpha, std::size_t n);
double ks_critical(double alpha, std::size_t n, std::size_t m);

/// Wilson score interval at z standard errors.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z = 1.96);

/// Total variation distance 0.5 * sum |p - q|.
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace rmdyn::stats
