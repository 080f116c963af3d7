#pragma once

#include <span>

namespace curio::stats {

double mean(std::span<const double> xs);
/// Population standard deviation (divides by n); 0 for fewer than two values.
double stddev(std::span<const double> xs);

/// One-sided Mann-Whitney U test of "a tends to be smaller than b".
/// Exact permutation p-value when C(n_a + n_b, n_a) <= 2e6, normal
/// approximation with continuity correction otherwise. Ties count 1/2.
double mann_whitney_less(std::span<const double> a, std::span<const double> b);

/// Asymptotic Kolmogorov-Smirnov p-value of a sample against Uniform(0, 1).
double ks_uniform_p(std::span<const double> xs);

/// Chi-square goodness-of-fit p-value of counts against a uniform distribution.
double chi_square_uniform_p(std::span<const double> counts);

}  // namespace curio::stats
