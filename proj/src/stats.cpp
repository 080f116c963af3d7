#include "curio/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace curio::stats {

namespace {

double u_statistic(std::span<const double> a, std::span<const double> b) {
    double u = 0.0;
    for (double x : a)
        for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    return u;
}

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

}  // namespace

double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean of an empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

double mann_whitney_less(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_less: empty sample");
    const double u = u_statistic(a, b);
    const std::size_t na = a.size(), nb = b.size(), n = na + nb;

    if (binomial(n, na) <= 2e6) {
        // Enumerate every assignment of the pooled values to group a.
        std::vector<double> pooled(a.begin(), a.end());
        pooled.insert(pooled.end(), b.begin(), b.end());
        std::vector<bool> pick(n, false);
        std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(na), true);
        std::size_t total = 0, at_most = 0;
        std::vector<double> ga, gb;
        do {
            ga.clear();
            gb.clear();
            for (std::size_t i = 0; i < n; ++i) (pick[i] ? ga : gb).push_back(pooled[i]);
            ++total;
            if (u_statistic(ga, gb) <= u + 1e-9) ++at_most;
        } while (std::prev_permutation(pick.begin(), pick.end()));
        return static_cast<double>(at_most) / static_cast<double>(total);
    }

    const double mu = static_cast<double>(na * nb) / 2.0;
    const double sigma = std::sqrt(static_cast<double>(na * nb) * static_cast<double>(n + 1) / 12.0);
    const double z = (u + 0.5 - mu) / sigma;
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double ks_uniform_p(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("ks_uniform_p: empty sample");
    std::vector<double> s(xs.begin(), xs.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = std::clamp(s[i], 0.0, 1.0);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    if (lambda < 1e-3) return 1.0;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        p += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

double chi_square_uniform_p(std::span<const double> counts) {
    if (counts.size() < 2) throw std::invalid_argument("chi_square_uniform_p needs at least two bins");
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const double expected = total / static_cast<double>(counts.size());
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, chi2));
}

}  // namespace curio::stats
