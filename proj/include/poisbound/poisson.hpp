#pragma once

// Poisson mass, cumulative distribution and tail arithmetic. Everything is
// evaluated in log space via lgamma so that indices of several hundred never
// form lambda^i or i! directly.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace poisbound {

/// Poisson point mass exp(-lambda) * lambda^k / k!, computed in log space.
inline double poisson_pmf(double lambda, std::uint64_t k) {
    if (!(lambda > 0.0)) throw std::domain_error("poisson_pmf: lambda must be positive");
    const double kk = static_cast<double>(k);
    return std::exp(-lambda + kk * std::log(lambda) - std::lgamma(kk + 1.0));
}

/// P(P_lambda <= v) by term-by-term summation of the mass function.
inline double poisson_cdf(double lambda, std::uint64_t v) {
    if (!(lambda > 0.0)) throw std::domain_error("poisson_cdf: lambda must be positive");
    // Sum in increasing k with a multiplicative update anchored at k=0.
    double term = std::exp(-lambda);
    double sum = term;
    for (std::uint64_t k = 1; k <= v; ++k) {
        term *= lambda / static_cast<double>(k);
        sum += term;
    }
    return sum < 1.0 ? sum : 1.0;
}

/// Upper tail P(P_lambda > v) = 1 - cdf, summed directly when the
/// complement would lose precision.
inline double poisson_sf(double lambda, std::uint64_t v) {
    const double cdf = poisson_cdf(lambda, v);
    if (cdf < 0.5) return 1.0 - cdf;
    double term = poisson_pmf(lambda, v + 1);
    double sum = 0.0;
    for (std::uint64_t k = v + 1; ; ++k) {
        sum += term;
        term *= lambda / static_cast<double>(k + 1);
        if (term < sum * 1e-17 + 1e-300) break;
    }
    return sum;
}

/// Smallest index v such that P(P_lambda > v) < tail_mass.
inline std::uint64_t poisson_truncation_index(double lambda, double tail_mass) {
    if (!(lambda > 0.0)) throw std::domain_error("poisson_truncation_index: lambda must be positive");
    std::uint64_t v = static_cast<std::uint64_t>(lambda);
    while (poisson_sf(lambda, v) >= tail_mass) {
        v += 1 + v / 4;
    }
    // Walk back to the smallest such index.
    while (v > 0 && poisson_sf(lambda, v - 1) < tail_mass) --v;
    return v;
}

/// A Poisson law P_lambda together with a certified truncation of its mass.
struct PoissonLaw {
    double lambda;

    explicit PoissonLaw(double lambda_) : lambda(lambda_) {
        if (!(lambda > 0.0)) throw std::domain_error("PoissonLaw: lambda must be positive");
    }

    double pmf(std::uint64_t k) const { return poisson_pmf(lambda, k); }
    double cdf(std::uint64_t v) const { return poisson_cdf(lambda, v); }

    /// Masses on {0,...,v*} where the omitted tail is below `tail_mass`.
    std::vector<double> truncated_masses(double tail_mass = 1e-12) const {
        const std::uint64_t v = poisson_truncation_index(lambda, tail_mass);
        std::vector<double> m(v + 1);
        double term = std::exp(-lambda);
        m[0] = term;
        for (std::uint64_t k = 1; k <= v; ++k) {
            term *= lambda / static_cast<double>(k);
            m[k] = term;
        }
        return m;
    }
};

}  // namespace poisbound
