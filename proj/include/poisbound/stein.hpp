#pragma once

// Solutions of the Poisson Stein equation
//     lambda f(i+1) - i f(i) = g(i) - E[g(P_lambda)],  f(0) = 0,
// for indicator and Lipschitz test functions, together with the uniform
// ("magic factor") bounds on f and its first difference.
//
// The naive forward recursion amplifies rounding errors like i!/lambda^i
// and is unusable beyond i of about 15; every evaluation here instead sums
// a single-signed series, so no cancellation occurs at any index.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "poisbound/pmf.hpp"
#include "poisbound/poisson.hpp"

namespace poisbound {

/// Upper bound 8/(3 sqrt(2e)) on sqrt(lambda) * sup |Delta f_g|, and the
/// decimal majorant used in the assembled bounds.
inline constexpr double kLipschitzFactor = 1.1437;
inline const double kLipschitzFactorExact = 8.0 / (3.0 * std::sqrt(2.0 * std::exp(1.0)));

/// Indicator target: an explicit finite subset of N_0.
struct IndicatorSet {
    std::vector<std::uint64_t> members;  // strictly ascending

    static IndicatorSet interval(std::uint64_t v) {
        IndicatorSet s;
        s.members.resize(v + 1);
        for (std::uint64_t k = 0; k <= v; ++k) s.members[k] = k;
        return s;
    }

    bool contains(std::uint64_t i) const {
        return std::binary_search(members.begin(), members.end(), i);
    }
};

namespace detail {

// f_{{a}}(i) for the singleton {a}, by single-signed series. For i >= a+1
// this is pmf(a) * sum_l lambda^l (i-1)!/(i+l)! (all positive); for
// 1 <= i <= a it is minus a finite sum of positive log-space terms.
inline double stein_f_singleton(double lambda, std::uint64_t a, std::uint64_t i) {
    if (i == 0) return 0.0;
    const double ll = std::log(lambda);
    if (i >= a + 1) {
        // w_0 = pmf(a)/i, w_{l+1} = w_l * lambda/(i+l+1).
        double w = std::exp(-lambda + static_cast<double>(a) * ll -
                            std::lgamma(static_cast<double>(a) + 1.0)) /
                   static_cast<double>(i);
        double sum = 0.0;
        for (std::uint64_t l = 0;; ++l) {
            sum += w;
            w *= lambda / static_cast<double>(i + l + 1);
            if (w < sum * 1e-17 + 1e-300) break;
        }
        return sum;
    }
    // i <= a: every term shares the factor -(i-1)!/a! lambda^{a-i} e^{-lambda}.
    double sum = 0.0;
    for (std::uint64_t m = 0; m < i; ++m) {
        sum += std::exp(-lambda +
                        static_cast<double>(a - i + m) * ll +
                        std::lgamma(static_cast<double>(i)) -
                        std::lgamma(static_cast<double>(m) + 1.0) -
                        std::lgamma(static_cast<double>(a) + 1.0));
    }
    return -sum;
}

}  // namespace detail

/// f_A(i) for a finite indicator set A, via linearity over singletons.
inline double stein_f_indicator(double lambda, const IndicatorSet& set,
                                std::uint64_t i) {
    if (!(lambda > 0.0))
        throw std::domain_error("stein_f_indicator: lambda must be positive");
    double f = 0.0;
    for (std::uint64_t a : set.members) f += detail::stein_f_singleton(lambda, a, i);
    return f;
}

/// E[g(P_lambda)] with a certified truncation: the omitted tail contributes
/// less than 1e-13 for any g with |g(m)| <= |g(0)| + m.
inline double poisson_expectation_lip(double lambda,
                                      const std::function<double(std::uint64_t)>& g) {
    const double g0 = std::fabs(g(0));
    std::uint64_t v = poisson_truncation_index(lambda, 1e-14);
    // Tail of E[|g|] is below g0*sf(v) + lambda*sf(v-1); grow v until tiny.
    while ((g0 + 1.0) * poisson_sf(lambda, v) +
               lambda * poisson_sf(lambda, v > 0 ? v - 1 : 0) >=
           1e-13)
        v += 8;
    double term = std::exp(-lambda);
    double sum = term * g(0);
    for (std::uint64_t m = 1; m <= v; ++m) {
        term *= lambda / static_cast<double>(m);
        sum += term * g(m);
    }
    return sum;
}

/// Solution f_g(i) for a Lipschitz(1) test function g, by stable summation:
/// the forward partial sum for i <= lambda and the tail sum for i > lambda
/// (the two agree because the full series sums to zero). The Lipschitz
/// certificate is spot-checked on every index the evaluation touches.
class SteinLipschitzSolution {
public:
    SteinLipschitzSolution(double lambda, std::function<double(std::uint64_t)> g)
        : lambda_(lambda), g_(std::move(g)) {
        if (!(lambda_ > 0.0))
            throw std::domain_error("SteinLipschitzSolution: lambda must be positive");
        eg_ = poisson_expectation_lip(lambda_, g_);
    }

    double expectation() const { return eg_; }

    double operator()(std::uint64_t i) const {
        if (i == 0) return 0.0;
        const double f = static_cast<double>(i) <= lambda_ ? forward_sum(i)
                                                           : tail_sum(i);
        check_residual(i, f);
        return f;
    }

private:
    double centered(std::uint64_t m) const {
        const double gm = g_(m);
        if (m > 0) {
            const double prev = g_(m - 1);
            if (std::fabs(gm - prev) > 1.0 + 1e-12)
                throw std::domain_error(
                    "SteinLipschitzSolution: test function is not Lipschitz(1)");
        }
        return gm - eg_;
    }

    // f(i) = (i-1)!/lambda^i * sum_{m<i} (g(m)-Eg) lambda^m/m!, weights built
    // downward from w_{i-1} = 1/lambda (non-increasing when i <= lambda).
    double forward_sum(std::uint64_t i) const {
        double w = 1.0 / lambda_;
        double sum = 0.0;
        for (std::uint64_t m = i; m-- > 0;) {
            sum += w * centered(m);
            if (m > 0) w *= static_cast<double>(m) / lambda_;
        }
        return sum;
    }

    // f(i) = -(i-1)!/lambda^i * sum_{m>=i} (g(m)-Eg) lambda^m/m!, weights
    // w_i = 1/i decreasing geometrically once m exceeds lambda.
    double tail_sum(std::uint64_t i) const {
        double w = 1.0 / static_cast<double>(i);
        double sum = 0.0;
        for (std::uint64_t m = i;; ++m) {
            sum += w * centered(m);
            w *= lambda_ / static_cast<double>(m + 1);
            const double scale =
                std::fabs(g_(0)) + static_cast<double>(m + 1) + std::fabs(eg_);
            if (w * scale < 1e-17 * (std::fabs(sum) + 1e-30) + 1e-300) break;
        }
        return -sum;
    }

    void check_residual(std::uint64_t i, double fi) const {
        // One-step consistency: lambda f(i+1) - i f(i) = g(i) - Eg.
        const double fnext = static_cast<double>(i + 1) <= lambda_
                                 ? forward_sum(i + 1)
                                 : tail_sum(i + 1);
        const double res = lambda_ * fnext - static_cast<double>(i) * fi -
                           (g_(i) - eg_);
        if (std::fabs(res) > 1e-10)
            throw std::runtime_error(
                "SteinLipschitzSolution: residual above tolerance at index " +
                std::to_string(i));
    }

    double lambda_;
    std::function<double(std::uint64_t)> g_;
    double eg_;
};

/// Convenience wrapper matching the indicator interface.
inline double stein_f_lipschitz(double lambda,
                                const std::function<double(std::uint64_t)>& g,
                                std::uint64_t i) {
    return SteinLipschitzSolution(lambda, g)(i);
}

/// Uniform bounds on the Stein solutions and their first differences.
struct MagicFactors {
    double lambda;
    double sup_f_g;        // max |f_g|
    double sup_delta_f_g;  // max |Delta f_g|
    double sup_f_A;        // max |f_A|
    double sup_delta_f_A;  // max |Delta f_A|
    double f0_at_1;        // |f_{0}(1)|
    double f0_from_2;      // |f_{0}(i)|, i >= 2
    std::optional<double> delta_f0_n;   // |Delta f_{0}(i)|, i >= n
    std::optional<double> delta_f0v;    // Delta f_{0..v}(i), i >= v+2
    bool lemma_v_precondition_ok = true;  // v <= lambda required for delta_f0v
};

inline MagicFactors magic_factors(double lambda,
                                  std::optional<std::uint64_t> v = std::nullopt,
                                  std::optional<std::uint64_t> n = std::nullopt) {
    if (!(lambda > 0.0))
        throw std::domain_error("magic_factors: lambda must be positive");
    MagicFactors m{};
    m.lambda = lambda;
    m.sup_f_g = 1.0;
    m.sup_delta_f_g = std::min(1.0, kLipschitzFactor / std::sqrt(lambda));
    m.sup_f_A = std::min(1.0, 1.0 / std::sqrt(lambda));
    m.sup_delta_f_A = std::min(1.0, 1.0 / lambda);
    m.f0_at_1 = std::min(1.0, 1.0 / lambda);
    m.f0_from_2 = std::min(1.0, 1.0 / (lambda * lambda));
    if (n) {
        if (*n < 1) throw std::domain_error("magic_factors: n must be >= 1");
        const double nn = static_cast<double>(*n);
        m.delta_f0_n = std::min(
            1.0 / nn,
            std::exp(std::lgamma(nn) - nn * std::log(lambda)));
    }
    if (v) {
        const double vv = static_cast<double>(*v);
        if (vv <= lambda) {
            m.delta_f0v = std::min(1.0, (vv + 1.0) * (vv + 1.0) / (lambda * lambda));
        } else {
            // Precondition v <= lambda violated: fall back to the general
            // indicator-difference factor.
            m.lemma_v_precondition_ok = false;
            m.delta_f0v = m.sup_delta_f_A;
        }
    }
    return m;
}

/// sum_{i>=1} f_target(i) D(i), which equals P(P_lambda in A) - P(X in A)
/// for indicator targets and E[g(P_lambda)] - E[g(X)] for Lipschitz ones.
inline double stein_discrepancy(const IntegerPMF& p, double lambda,
                                const IndicatorSet& set) {
    const DiscrepancyVector d = DiscrepancyVector::of(p, lambda);
    double s = 0.0;
    for (std::size_t j = 0; j < d.values.size(); ++j)
        s += stein_f_indicator(lambda, set, static_cast<std::uint64_t>(j + 1)) *
             d.values[j];
    return s;
}

inline double stein_discrepancy(const IntegerPMF& p, double lambda,
                                const std::function<double(std::uint64_t)>& g) {
    const DiscrepancyVector d = DiscrepancyVector::of(p, lambda);
    const SteinLipschitzSolution f(lambda, g);
    double s = 0.0;
    for (std::size_t j = 0; j < d.values.size(); ++j)
        s += f(static_cast<std::uint64_t>(j + 1)) * d.values[j];
    return s;
}

}  // namespace poisbound
