#pragma once

// Scalar special functions used across the library: regularized incomplete
// gamma and the chi-square quantile built on top of it.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace poisbound {

namespace detail {

// Regularized lower incomplete gamma P(a,x) by series expansion.
// Valid for x < a+1.
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,x) by Lentz continued fraction.
// Valid for x >= a+1.
inline double gamma_q_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a).
inline double gamma_p(double a, double x) {
    if (a <= 0.0) throw std::domain_error("gamma_p: a must be positive");
    if (x < 0.0) throw std::domain_error("gamma_p: x must be non-negative");
    if (x == 0.0) return 0.0;
    return x < a + 1.0 ? detail::gamma_p_series(a, x)
                       : 1.0 - detail::gamma_q_cf(a, x);
}

/// Quantile of the chi-square distribution with `dof` degrees of freedom,
/// solved by bisection on the regularized gamma CDF.
inline double chi_square_quantile(double prob, double dof) {
    if (prob <= 0.0 || prob >= 1.0)
        throw std::domain_error("chi_square_quantile: prob in (0,1) required");
    double lo = 0.0;
    double hi = dof + 50.0 * std::sqrt(2.0 * dof) + 50.0;
    while (gamma_p(dof / 2.0, hi / 2.0) < prob) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_p(dof / 2.0, mid / 2.0) < prob)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace poisbound
