#pragma once

// U-statistics over binomial and Poisson point processes: evaluation, the
// lambda and r functionals (closed-form or Monte Carlo), the size-bias
// construction for Poisson input, and the bound assemblies of both
// U-statistic theorems.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "poisbound/coupling.hpp"
#include "poisbound/pointproc.hpp"

namespace poisbound {

/// Indicator kernel of a U-statistic. Only {0,1}-valued kernels are
/// admitted; `evaluate` must be symmetric in its arguments.
struct Kernel {
    std::size_t arity = 1;      // number of tuple arguments
    std::size_t dimension = 1;  // dimension of each point
    std::function<bool(const std::vector<Point>&)> evaluate;
};

/// Spot-check kernel symmetry on random tuples; throws on a violation.
inline void check_kernel_symmetry(const Kernel& k, const Box& box, SeedSpec seed,
                                  std::size_t trials = 1000) {
    if (k.arity < 2) return;
    Rng rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<Point> tup(k.arity);
        for (auto& p : tup) p = detail::uniform_point(box, rng);
        const bool base = k.evaluate(tup);
        std::vector<Point> perm = tup;
        for (std::size_t j = perm.size(); j > 1; --j)
            std::swap(perm[j - 1], perm[rng.uniform_index(j)]);
        if (k.evaluate(perm) != base)
            throw std::invalid_argument("Kernel: evaluate is not symmetric");
    }
}

namespace detail {
inline std::uint64_t eval_subsets(const std::vector<Point>& pts, const Kernel& k,
                                  std::vector<Point>& tup, std::size_t depth,
                                  std::size_t start) {
    if (depth == k.arity) return k.evaluate(tup) ? 1 : 0;
    std::uint64_t c = 0;
    for (std::size_t i = start; i + (k.arity - depth) <= pts.size(); ++i) {
        tup[depth] = pts[i];
        c += eval_subsets(pts, k, tup, depth + 1, i + 1);
    }
    return c;
}
}  // namespace detail

/// Number of unordered arity-subsets of the pattern with kernel value 1
/// (the ordered sum divided by arity factorial).
inline std::uint64_t eval_ustat(const PointPattern& pattern, const Kernel& k) {
    if (pattern.dimension != k.dimension)
        throw std::invalid_argument("eval_ustat: dimension mismatch");
    if (pattern.points.size() < k.arity) return 0;
    std::vector<Point> tup(k.arity);
    return detail::eval_subsets(pattern.points, k, tup, 0, 0);
}

/// The (lambda, r) pair of a U-statistic theorem, with Monte Carlo
/// standard errors (zero when closed forms were supplied).
struct LambdaR {
    double lambda = 0.0;
    double r = 0.0;
    double se_lambda = 0.0;
    double se_r = 0.0;
};

/// Optional closed forms; anything absent is estimated by MC.
struct LambdaRMethod {
    std::optional<double> lambda_closed_form;
    std::optional<double> r_closed_form;
    std::uint64_t mc_reps = 100000;
};

namespace detail {

inline double descending_factorial(double n, std::size_t l) {
    double f = 1.0;
    for (std::size_t j = 0; j < l; ++j) f *= n - static_cast<double>(j);
    return f;
}

struct MeanSE {
    double mean = 0.0, se = 0.0;
};

// Mean of an indicator stream with its standard error.
template <typename Draw>
MeanSE mc_mean(std::uint64_t reps, Draw&& draw) {
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t i = 0; i < reps; ++i) {
        const double v = draw();
        s += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(reps);
    const double m = s / n;
    const double var = std::max(0.0, s2 / n - m * m);
    return {m, std::sqrt(var / n)};
}

// Unbiased MC estimate of max_i int (int h dK^{l-i})^2 dK^i for a
// probability measure K (uniform on box): the square uses two independent
// inner tuples so no inner-estimator bias enters.
inline MeanSE mc_inner_square(const Kernel& k, const Box& box, std::size_t i,
                              std::uint64_t reps, Rng& rng) {
    return mc_mean(reps, [&]() {
        std::vector<Point> tup(k.arity);
        for (std::size_t j = 0; j < i; ++j) tup[j] = uniform_point(box, rng);
        std::vector<Point> tup2 = tup;
        for (std::size_t j = i; j < k.arity; ++j) {
            tup[j] = uniform_point(box, rng);
            tup2[j] = uniform_point(box, rng);
        }
        return (k.evaluate(tup) && k.evaluate(tup2)) ? 1.0 : 0.0;
    });
}

}  // namespace detail

/// lambda and r for a binomial point process of n uniform points on box.
inline LambdaR lambda_r_binomial(const Kernel& k, std::uint64_t n, const Box& box,
                                 const LambdaRMethod& method, SeedSpec seed) {
    if (n < k.arity)
        throw std::invalid_argument("lambda_r_binomial: n must be >= arity");
    Rng rng(seed);
    LambdaR out;
    const double nfac = detail::descending_factorial(static_cast<double>(n), k.arity);
    const double lfac = std::tgamma(static_cast<double>(k.arity) + 1.0);
    if (method.lambda_closed_form) {
        out.lambda = nfac / lfac * *method.lambda_closed_form;
    } else {
        const auto est = detail::mc_mean(method.mc_reps, [&]() {
            std::vector<Point> tup(k.arity);
            for (auto& p : tup) p = detail::uniform_point(box, rng);
            return k.evaluate(tup) ? 1.0 : 0.0;
        });
        out.lambda = nfac / lfac * est.mean;
        out.se_lambda = nfac / lfac * est.se;
    }
    if (k.arity == 1) {
        out.r = 0.0;
    } else if (method.r_closed_form) {
        out.r = *method.r_closed_form;
    } else {
        for (std::size_t i = 1; i < k.arity; ++i) {
            const double pref = detail::descending_factorial(
                static_cast<double>(n), 2 * k.arity - i);
            const auto est = detail::mc_inner_square(k, box, i, method.mc_reps, rng);
            if (pref * est.mean > out.r) {
                out.r = pref * est.mean;
                out.se_r = pref * est.se;
            }
        }
    }
    return out;
}

/// lambda and r for a Poisson process with intensity t * Lebesgue on box.
inline LambdaR lambda_r_poisson(const Kernel& k, double t, const Box& box,
                                const LambdaRMethod& method, SeedSpec seed) {
    if (!(t > 0.0)) throw std::invalid_argument("lambda_r_poisson: t must be positive");
    Rng rng(seed);
    LambdaR out;
    const double vol = box.volume();
    const double lfac = std::tgamma(static_cast<double>(k.arity) + 1.0);
    const double mass_l = std::pow(t * vol, static_cast<double>(k.arity));
    if (method.lambda_closed_form) {
        out.lambda = *method.lambda_closed_form;
    } else {
        const auto est = detail::mc_mean(method.mc_reps, [&]() {
            std::vector<Point> tup(k.arity);
            for (auto& p : tup) p = detail::uniform_point(box, rng);
            return k.evaluate(tup) ? 1.0 : 0.0;
        });
        out.lambda = mass_l / lfac * est.mean;
        out.se_lambda = mass_l / lfac * est.se;
    }
    if (k.arity == 1) {
        out.r = 0.0;
    } else if (method.r_closed_form) {
        out.r = *method.r_closed_form;
    } else {
        for (std::size_t i = 1; i < k.arity; ++i) {
            // int (int h dL^{l-i})^2 dL^i with L = t * Lebesgue: the mass
            // factors are (t*vol)^i for the outer and (t*vol)^{2(l-i)} for
            // the squared inner integral.
            const double pref =
                std::pow(t * vol, static_cast<double>(i)) *
                std::pow(t * vol, 2.0 * static_cast<double>(k.arity - i));
            const auto est = detail::mc_inner_square(k, box, i, method.mc_reps, rng);
            if (pref * est.mean > out.r) {
                out.r = pref * est.mean;
                out.se_r = pref * est.se;
            }
        }
    }
    return out;
}

struct UStatBounds {
    double factor = 0.0;  // the common multiplier of all four bounds
    BoundReport tv, wasserstein, zero_prob, cdf_at_v;
};

/// Bounds of the binomial U-statistic theorem. `stilde_cdf(k)` supplies
/// P(Stilde <= k) where Stilde is the same statistic on n - 2*arity points.
inline UStatBounds bounds_ustat_binomial(
    const LambdaR& lr, std::size_t arity, std::uint64_t n,
    const std::function<double(std::uint64_t)>& stilde_cdf, std::uint64_t m,
    std::uint64_t v) {
    if (n < 2 * arity)
        throw std::invalid_argument("bounds_ustat_binomial: n >= 2*arity required");
    if (!(lr.lambda > 0.0))
        throw std::invalid_argument("bounds_ustat_binomial: lambda must be positive");
    const double lambda = lr.lambda;
    const double l = static_cast<double>(arity);
    const double lfac = std::tgamma(l + 1.0);
    const double factor = std::pow(2.0, l) * lr.r / (lfac * lambda) +
                          2.0 * l * l * lambda / static_cast<double>(n);
    UStatBounds out;
    out.factor = factor;

    out.tv.theorem = "ustat_binomial";
    out.tv.distance = "tv";
    out.tv.terms = {{"factor", factor}, {"min(1,lambda)", std::min(1.0, lambda)}};
    out.tv.bound = std::min(1.0, lambda) * factor;

    out.wasserstein.theorem = "ustat_binomial";
    out.wasserstein.distance = "wasserstein";
    const double wfac = std::min(kLipschitzFactor * std::sqrt(lambda), lambda);
    out.wasserstein.terms = {{"factor", factor},
                             {"min(1.1437*sqrt(lambda),lambda)", wfac}};
    out.wasserstein.bound = wfac * factor;

    out.zero_prob.theorem = "ustat_binomial";
    out.zero_prob.distance = "zero_prob";
    double bracket = std::exp(std::lgamma(static_cast<double>(m) + 1.0) -
                              static_cast<double>(m) * std::log(lambda));
    out.zero_prob.terms.emplace_back("m!/lambda^m", bracket);
    for (std::uint64_t kk = 0; kk < m; ++kk) {
        const double t = detail::zero_prefactor(lambda, kk) * stilde_cdf(kk);
        out.zero_prob.terms.emplace_back(
            "min(lambda/(k+1),k!/lambda^k) * P(Stilde<=k) k=" + std::to_string(kk), t);
        bracket += t;
    }
    out.zero_prob.terms.emplace_back("factor", factor);
    out.zero_prob.bound = bracket * factor;

    out.cdf_at_v.theorem = "ustat_binomial";
    out.cdf_at_v.distance = "cdf_at_v";
    const double vv = static_cast<double>(v);
    const double br2 = (vv + 1.0) * (vv + 1.0) / lambda + stilde_cdf(v);
    out.cdf_at_v.terms = {{"(v+1)^2/lambda", (vv + 1.0) * (vv + 1.0) / lambda},
                          {"P(Stilde<=v)", stilde_cdf(v)},
                          {"factor", factor}};
    out.cdf_at_v.bound = br2 * factor;
    return out;
}

/// Bounds of the Poisson U-statistic theorem. `s_cdf(k)` supplies
/// P(S <= k). The zero bound is one-sided: 0 <= P(S=0) - e^{-lambda}.
inline UStatBounds bounds_ustat_poisson(
    const LambdaR& lr, std::size_t arity,
    const std::function<double(std::uint64_t)>& s_cdf, std::uint64_t m,
    std::uint64_t v) {
    if (!(lr.lambda > 0.0))
        throw std::invalid_argument("bounds_ustat_poisson: lambda must be positive");
    const double lambda = lr.lambda;
    const double l = static_cast<double>(arity);
    const double lfac = std::tgamma(l + 1.0);
    const double rho = std::pow(2.0, l) * lr.r / lfac;
    UStatBounds out;
    out.factor = rho;

    out.tv.theorem = "ustat_poisson";
    out.tv.distance = "tv";
    out.tv.terms = {{"2^l*r/l!", rho},
                    {"min(1,1/lambda)", std::min(1.0, 1.0 / lambda)}};
    out.tv.bound = std::min(1.0, 1.0 / lambda) * rho;

    out.wasserstein.theorem = "ustat_poisson";
    out.wasserstein.distance = "wasserstein";
    const double wfac = std::min(1.0, kLipschitzFactor / std::sqrt(lambda));
    out.wasserstein.terms = {{"2^l*r/l!", rho},
                             {"min(1,1.1437/sqrt(lambda))", wfac}};
    out.wasserstein.bound = wfac * rho;

    out.zero_prob.theorem = "ustat_poisson";
    out.zero_prob.distance = "zero_prob";
    double bracket = std::exp(std::lgamma(static_cast<double>(m) + 1.0) -
                              (static_cast<double>(m) + 1.0) * std::log(lambda));
    out.zero_prob.terms.emplace_back("m!/lambda^(m+1)", bracket);
    for (std::uint64_t kk = 0; kk < m; ++kk) {
        const double kd = static_cast<double>(kk);
        const double pref = std::min(
            1.0 / (kd + 1.0),
            std::exp(std::lgamma(kd + 1.0) - (kd + 1.0) * std::log(lambda)));
        const double t = pref * s_cdf(kk);
        out.zero_prob.terms.emplace_back(
            "min(1/(k+1),k!/lambda^(k+1)) * P(S<=k) k=" + std::to_string(kk), t);
        bracket += t;
    }
    out.zero_prob.terms.emplace_back("2^l*r/l!", rho);
    out.zero_prob.bound = bracket * rho;

    out.cdf_at_v.theorem = "ustat_poisson";
    out.cdf_at_v.distance = "cdf_at_v";
    const double vv = static_cast<double>(v);
    const double br2 = (vv + 1.0) * (vv + 1.0) / lambda + s_cdf(v);
    out.cdf_at_v.terms = {{"(v+1)^2/lambda", (vv + 1.0) * (vv + 1.0) / lambda},
                          {"P(S<=v)", s_cdf(v)},
                          {"2^l*r/(l!*lambda)", rho / lambda}};
    out.cdf_at_v.bound = br2 * rho / lambda;
    return out;
}

/// One draw of (S, S') from the Poisson size-bias construction: chi is an
/// arity-tuple with density h * L^arity / (arity! * lambda), sampled by
/// rejection from uniform tuples; S' adds chi to an independent copy of the
/// process and subtracts h(chi) = 1.
struct SizeBiasDraw {
    std::uint64_t s = 0;
    std::uint64_t s_prime = 0;
};

inline SizeBiasDraw sample_sizebias_poisson(const Kernel& k, double t,
                                            const Box& box, SeedSpec seed,
                                            std::uint64_t proposal_cap = 1000000) {
    PointPattern eta = sample_poisson(box, t, seed);
    SizeBiasDraw d;
    d.s = eval_ustat(eta, k);
    Rng rng(SeedSpec{seed.master_seed, detail::splitmix64(seed.stream_id ^ 0x5b5ULL)});
    std::vector<Point> chi(k.arity);
    std::uint64_t tries = 0;
    do {
        if (++tries > proposal_cap)
            throw std::runtime_error(
                "sample_sizebias_poisson: proposal rejection cap exceeded");
        for (auto& p : chi) p = detail::uniform_point(box, rng);
    } while (!k.evaluate(chi));
    for (auto& p : chi) eta.points.push_back(p);
    d.s_prime = eval_ustat(eta, k) - 1;
    return d;
}

}  // namespace poisbound
