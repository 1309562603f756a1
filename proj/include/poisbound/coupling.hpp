#pragma once

// Generalized size-bias couplings (X, Z) and the evaluation of every bound
// they yield for the Poisson approximation of X: total variation,
// Wasserstein, the probability at zero and the CDF at a fixed level,
// together with the one-sided bounds on P(X=0).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "poisbound/pmf.hpp"
#include "poisbound/stein.hpp"

namespace poisbound {

struct CouplingAtom {
    std::uint64_t x;
    std::int64_t z;
    double prob;
};

/// Joint law of (X, Z). Exact tables carry explicit probabilities; sample
/// mode stores equally weighted draws. lambda is a free parameter: it is
/// not forced to E[X] because the approximate bounds permit any rate.
class CouplingLaw {
public:
    enum class Mode { exact_table, weighted_samples };

    CouplingLaw(std::vector<CouplingAtom> atoms, double lambda,
                Mode mode = Mode::exact_table)
        : atoms_(std::move(atoms)), lambda_(lambda), mode_(mode) {
        if (!(lambda_ > 0.0))
            throw std::invalid_argument("CouplingLaw: lambda must be positive");
        if (atoms_.empty())
            throw std::invalid_argument("CouplingLaw: no atoms");
        if (mode_ == Mode::exact_table) {
            double total = 0.0;
            for (const auto& a : atoms_) {
                if (a.prob < 0.0)
                    throw std::invalid_argument("CouplingLaw: negative probability");
                total += a.prob;
            }
            if (std::fabs(total - 1.0) > 1e-12)
                throw std::invalid_argument("CouplingLaw: probabilities must sum to 1");
        }
    }

    static CouplingLaw from_samples(const std::vector<std::pair<std::uint64_t, std::int64_t>>& xz,
                                    double lambda) {
        if (xz.size() < 100)
            throw std::invalid_argument(
                "CouplingLaw::from_samples: at least 100 samples required");
        std::vector<CouplingAtom> atoms;
        atoms.reserve(xz.size());
        const double w = 1.0 / static_cast<double>(xz.size());
        for (const auto& [x, z] : xz) atoms.push_back({x, z, w});
        return CouplingLaw(std::move(atoms), lambda, Mode::weighted_samples);
    }

    const std::vector<CouplingAtom>& atoms() const { return atoms_; }
    double lambda() const { return lambda_; }
    Mode mode() const { return mode_; }

    /// Marginal law of X.
    IntegerPMF x_marginal() const {
        std::map<std::uint64_t, double> m;
        for (const auto& a : atoms_) m[a.x] += a.prob;
        std::vector<std::uint64_t> sup;
        std::vector<double> mass;
        for (const auto& [v, p] : m) {
            sup.push_back(v);
            mass.push_back(p);
        }
        return IntegerPMF(std::move(sup), std::move(mass),
                          mode_ == Mode::exact_table ? IntegerPMF::Origin::exact
                                                     : IntegerPMF::Origin::empirical,
                          mode_ == Mode::exact_table
                              ? 0
                              : static_cast<std::uint64_t>(atoms_.size()));
    }

    /// P(X + Z = j) for integer j (Z may push the sum below zero).
    double prob_sum(std::int64_t j) const {
        double p = 0.0;
        for (const auto& a : atoms_)
            if (static_cast<std::int64_t>(a.x) + a.z == j) p += a.prob;
        return p;
    }

    double expect_abs_z() const {
        double e = 0.0;
        for (const auto& a : atoms_)
            e += std::fabs(static_cast<double>(a.z)) * a.prob;
        return e;
    }

    double expect_z() const {
        double e = 0.0;
        for (const auto& a : atoms_) e += static_cast<double>(a.z) * a.prob;
        return e;
    }

    /// E[|Z| 1{X - Z_- = k}].
    double expect_abs_z_at(std::uint64_t k) const {
        double e = 0.0;
        for (const auto& a : atoms_) {
            const std::int64_t zm = a.z < 0 ? -a.z : 0;
            if (static_cast<std::int64_t>(a.x) - zm == static_cast<std::int64_t>(k))
                e += std::fabs(static_cast<double>(a.z)) * a.prob;
        }
        return e;
    }

    /// E[|Z| 1{X - Z_- <= v}].
    double expect_abs_z_upto(std::uint64_t v) const {
        double e = 0.0;
        for (const auto& a : atoms_) {
            const std::int64_t zm = a.z < 0 ? -a.z : 0;
            if (static_cast<std::int64_t>(a.x) - zm <= static_cast<std::int64_t>(v))
                e += std::fabs(static_cast<double>(a.z)) * a.prob;
        }
        return e;
    }

    bool z_nonnegative() const {
        for (const auto& a : atoms_)
            if (a.prob > 0.0 && a.z < 0) return false;
        return true;
    }

    bool z_nonpositive() const {
        for (const auto& a : atoms_)
            if (a.prob > 0.0 && a.z > 0) return false;
        return true;
    }

    bool sum_nonnegative() const {
        for (const auto& a : atoms_)
            if (a.prob > 0.0 && static_cast<std::int64_t>(a.x) + a.z < 0) return false;
        return true;
    }

private:
    std::vector<CouplingAtom> atoms_;
    double lambda_;
    Mode mode_;
};

/// The error sequence q_{i-1} = i P(X=i) - lambda P(X+Z = i-1), i >= 1.
struct QSequence {
    std::map<std::uint64_t, double> values;  // i -> q_i
    double tail_bound = 0.0;  // certified bound on omitted sum of |q_i|

    double abs_sum() const {
        double s = tail_bound;
        for (const auto& [i, q] : values) s += std::fabs(q);
        return s;
    }

    double at(std::uint64_t i) const {
        auto it = values.find(i);
        return it == values.end() ? 0.0 : it->second;
    }

    bool all_zero(double tol = 1e-10) const {
        if (tail_bound > tol) return false;
        for (const auto& [i, q] : values)
            if (std::fabs(q) > tol) return false;
        return true;
    }

    bool all_nonpositive() const {
        for (const auto& [i, q] : values)
            if (q > 0.0) return false;
        return true;
    }

    bool all_nonnegative() const {
        for (const auto& [i, q] : values)
            if (q < 0.0) return false;
        return true;
    }
};

/// Compute the q-sequence exactly over the joint support. Beyond the table
/// both probabilities vanish, so tail_bound = 0.
inline QSequence q_sequence(const CouplingLaw& c) {
    if (c.mode() != CouplingLaw::Mode::exact_table)
        throw std::invalid_argument(
            "q_sequence: exact-table mode required; estimate from samples instead");
    const IntegerPMF px = c.x_marginal();
    std::int64_t max_sum = 0;
    for (const auto& a : c.atoms())
        max_sum = std::max(max_sum, static_cast<std::int64_t>(a.x) + a.z);
    const std::uint64_t top = std::max<std::uint64_t>(
        px.max_support(), max_sum > 0 ? static_cast<std::uint64_t>(max_sum) + 1 : 1);
    QSequence q;
    for (std::uint64_t i = 1; i <= top + 1; ++i) {
        const double qi = static_cast<double>(i) * px.prob(i) -
                          c.lambda() * c.prob_sum(static_cast<std::int64_t>(i) - 1);
        if (qi != 0.0) q.values[i - 1] = qi;
    }
    q.tail_bound = 0.0;
    return q;
}

/// One evaluated bound with every summand itemized. `bound` always equals
/// the documented combination of `terms`.
struct BoundReport {
    std::string theorem;
    std::string distance;  // tv, wasserstein, zero_prob, cdf_at_v
    std::vector<std::pair<std::string, double>> terms;
    double bound = 0.0;
    std::optional<double> exact_lhs;
    std::optional<bool> satisfied;

    void finish(double lhs_tol = 1e-12) {
        if (exact_lhs) satisfied = *exact_lhs <= bound + lhs_tol;
    }
};

struct ExactBounds {
    BoundReport tv, wasserstein, zero_prob, cdf_at_v;
};

struct ApproximateBounds {
    BoundReport tv, wasserstein, zero_prob, cdf_at_v;
    std::optional<BoundReport> wasserstein_sharp;  // requires P(X+Z >= 0) = 1
};

namespace detail {

inline double zero_prefactor(double lambda, std::uint64_t k) {
    // lambda/(k+1) wedge k!/lambda^k, in log space for large k.
    const double kk = static_cast<double>(k);
    return std::min(lambda / (kk + 1.0),
                    std::exp(std::lgamma(kk + 1.0) - kk * std::log(lambda)));
}

inline void attach_exact(BoundReport& r, const IntegerPMF& px, double lambda,
                         std::optional<std::uint64_t> v = std::nullopt) {
    const PoissonLaw target(lambda);
    if (r.distance == "tv")
        r.exact_lhs = tv_distance(px, target);
    else if (r.distance == "wasserstein")
        r.exact_lhs = wasserstein_distance(px, target);
    else if (r.distance == "zero_prob")
        r.exact_lhs = std::fabs(px.prob(0) - target.pmf(0));
    else
        r.exact_lhs = std::fabs(px.cdf(*v) - target.cdf(*v));
    r.finish();
}

}  // namespace detail

/// Bounds under the exact coupling identity (q identically zero, lambda
/// equal to E[X]). Both preconditions are verified.
inline ExactBounds bounds_exact(const CouplingLaw& c, std::uint64_t m,
                                std::uint64_t v) {
    const IntegerPMF px = c.x_marginal();
    const double lambda = c.lambda();
    if (std::fabs(px.mean() - lambda) > 1e-10)
        throw std::invalid_argument("bounds_exact: lambda must equal E[X]");
    const QSequence q = q_sequence(c);
    if (!q.all_zero())
        throw std::invalid_argument(
            "bounds_exact: q-sequence is not zero; use bounds_approximate");

    const double eabsz = c.expect_abs_z();
    ExactBounds out;

    out.tv.theorem = "exact_coupling";
    out.tv.distance = "tv";
    out.tv.terms = {{"E|Z|", eabsz}, {"min(1,lambda)", std::min(1.0, lambda)}};
    out.tv.bound = std::min(1.0, lambda) * eabsz;
    detail::attach_exact(out.tv, px, lambda);

    out.wasserstein.theorem = "exact_coupling";
    out.wasserstein.distance = "wasserstein";
    const double wfac = std::min(kLipschitzFactor * std::sqrt(lambda), lambda);
    out.wasserstein.terms = {{"E|Z|", eabsz},
                             {"min(1.1437*sqrt(lambda),lambda)", wfac}};
    out.wasserstein.bound = wfac * eabsz;
    detail::attach_exact(out.wasserstein, px, lambda);

    out.zero_prob.theorem = "exact_coupling";
    out.zero_prob.distance = "zero_prob";
    const double head = std::exp(std::lgamma(static_cast<double>(m) + 1.0) -
                                 static_cast<double>(m) * std::log(lambda));
    out.zero_prob.terms.emplace_back("m!/lambda^m * E|Z|", head * eabsz);
    out.zero_prob.bound = head * eabsz;
    for (std::uint64_t k = 0; k < m; ++k) {
        const double t = detail::zero_prefactor(lambda, k) * c.expect_abs_z_at(k);
        out.zero_prob.terms.emplace_back(
            "min(lambda/(k+1),k!/lambda^k) * E[|Z|1{X-Z_-=k}] k=" +
                std::to_string(k),
            t);
        out.zero_prob.bound += t;
    }
    detail::attach_exact(out.zero_prob, px, lambda);

    out.cdf_at_v.theorem = "exact_coupling";
    out.cdf_at_v.distance = "cdf_at_v";
    const double vv = static_cast<double>(v);
    const double t1 = (vv + 1.0) * (vv + 1.0) / lambda * eabsz;
    const double t2 = c.expect_abs_z_upto(v);
    out.cdf_at_v.terms = {{"(v+1)^2/lambda * E|Z|", t1},
                          {"E[|Z|1{X-Z_-<=v}]", t2}};
    out.cdf_at_v.bound = t1 + t2;
    detail::attach_exact(out.cdf_at_v, px, lambda, v);

    return out;
}

/// Bounds under an approximate coupling with error sequence q. Works for
/// any lambda > 0; the sharper Wasserstein variant is emitted only when
/// P(X+Z >= 0) = 1 holds on the table.
inline ApproximateBounds bounds_approximate(const CouplingLaw& c, std::uint64_t m,
                                            std::uint64_t v) {
    const IntegerPMF px = c.x_marginal();
    const double lambda = c.lambda();
    const QSequence q = q_sequence(c);
    const double qsum = q.abs_sum();
    const double eabsz = c.expect_abs_z();
    ApproximateBounds out;

    out.tv.theorem = "approximate_coupling";
    out.tv.distance = "tv";
    const double qtv = std::min(1.0, 1.0 / std::sqrt(lambda)) * qsum;
    out.tv.terms = {{"min(1,lambda) * E|Z|", std::min(1.0, lambda) * eabsz},
                    {"min(1,1/sqrt(lambda)) * sum|q_i|", qtv}};
    out.tv.bound = std::min(1.0, lambda) * eabsz + qtv;
    detail::attach_exact(out.tv, px, lambda);

    out.wasserstein.theorem = "approximate_coupling";
    out.wasserstein.distance = "wasserstein";
    out.wasserstein.terms = {{"lambda * E|Z|", lambda * eabsz},
                             {"sum|q_i|", qsum}};
    out.wasserstein.bound = lambda * eabsz + qsum;
    detail::attach_exact(out.wasserstein, px, lambda);

    if (c.sum_nonnegative()) {
        BoundReport sharp;
        sharp.theorem = "approximate_coupling";
        sharp.distance = "wasserstein";
        const double wfac = std::min(kLipschitzFactor * std::sqrt(lambda), lambda);
        sharp.terms = {{"min(1.1437*sqrt(lambda),lambda) * E|Z|", wfac * eabsz},
                       {"sum|q_i|", qsum}};
        sharp.bound = wfac * eabsz + qsum;
        detail::attach_exact(sharp, px, lambda);
        out.wasserstein_sharp = std::move(sharp);
    }

    out.zero_prob.theorem = "approximate_coupling";
    out.zero_prob.distance = "zero_prob";
    const double head = std::exp(std::lgamma(static_cast<double>(m) + 1.0) -
                                 static_cast<double>(m) * std::log(lambda));
    out.zero_prob.terms.emplace_back("m!/lambda^m * E|Z|", head * eabsz);
    out.zero_prob.bound = head * eabsz;
    for (std::uint64_t k = 0; k < m; ++k) {
        const double t = detail::zero_prefactor(lambda, k) * c.expect_abs_z_at(k);
        out.zero_prob.terms.emplace_back(
            "min(lambda/(k+1),k!/lambda^k) * E[|Z|1{X-Z_-=k}] k=" +
                std::to_string(k),
            t);
        out.zero_prob.bound += t;
    }
    const double q0 = std::fabs(q.at(0));
    double qrest = q.tail_bound;
    for (const auto& [i, qi] : q.values)
        if (i >= 1) qrest += std::fabs(qi);
    const double z0 = std::min(1.0, 1.0 / lambda) * q0;
    const double zr = std::min(1.0, 1.0 / (lambda * lambda)) * qrest;
    out.zero_prob.terms.emplace_back("min(1,1/lambda) * |q_0|", z0);
    out.zero_prob.terms.emplace_back("min(1,1/lambda^2) * sum_{i>=1}|q_i|", zr);
    out.zero_prob.bound += z0 + zr;
    detail::attach_exact(out.zero_prob, px, lambda);

    out.cdf_at_v.theorem = "approximate_coupling";
    out.cdf_at_v.distance = "cdf_at_v";
    const double vv = static_cast<double>(v);
    const double t1 = (vv + 1.0) * (vv + 1.0) / lambda * eabsz;
    const double t2 = c.expect_abs_z_upto(v);
    const double t3 = std::min(1.0, 1.0 / std::sqrt(lambda)) * qsum;
    out.cdf_at_v.terms = {{"(v+1)^2/lambda * E|Z|", t1},
                          {"E[|Z|1{X-Z_-<=v}]", t2},
                          {"min(1,1/sqrt(lambda)) * sum|q_i|", t3}};
    out.cdf_at_v.bound = t1 + t2 + t3;
    detail::attach_exact(out.cdf_at_v, px, lambda, v);

    return out;
}

/// One-sided comparisons of P(X=0) with e^{-lambda} from the sign of Z and
/// of the q-sequence. Each applicable flag is verified against the exact
/// probability; a violation signals a bug, not bad data.
struct ZeroProbSignBounds {
    bool lower_applicable = false;  // P(X=0) >= e^{-lambda}
    bool upper_applicable = false;  // P(X=0) <= e^{-lambda}
    double e_minus_lambda = 0.0;
    double p_x_zero = 0.0;
};

inline ZeroProbSignBounds zero_prob_sign_bounds(const CouplingLaw& c) {
    if (c.mode() != CouplingLaw::Mode::exact_table)
        throw std::invalid_argument("zero_prob_sign_bounds: exact-table mode required");
    const QSequence q = q_sequence(c);
    ZeroProbSignBounds out;
    out.e_minus_lambda = std::exp(-c.lambda());
    out.p_x_zero = c.x_marginal().prob(0);
    out.lower_applicable = c.z_nonnegative() && q.all_nonpositive();
    out.upper_applicable =
        c.z_nonpositive() && c.sum_nonnegative() && q.all_nonnegative();
    if (out.lower_applicable && out.p_x_zero < out.e_minus_lambda - 1e-12)
        throw std::logic_error("zero_prob_sign_bounds: lower bound violated");
    if (out.upper_applicable && out.p_x_zero > out.e_minus_lambda + 1e-12)
        throw std::logic_error("zero_prob_sign_bounds: upper bound violated");
    return out;
}

/// Monte Carlo estimates of every coupling functional the bounds need,
/// each with its sqrt(variance/n) standard error.
struct CouplingTerms {
    double lambda = 0.0;
    std::uint64_t n = 0;
    double e_abs_z = 0.0, se_abs_z = 0.0;
    double e_z = 0.0, se_z = 0.0;
    std::vector<double> e_abs_z_at_k, se_abs_z_at_k;  // k = 0..m-1
    double e_abs_z_upto_v = 0.0, se_abs_z_upto_v = 0.0;
    // E[Z] - (Var(X) - lambda)/lambda; zero in expectation for exact
    // size-bias couplings.
    double mean_check = 0.0, mean_check_se = 0.0;
};

inline CouplingTerms estimate_coupling_terms(
    const std::vector<std::pair<std::uint64_t, std::int64_t>>& samples,
    double lambda, std::uint64_t m, std::uint64_t v) {
    if (samples.size() < 100)
        throw std::invalid_argument(
            "estimate_coupling_terms: at least 100 samples required");
    if (!(lambda > 0.0))
        throw std::domain_error("estimate_coupling_terms: lambda must be positive");
    const std::uint64_t n = samples.size();
    const double dn = static_cast<double>(n);

    auto mean_se = [dn](double sum, double sumsq) {
        const double mean = sum / dn;
        const double var = std::max(0.0, sumsq / dn - mean * mean);
        return std::pair<double, double>{mean, std::sqrt(var / dn)};
    };

    double s_abs = 0.0, s2_abs = 0.0, s_z = 0.0, s2_z = 0.0;
    double s_upto = 0.0, s2_upto = 0.0;
    double s_x = 0.0, s2_x = 0.0;
    std::vector<double> s_k(m, 0.0), s2_k(m, 0.0);
    for (const auto& [x, z] : samples) {
        const double az = std::fabs(static_cast<double>(z));
        s_abs += az;
        s2_abs += az * az;
        s_z += static_cast<double>(z);
        s2_z += static_cast<double>(z) * static_cast<double>(z);
        s_x += static_cast<double>(x);
        s2_x += static_cast<double>(x) * static_cast<double>(x);
        const std::int64_t zm = z < 0 ? -z : 0;
        const std::int64_t site = static_cast<std::int64_t>(x) - zm;
        if (site >= 0 && static_cast<std::uint64_t>(site) < m) {
            s_k[static_cast<std::size_t>(site)] += az;
            s2_k[static_cast<std::size_t>(site)] += az * az;
        }
        if (site <= static_cast<std::int64_t>(v)) {
            s_upto += az;
            s2_upto += az * az;
        }
    }

    CouplingTerms out;
    out.lambda = lambda;
    out.n = n;
    std::tie(out.e_abs_z, out.se_abs_z) = mean_se(s_abs, s2_abs);
    std::tie(out.e_z, out.se_z) = mean_se(s_z, s2_z);
    std::tie(out.e_abs_z_upto_v, out.se_abs_z_upto_v) = mean_se(s_upto, s2_upto);
    out.e_abs_z_at_k.resize(m);
    out.se_abs_z_at_k.resize(m);
    for (std::uint64_t k = 0; k < m; ++k)
        std::tie(out.e_abs_z_at_k[k], out.se_abs_z_at_k[k]) =
            mean_se(s_k[k], s2_k[k]);
    const double mx = s_x / dn;
    const double vx = std::max(0.0, s2_x / dn - mx * mx) * dn / std::max(1.0, dn - 1.0);
    out.mean_check = out.e_z - (vx - lambda) / lambda;
    // The variance estimate contributes its own sampling noise; fold a
    // delta-method term for Var(X)/lambda into the standard error.
    double s4 = 0.0;
    for (const auto& [x, z] : samples) {
        const double d = static_cast<double>(x) - mx;
        s4 += (d * d - vx) * (d * d - vx);
    }
    const double se_var = std::sqrt(s4 / dn / dn);
    out.mean_check_se = std::sqrt(out.se_z * out.se_z +
                                  (se_var / lambda) * (se_var / lambda));
    return out;
}

}  // namespace poisbound
