#pragma once

// Finite integer distributions and the three distances (total variation,
// Wasserstein, Kolmogorov) against other integer laws or a truncated
// Poisson target.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "poisbound/poisson.hpp"

namespace poisbound {

/// Finite-support probability mass function on the non-negative integers.
/// Immutable after construction; all invariants are checked up front.
class IntegerPMF {
public:
    enum class Origin { exact, empirical };

    IntegerPMF(std::vector<std::uint64_t> support, std::vector<double> mass,
               Origin origin = Origin::exact, std::uint64_t sample_count = 0)
        : support_(std::move(support)), mass_(std::move(mass)),
          origin_(origin), sample_count_(sample_count) {
        if (support_.size() != mass_.size() || support_.empty())
            throw std::invalid_argument("IntegerPMF: support/mass size mismatch");
        double total = 0.0;
        for (std::size_t i = 0; i < support_.size(); ++i) {
            if (i > 0 && support_[i] <= support_[i - 1])
                throw std::invalid_argument("IntegerPMF: support must be strictly ascending");
            if (mass_[i] < 0.0)
                throw std::invalid_argument("IntegerPMF: negative mass");
            total += mass_[i];
        }
        if (std::fabs(total - 1.0) > 1e-12)
            throw std::invalid_argument("IntegerPMF: masses must sum to 1");
    }

    /// Point mass at `value`.
    static IntegerPMF delta(std::uint64_t value) {
        return IntegerPMF({value}, {1.0});
    }

    /// Relative-frequency PMF from raw samples, tagged empirical(n).
    static IntegerPMF empirical(const std::vector<std::uint64_t>& samples) {
        if (samples.empty())
            throw std::invalid_argument("IntegerPMF::empirical: empty sample list");
        std::map<std::uint64_t, std::uint64_t> counts;
        for (std::uint64_t s : samples) ++counts[s];
        std::vector<std::uint64_t> sup;
        std::vector<double> mass;
        const double n = static_cast<double>(samples.size());
        for (const auto& [v, c] : counts) {
            sup.push_back(v);
            mass.push_back(static_cast<double>(c) / n);
        }
        return IntegerPMF(std::move(sup), std::move(mass), Origin::empirical,
                          samples.size());
    }

    const std::vector<std::uint64_t>& support() const { return support_; }
    const std::vector<double>& mass() const { return mass_; }
    Origin origin() const { return origin_; }
    std::uint64_t sample_count() const { return sample_count_; }
    std::uint64_t max_support() const { return support_.back(); }

    double prob(std::uint64_t k) const {
        auto it = std::lower_bound(support_.begin(), support_.end(), k);
        if (it == support_.end() || *it != k) return 0.0;
        return mass_[static_cast<std::size_t>(it - support_.begin())];
    }

    double cdf(std::uint64_t v) const {
        double s = 0.0;
        for (std::size_t i = 0; i < support_.size() && support_[i] <= v; ++i)
            s += mass_[i];
        return s;
    }

    double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < support_.size(); ++i)
            m += static_cast<double>(support_[i]) * mass_[i];
        return m;
    }

    double variance() const {
        const double m = mean();
        double v = 0.0;
        for (std::size_t i = 0; i < support_.size(); ++i) {
            const double d = static_cast<double>(support_[i]) - m;
            v += d * d * mass_[i];
        }
        return v;
    }

    /// Per-bin standard error sqrt(p(1-p)/n); zero for exact laws.
    double standard_error(std::uint64_t k) const {
        if (origin_ != Origin::empirical || sample_count_ == 0) return 0.0;
        const double p = prob(k);
        return std::sqrt(p * (1.0 - p) / static_cast<double>(sample_count_));
    }

    /// Dense mass vector on {0,...,max}; max defaults to max_support().
    std::vector<double> dense(std::uint64_t upto) const {
        std::vector<double> d(upto + 1, 0.0);
        for (std::size_t i = 0; i < support_.size(); ++i)
            if (support_[i] <= upto) d[support_[i]] = mass_[i];
        return d;
    }

    /// Two-column CSV (value,probability).
    std::string to_csv() const {
        std::string out = "value,probability\n";
        char buf[64];
        for (std::size_t i = 0; i < support_.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%llu,%.17g\n",
                          static_cast<unsigned long long>(support_[i]), mass_[i]);
            out += buf;
        }
        return out;
    }

private:
    std::vector<std::uint64_t> support_;
    std::vector<double> mass_;
    Origin origin_;
    std::uint64_t sample_count_;
};

namespace detail {
// Common dense grid of both laws; Poisson targets are truncated with a
// certified tail below 1e-12, which enters the declared error budget.
inline std::pair<std::vector<double>, std::vector<double>>
dense_pair(const IntegerPMF& p, const IntegerPMF& q) {
    const std::uint64_t m = std::max(p.max_support(), q.max_support());
    return {p.dense(m), q.dense(m)};
}

inline std::pair<std::vector<double>, std::vector<double>>
dense_pair(const IntegerPMF& p, const PoissonLaw& q) {
    std::vector<double> qm = q.truncated_masses(1e-12);
    const std::uint64_t m =
        std::max<std::uint64_t>(p.max_support(), qm.size() - 1);
    qm.resize(m + 1, 0.0);
    return {p.dense(m), std::move(qm)};
}
}  // namespace detail

/// Total variation distance (1/2) sum_k |p_k - q_k|.
template <typename Law>
double tv_distance(const IntegerPMF& p, const Law& q) {
    auto [pm, qm] = detail::dense_pair(p, q);
    double s = 0.0;
    for (std::size_t k = 0; k < pm.size(); ++k) s += std::fabs(pm[k] - qm[k]);
    return 0.5 * s;
}

/// Wasserstein distance as the L1 norm of the CDF difference; on the
/// integer lattice this equals the Lip(1) dual form.
template <typename Law>
double wasserstein_distance(const IntegerPMF& p, const Law& q) {
    auto [pm, qm] = detail::dense_pair(p, q);
    double s = 0.0, fp = 0.0, fq = 0.0;
    for (std::size_t k = 0; k < pm.size(); ++k) {
        fp += pm[k];
        fq += qm[k];
        s += std::fabs(fp - fq);
    }
    return s;
}

/// Kolmogorov distance max_v |F_p(v) - F_q(v)|.
template <typename Law>
double kolmogorov_distance(const IntegerPMF& p, const Law& q) {
    auto [pm, qm] = detail::dense_pair(p, q);
    double best = 0.0, fp = 0.0, fq = 0.0;
    for (std::size_t k = 0; k < pm.size(); ++k) {
        fp += pm[k];
        fq += qm[k];
        best = std::max(best, std::fabs(fp - fq));
    }
    return best;
}

/// The sequence D(i) = i P(X=i) - lambda P(X=i-1), i >= 1, which vanishes
/// identically when X is Poisson(lambda).
struct DiscrepancyVector {
    double lambda;
    std::vector<double> values;  // values[i-1] = D(i), i = 1..max_support+1

    static DiscrepancyVector of(const IntegerPMF& p, double lambda) {
        if (!(lambda > 0.0))
            throw std::domain_error("DiscrepancyVector: lambda must be positive");
        const std::uint64_t m = p.max_support();
        std::vector<double> d = p.dense(m);
        DiscrepancyVector out{lambda, std::vector<double>(m + 1, 0.0)};
        for (std::uint64_t i = 1; i <= m + 1; ++i) {
            const double pi = i <= m ? d[i] : 0.0;
            out.values[i - 1] = static_cast<double>(i) * pi - lambda * d[i - 1];
        }
        return out;
    }

    /// Telescoping check value: sum_i D(i) = E[X] - lambda.
    double total() const {
        return std::accumulate(values.begin(), values.end(), 0.0);
    }
};

}  // namespace poisbound
