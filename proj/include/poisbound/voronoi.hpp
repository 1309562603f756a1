#pragma once

// Poisson-Voronoi radii: the minimal circumscribed radius (d = 1, 2) with
// its Weibull approximation, and the maximal inradius with its Gumbel
// approximation, including all constants of both theorems.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "poisbound/geom.hpp"
#include "poisbound/parallel.hpp"
#include "poisbound/pmf.hpp"
#include "poisbound/pointproc.hpp"

namespace poisbound {

/// Constants of the circumradius and inradius theorems, derived from the
/// containment probability p_{d+1}.
struct VoronoiConstants {
    std::size_t d = 1;
    double p_succ = 0.0;    // estimate of p_{d+1}
    double p_ci = 0.0;      // 3-sigma half-width of the estimate
    double alpha2 = 0.0;
    double c_tv = 0.0;      // 3 * 2^{d(d+3)} / (alpha2 * p)
    double c_k = 0.0;
    double c_gumbel = 0.0;  // 2^{d+2}(4^d + 2^d + 2) + 1
};

/// alpha_2 = (2^{d(d+1)} p_{d+1} / (d+1)!)^{1/(d+1)}, in log space.
inline double alpha2(std::size_t d, double p_succ) {
    if (!(p_succ > 0.0 && p_succ <= 1.0))
        throw std::domain_error("alpha2: p_succ in (0,1] required");
    const double dd = static_cast<double>(d);
    return std::exp((dd * (dd + 1.0) * std::log(2.0) + std::log(p_succ) -
                     std::lgamma(dd + 2.0)) /
                    (dd + 1.0));
}

/// Monte Carlo estimate of p_{d+1}: the probability that the Voronoi cell
/// of the origin w.r.t. d+1 uniform points in B(0,2) fits inside B(0,1),
/// i.e. that its circumscribed radius is at most 1. Returns (estimate,
/// 3-sigma half-width).
inline std::pair<double, double> estimate_p(std::size_t d, std::uint64_t reps,
                                            SeedSpec seed) {
    if (d != 1 && d != 2)
        throw std::invalid_argument("estimate_p: only d = 1, 2 supported");
    if (reps < 10000)
        throw std::invalid_argument("estimate_p: reps >= 10^4 required");
    Rng rng(seed);
    std::uint64_t hits = 0;
    const Point origin(d, 0.0);
    std::vector<Point> pts(d + 1, Point(d));
    for (std::uint64_t rep = 0; rep < reps; ++rep) {
        for (auto& p : pts) {
            // Uniform in the ball of radius 2 by rejection from the cube.
            double n2;
            do {
                n2 = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    p[j] = rng.uniform(-2.0, 2.0);
                    n2 += p[j] * p[j];
                }
            } while (n2 > 4.0);
        }
        if (circumradius(origin, pts) <= 1.0) ++hits;
    }
    const double est = static_cast<double>(hits) / static_cast<double>(reps);
    const double se = std::sqrt(est * (1.0 - est) / static_cast<double>(reps));
    return {est, 3.0 * se};
}

inline VoronoiConstants voronoi_constants(std::size_t d, double p_succ,
                                          double p_ci = 0.0) {
    VoronoiConstants c;
    c.d = d;
    c.p_succ = p_succ;
    c.p_ci = p_ci;
    c.alpha2 = alpha2(d, p_succ);
    const double dd = static_cast<double>(d);
    c.c_tv = 3.0 * std::pow(2.0, dd * (dd + 3.0)) / (c.alpha2 * p_succ);
    c.c_k = 1.0 + std::pow(2.0, dd * (dd + 3.0) + 4.0) / (c.alpha2 * p_succ) +
            std::pow(2.0, 2.0 * dd + 3.0) / c.alpha2 +
            std::pow(16.0, dd) / (c.alpha2 * c.alpha2);
    c.c_gumbel = std::pow(2.0, dd + 2.0) *
                     (std::pow(4.0, dd) + std::pow(2.0, dd) + 2.0) +
                 1.0;
    return c;
}

/// The closed-form intensity of the thinned process, the clustering error
/// bound and the intensity cap of the circumradius lemma.
struct MhatTheta {
    double mhat = 0.0;         // u^{d+1} exp(-4^d u / (alpha2 t^{1/(d+1)}))
    double theta_bound = 0.0;  // 2^{d(d+3)}/(alpha2 p) * u^{d+2}/t^{1/(d+1)}
    double m_cap = 0.0;        // u^{d+1}/p
};

inline MhatTheta mhat_theta(std::size_t d, double t, double u,
                            const VoronoiConstants& c) {
    if (!(t >= 1.0) || !(u > 0.0))
        throw std::invalid_argument("mhat_theta: t >= 1 and u > 0 required");
    const double dd = static_cast<double>(d);
    const double trate = std::pow(t, 1.0 / (dd + 1.0));
    MhatTheta out;
    out.mhat = std::pow(u, dd + 1.0) *
               std::exp(-std::pow(4.0, dd) * u / (c.alpha2 * trate));
    out.theta_bound = std::pow(2.0, dd * (dd + 3.0)) / (c.alpha2 * c.p_succ) *
                      std::pow(u, dd + 2.0) / trate;
    out.m_cap = std::pow(u, dd + 1.0) / c.p_succ;
    return out;
}

/// h_t(x, .) = t k_d (nearest-neighbor distance)^d - log t, with the
/// neighbor search capped at rmax; +infinity signals that the statistic
/// exceeds the value rmax was derived from.
inline double inradius_stat(const Point& x, const std::vector<Point>& points,
                            const GridIndex& index, std::size_t d, double t,
                            double rmax, int self_index) {
    const int j = index.nearest_within(x, rmax, self_index);
    if (j < 0) return std::numeric_limits<double>::infinity();
    const double dist = std::sqrt(sq_dist(x, points[static_cast<std::size_t>(j)]));
    return t * unit_ball_volume(d) * std::pow(dist, static_cast<double>(d)) -
           std::log(t);
}

namespace detail {

struct CountStats {
    double mean = 0.0, mean_se = 0.0;
    double zero_frac = 0.0, zero_se = 0.0;
    double tv = 0.0, tv_se = 0.0;
};

inline CountStats count_stats(const std::vector<std::uint64_t>& counts,
                              double poisson_mean) {
    CountStats s;
    const double n = static_cast<double>(counts.size());
    double sum = 0.0, sum2 = 0.0, zeros = 0.0;
    for (std::uint64_t c : counts) {
        sum += static_cast<double>(c);
        sum2 += static_cast<double>(c) * static_cast<double>(c);
        if (c == 0) zeros += 1.0;
    }
    s.mean = sum / n;
    s.mean_se = std::sqrt(std::max(0.0, sum2 / n - s.mean * s.mean) / n);
    s.zero_frac = zeros / n;
    s.zero_se = std::sqrt(s.zero_frac * (1.0 - s.zero_frac) / n);
    const IntegerPMF emp = IntegerPMF::empirical(counts);
    s.tv = tv_distance(emp, PoissonLaw(poisson_mean));
    double se = 0.0;
    for (std::uint64_t v : emp.support()) se += emp.standard_error(v);
    s.tv_se = 0.5 * se;
    return s;
}

}  // namespace detail

struct CircumResult {
    std::size_t d = 1;
    double t = 0.0;
    std::uint64_t reps = 0;
    double s_t = 0.0;
    std::vector<double> u_grid;
    std::vector<double> mean_count, mean_count_se;   // E[xi_t([0,u])]
    std::vector<double> survival, survival_se;       // P(T_t > u)
    std::vector<double> tv, tv_se, tv_bound;         // vs Poisson(u^{d+1})
    std::vector<double> mhat, exp_minus_mhat, m_cap;
    std::vector<double> mhat_rate, mhat_rate_se;     // empirical Mhat
    double weibull_kolmogorov = 0.0;                 // grid sup
    double c_k_bound = 0.0;
};

/// Simulate the rescaled circumradius process on the unit window. The
/// simulation uses constants at the point estimate of p; all verdict
/// bounds use the CI-pessimistic (larger) end so estimator noise in p
/// cannot produce spurious failures.
inline CircumResult simulate_circum(std::size_t d, double t,
                                    const std::vector<double>& u_grid,
                                    std::uint64_t reps, SeedSpec seed,
                                    const VoronoiConstants& c,
                                    unsigned workers = 1) {
    if (d != 1 && d != 2)
        throw std::invalid_argument("simulate_circum: only d = 1, 2 supported");
    if (!(t >= 1.0)) throw std::invalid_argument("simulate_circum: t >= 1 required");
    if (u_grid.empty() || !std::is_sorted(u_grid.begin(), u_grid.end()))
        throw std::invalid_argument("simulate_circum: ascending u-grid required");

    const double dd = static_cast<double>(d);
    const double kd = unit_ball_volume(d);
    const double s_t = c.alpha2 * kd * std::pow(t, (dd + 2.0) / (dd + 1.0));
    const double u_max = u_grid.back();
    const double r_max = std::pow(u_max / s_t, 1.0 / dd);
    const Box w = Box::unit(d);
    const Box sim = buffered_box(w, 6.0 * r_max);
    const std::size_t g = u_grid.size();

    struct RepCounts {
        std::vector<std::uint64_t> counts, mhat_counts;
    };
    const auto per_rep = map_reps(reps, workers, [&](std::uint64_t rep) {
        const PointPattern eta =
            sample_poisson(sim, t, seed.substream(0x63697263ULL, rep));
        const GridIndex index(eta.points, sim, std::max(2.0 * r_max, 1e-12));
        RepCounts rc{std::vector<std::uint64_t>(g, 0),
                     std::vector<std::uint64_t>(g, 0)};
        std::vector<Point> nb;
        for (std::size_t i = 0; i < eta.points.size(); ++i) {
            const Point& x = eta.points[i];
            if (!w.contains(x)) continue;
            // Locality: C(x, nu) <= r_max iff the cell computed from the
            // neighbors within 2 r_max already fits in B(x, r_max).
            const std::vector<int> ids =
                index.within(x, 2.0 * r_max, static_cast<int>(i));
            if (ids.size() < d + 1) continue;  // cell cannot fit in B(x, r_max)
            nb.clear();
            for (int id : ids) nb.push_back(eta.points[static_cast<std::size_t>(id)]);
            const double cr = circumradius(x, nb);
            if (cr > r_max) continue;
            const double mark = s_t * std::pow(cr, dd);
            for (std::size_t j = 0; j < g; ++j) {
                if (mark > u_grid[j]) continue;
                ++rc.counts[j];
                // Empirical Mhat: marked nuclei with exactly d+1 process
                // points in B(x, 4 (u/s_t)^{1/d}).
                const double ru = std::pow(u_grid[j] / s_t, 1.0 / dd);
                if (index.within(x, 4.0 * ru, static_cast<int>(i)).size() ==
                    static_cast<std::size_t>(d + 1))
                    ++rc.mhat_counts[j];
            }
        }
        return rc;
    });
    std::vector<std::vector<std::uint64_t>> counts(g), mhat_counts(g);
    for (auto& v : counts) v.reserve(reps);
    for (auto& v : mhat_counts) v.reserve(reps);
    for (const auto& rc : per_rep)
        for (std::size_t j = 0; j < g; ++j) {
            counts[j].push_back(rc.counts[j]);
            mhat_counts[j].push_back(rc.mhat_counts[j]);
        }

    // CI-pessimistic constants for the verdicts.
    const double p_lo = std::max(1e-12, c.p_succ - c.p_ci);
    const VoronoiConstants c_pess = voronoi_constants(d, p_lo, 0.0);
    const double trate = std::pow(t, 1.0 / (dd + 1.0));

    CircumResult res;
    res.d = d;
    res.t = t;
    res.reps = reps;
    res.s_t = s_t;
    res.u_grid = u_grid;
    res.c_k_bound = c_pess.c_k / trate;
    for (std::size_t j = 0; j < g; ++j) {
        const double u = u_grid[j];
        const auto s = detail::count_stats(counts[j], std::pow(u, dd + 1.0));
        res.mean_count.push_back(s.mean);
        res.mean_count_se.push_back(s.mean_se);
        res.survival.push_back(s.zero_frac);
        res.survival_se.push_back(s.zero_se);
        res.tv.push_back(s.tv);
        res.tv_se.push_back(s.tv_se);
        res.tv_bound.push_back(c_pess.c_tv * std::pow(u, dd + 2.0) / trate);
        const MhatTheta mt = mhat_theta(d, t, u, c);
        const MhatTheta mt_pess = mhat_theta(d, t, u, c_pess);
        res.mhat.push_back(mt.mhat);
        res.exp_minus_mhat.push_back(std::exp(-mt_pess.mhat));
        res.m_cap.push_back(mt_pess.m_cap);
        double msum = 0.0, msum2 = 0.0;
        for (std::uint64_t cmh : mhat_counts[j]) {
            msum += static_cast<double>(cmh);
            msum2 += static_cast<double>(cmh) * static_cast<double>(cmh);
        }
        const double n = static_cast<double>(reps);
        const double mmean = msum / n;
        res.mhat_rate.push_back(mmean);
        res.mhat_rate_se.push_back(
            std::sqrt(std::max(0.0, msum2 / n - mmean * mmean) / n));
        res.weibull_kolmogorov =
            std::max(res.weibull_kolmogorov,
                     std::fabs(s.zero_frac - std::exp(-std::pow(u, dd + 1.0))));
    }
    return res;
}

struct InradiusResult {
    std::size_t d = 1;
    double t = 0.0;
    std::uint64_t reps = 0;
    std::vector<double> u_grid;
    std::vector<double> mean_count, mean_count_se;  // E[xi_t((u,inf))]
    std::vector<double> cdf, cdf_se;                // P(T_t <= u)
    std::vector<double> tv, tv_se, tv_bound;        // vs Poisson(e^{-u})
    double gumbel_kolmogorov = 0.0;                 // grid sup
    double gumbel_bound = 0.0;
};

/// Simulate the transformed maximal inradius on the unit window.
inline InradiusResult simulate_inradius(std::size_t d, double t,
                                        const std::vector<double>& u_grid,
                                        std::uint64_t reps, SeedSpec seed,
                                        unsigned workers = 1) {
    if (!(t > std::exp(2.0)))
        throw std::invalid_argument("simulate_inradius: t > e^2 required");
    if (u_grid.empty() || !std::is_sorted(u_grid.begin(), u_grid.end()))
        throw std::invalid_argument("simulate_inradius: ascending u-grid required");
    const double logt = std::log(t);
    if (u_grid.front() <= -logt)
        throw std::domain_error("simulate_inradius: grid must satisfy u > -log t");

    const double dd = static_cast<double>(d);
    const double kd = unit_ball_volume(d);
    const double u_cap = u_grid.back();
    // h_t(x, .) > u depends only on points within v_t(u) of x.
    const double v_cap = std::pow((u_cap + logt) / (t * kd), 1.0 / dd);
    const Box w = Box::unit(d);
    const Box sim = buffered_box(w, v_cap);
    const std::size_t g = u_grid.size();

    const auto per_rep = map_reps(reps, workers, [&](std::uint64_t rep) {
        const PointPattern eta =
            sample_poisson(sim, t, seed.substream(0x696e7261ULL, rep));
        const GridIndex index(eta.points, sim, std::max(v_cap, 1e-12));
        std::vector<std::uint64_t> cnt(g, 0);
        for (std::size_t i = 0; i < eta.points.size(); ++i) {
            const Point& x = eta.points[i];
            if (!w.contains(x)) continue;
            const double h = inradius_stat(x, eta.points, index, d, t, v_cap,
                                           static_cast<int>(i));
            for (std::size_t j = 0; j < g; ++j)
                if (h > u_grid[j]) ++cnt[j];
        }
        return cnt;
    });
    std::vector<std::vector<std::uint64_t>> above(g);
    for (auto& v : above) v.reserve(reps);
    for (const auto& cnt : per_rep)
        for (std::size_t j = 0; j < g; ++j) above[j].push_back(cnt[j]);

    InradiusResult res;
    res.d = d;
    res.t = t;
    res.reps = reps;
    res.u_grid = u_grid;
    res.gumbel_bound = (std::pow(2.0, dd + 2.0) *
                            (std::pow(4.0, dd) + std::pow(2.0, dd) + 2.0) +
                        1.0) *
                       logt / std::sqrt(t);
    for (std::size_t j = 0; j < g; ++j) {
        const double u = u_grid[j];
        const auto s = detail::count_stats(above[j], std::exp(-u));
        res.mean_count.push_back(s.mean);
        res.mean_count_se.push_back(s.mean_se);
        res.cdf.push_back(s.zero_frac);  // T_t <= u iff no statistic above u
        res.cdf_se.push_back(s.zero_se);
        res.tv.push_back(s.tv);
        res.tv_se.push_back(s.tv_se);
        res.tv_bound.push_back(std::pow(2.0, dd) * (u + logt) /
                                   (std::exp(u / 2.0) * std::sqrt(t)) +
                               (u + logt) / (std::exp(u) * t));
        res.gumbel_kolmogorov =
            std::max(res.gumbel_kolmogorov,
                     std::fabs(s.zero_frac - std::exp(-std::exp(-u))));
    }
    return res;
}

}  // namespace poisbound
