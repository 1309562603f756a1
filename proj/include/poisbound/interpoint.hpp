#pragma once

// Rescaled interpoint distances of a Poisson process: the mark point
// process xi_t over pairs with midpoint in W, the minimum Y_t, and the
// checks against the exponential approximation theorem.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "poisbound/geom.hpp"
#include "poisbound/parallel.hpp"
#include "poisbound/pmf.hpp"
#include "poisbound/pointproc.hpp"

namespace poisbound {

struct InterpointConfig {
    std::size_t d = 1;
    double t = 0.0;
    Box w;  // volume 1
    double u_max = 4.0;
    std::uint64_t reps = 10000;
    SeedSpec seed;

    InterpointConfig(std::size_t d_, double t_, double u_max_, std::uint64_t reps_,
                     SeedSpec seed_)
        : d(d_), t(t_), w(Box::unit(d_)), u_max(u_max_), reps(reps_), seed(seed_) {
        if (!(t > 0.0)) throw std::invalid_argument("InterpointConfig: t must be positive");
        if (!(u_max > 0.0 && u_max < t))
            throw std::invalid_argument("InterpointConfig: need 0 < u_max < t");
        if (std::fabs(w.volume() - 1.0) > 1e-12)
            throw std::invalid_argument("InterpointConfig: window volume must be 1");
    }

    /// Any pair with mark <= u_max has distance at most 2*rho, so both
    /// endpoints lie within rho of the midpoint; buffering by rho makes
    /// the window statistics exact.
    double buffer_radius() const {
        const double kd = unit_ball_volume(d);
        return 0.5 * std::pow(2.0 * u_max / (kd * t * t), 1.0 / static_cast<double>(d));
    }
};

/// All marks 2^{-1} t^2 k_d ||x-y||^d <= u_max over unordered pairs with
/// midpoint in W, sorted ascending.
inline std::vector<double> simulate_marks(const InterpointConfig& cfg,
                                          std::uint64_t replication) {
    const double kd = unit_ball_volume(cfg.d);
    const double rho = cfg.buffer_radius();
    const Box sim = buffered_box(cfg.w, rho);
    const PointPattern eta =
        sample_poisson(sim, cfg.t, cfg.seed.substream(0x69707464ULL, replication));
    const double max_dist2 = 4.0 * rho * rho;  // pairs farther apart exceed u_max
    std::vector<double> marks;
    Point mid(cfg.d);
    for (std::size_t i = 0; i < eta.points.size(); ++i) {
        for (std::size_t j = i + 1; j < eta.points.size(); ++j) {
            const double d2 = sq_dist(eta.points[i], eta.points[j]);
            if (d2 > max_dist2) continue;
            for (std::size_t c = 0; c < cfg.d; ++c)
                mid[c] = 0.5 * (eta.points[i][c] + eta.points[j][c]);
            if (!cfg.w.contains(mid)) continue;
            const double mark =
                0.5 * cfg.t * cfg.t * kd *
                std::pow(d2, static_cast<double>(cfg.d) / 2.0);
            if (mark <= cfg.u_max) marks.push_back(mark);
        }
    }
    std::sort(marks.begin(), marks.end());
    return marks;
}

/// Per-u aggregates over all replications.
struct InterpointResult {
    std::vector<double> u_grid;
    std::vector<double> mean_count;        // empirical E[xi_t([0,u])]
    std::vector<double> mean_count_se;
    std::vector<double> survival;          // P(Y_t > u)
    std::vector<double> survival_se;
    std::vector<double> tv_to_poisson;     // d_TV(xi_t([0,u]), Poisson(u))
    std::vector<double> tv_se;
    std::vector<double> tv_bound;          // (1 ^ u) 8u/t
    double sup_abs_survival_gap = 0.0;     // sup_u |P(Y_t>u) - e^{-u}|
    double min_signed_survival_gap = 0.0;  // min_u (P(Y_t>u) - e^{-u})
    double kolmogorov_bound = 0.0;         // 81/t
    std::uint64_t reps = 0;
};

inline std::vector<double> default_u_grid(double u_max) {
    std::vector<double> g;
    for (double u : {0.25, 0.5, 1.0, 2.0, 4.0})
        if (u <= u_max) g.push_back(u);
    return g;
}

namespace detail {
// Half the summed per-bin binomial standard errors: a first-order error
// estimate for an empirical TV distance.
inline double empirical_tv_se(const IntegerPMF& emp) {
    double se = 0.0;
    for (std::uint64_t v : emp.support()) se += emp.standard_error(v);
    return 0.5 * se;
}
}  // namespace detail

inline InterpointResult check_interpoint_bounds(const InterpointConfig& cfg,
                                                const std::vector<double>& u_grid,
                                                unsigned workers = 1) {
    if (cfg.reps < 100)
        throw std::invalid_argument("check_interpoint_bounds: reps >= 100 required");
    InterpointResult res;
    res.u_grid = u_grid;
    res.reps = cfg.reps;
    const std::size_t g = u_grid.size();
    const auto per_rep = map_reps(cfg.reps, workers, [&](std::uint64_t rep) {
        const std::vector<double> marks = simulate_marks(cfg, rep);
        std::vector<std::uint64_t> c(g);
        for (std::size_t j = 0; j < g; ++j) {
            const auto it = std::upper_bound(marks.begin(), marks.end(), u_grid[j]);
            c[j] = static_cast<std::uint64_t>(it - marks.begin());
        }
        return c;
    });
    std::vector<std::vector<std::uint64_t>> counts(g);
    for (auto& c : counts) c.reserve(cfg.reps);
    for (const auto& c : per_rep)
        for (std::size_t j = 0; j < g; ++j) counts[j].push_back(c[j]);
    const double n = static_cast<double>(cfg.reps);
    res.kolmogorov_bound = 81.0 / cfg.t;
    res.min_signed_survival_gap = 1e300;
    for (std::size_t j = 0; j < g; ++j) {
        double s = 0.0, s2 = 0.0, zeros = 0.0;
        for (std::uint64_t c : counts[j]) {
            s += static_cast<double>(c);
            s2 += static_cast<double>(c) * static_cast<double>(c);
            if (c == 0) zeros += 1.0;
        }
        const double mean = s / n;
        res.mean_count.push_back(mean);
        res.mean_count_se.push_back(
            std::sqrt(std::max(0.0, s2 / n - mean * mean) / n));
        const double surv = zeros / n;
        res.survival.push_back(surv);
        res.survival_se.push_back(std::sqrt(surv * (1.0 - surv) / n));
        const IntegerPMF emp = IntegerPMF::empirical(counts[j]);
        res.tv_to_poisson.push_back(tv_distance(emp, PoissonLaw(u_grid[j])));
        res.tv_se.push_back(detail::empirical_tv_se(emp));
        res.tv_bound.push_back(std::min(1.0, u_grid[j]) * 8.0 * u_grid[j] / cfg.t);
        const double gap = surv - std::exp(-u_grid[j]);
        res.sup_abs_survival_gap = std::max(res.sup_abs_survival_gap, std::fabs(gap));
        res.min_signed_survival_gap = std::min(res.min_signed_survival_gap, gap);
    }
    return res;
}

}  // namespace poisbound
