#pragma once

// Seeded sampling of Poisson and binomial point processes on axis-aligned
// boxes, plus the buffer arithmetic that keeps window statistics free of
// boundary effects.

#include <array>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "poisbound/rng.hpp"

namespace poisbound {

using Point = std::vector<double>;

struct Box {
    std::vector<double> lower, upper;

    Box(std::vector<double> lo, std::vector<double> hi)
        : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size() || lower.empty())
            throw std::invalid_argument("Box: dimension mismatch");
        for (std::size_t j = 0; j < lower.size(); ++j)
            if (!(lower[j] < upper[j]))
                throw std::invalid_argument("Box: lower must be below upper");
    }

    static Box unit(std::size_t d) {
        return Box(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
    }

    std::size_t dimension() const { return lower.size(); }

    double volume() const {
        double v = 1.0;
        for (std::size_t j = 0; j < lower.size(); ++j) v *= upper[j] - lower[j];
        return v;
    }

    bool contains(const Point& p) const {
        for (std::size_t j = 0; j < lower.size(); ++j)
            if (p[j] < lower[j] || p[j] > upper[j]) return false;
        return true;
    }
};

/// Expand every face of `w` outward by `rho`.
inline Box buffered_box(const Box& w, double rho) {
    if (rho < 0.0) throw std::invalid_argument("buffered_box: rho must be >= 0");
    std::vector<double> lo = w.lower, hi = w.upper;
    for (std::size_t j = 0; j < lo.size(); ++j) {
        lo[j] -= rho;
        hi[j] += rho;
    }
    return Box(std::move(lo), std::move(hi));
}

struct PointPattern {
    enum class IntensityTag { poisson, binomial };

    std::size_t dimension = 0;
    std::vector<Point> points;
    Box generating_box;
    IntensityTag intensity_tag = IntensityTag::poisson;
    double intensity_param = 0.0;  // t for poisson, n for binomial

    std::string to_csv() const {
        std::string out;
        char buf[64];
        for (const auto& p : points) {
            for (std::size_t j = 0; j < p.size(); ++j) {
                std::snprintf(buf, sizeof buf, j + 1 < p.size() ? "%.17g," : "%.17g\n",
                              p[j]);
                out += buf;
            }
        }
        return out;
    }
};

namespace detail {
inline Point uniform_point(const Box& box, Rng& rng) {
    Point p(box.dimension());
    for (std::size_t j = 0; j < p.size(); ++j)
        p[j] = rng.uniform(box.lower[j], box.upper[j]);
    return p;
}
}  // namespace detail

/// Homogeneous Poisson process with intensity t on `box`; the count is
/// Poisson(t * vol) and the points are i.i.d. uniform.
inline PointPattern sample_poisson(const Box& box, double t, SeedSpec seed) {
    if (t < 0.0) throw std::invalid_argument("sample_poisson: t must be >= 0");
    Rng rng(seed);
    PointPattern pp{box.dimension(), {}, box, PointPattern::IntensityTag::poisson, t};
    if (t == 0.0) return pp;
    const std::uint64_t n = rng.poisson(t * box.volume());
    pp.points.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i)
        pp.points.push_back(detail::uniform_point(box, rng));
    return pp;
}

/// Exactly n i.i.d. uniform points on `box`.
inline PointPattern sample_binomial(std::uint64_t n, const Box& box, SeedSpec seed) {
    Rng rng(seed);
    PointPattern pp{box.dimension(), {}, box, PointPattern::IntensityTag::binomial,
                    static_cast<double>(n)};
    pp.points.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i)
        pp.points.push_back(detail::uniform_point(box, rng));
    return pp;
}

}  // namespace poisbound
