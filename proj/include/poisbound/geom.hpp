#pragma once

// Geometry kernels: unit-ball volumes, a uniform-grid spatial index for
// capped nearest-neighbor and range queries, and Voronoi circumscribed
// radii in one and two dimensions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "poisbound/pointproc.hpp"

namespace poisbound {

/// Volume of the d-dimensional unit ball.
inline double unit_ball_volume(std::size_t d) {
    const double dd = static_cast<double>(d);
    return std::exp(dd / 2.0 * std::log(M_PI) - std::lgamma(dd / 2.0 + 1.0));
}

inline double sq_dist(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

/// Uniform-grid index over a point list; supports range queries and
/// nearest-neighbor queries capped at a maximum radius. Cell size is the
/// query radius scale so that a query touches O(3^d) cells.
class GridIndex {
public:
    GridIndex(const std::vector<Point>& points, const Box& box, double cell_size)
        : points_(points), box_(box), cell_(cell_size) {
        if (!(cell_ > 0.0))
            throw std::invalid_argument("GridIndex: cell size must be positive");
        const std::size_t d = box.dimension();
        dims_.resize(d);
        std::size_t total = 1;
        for (std::size_t j = 0; j < d; ++j) {
            dims_[j] = std::max<std::size_t>(
                1, static_cast<std::size_t>(
                       std::ceil((box.upper[j] - box.lower[j]) / cell_)));
            total *= dims_[j];
        }
        cells_.assign(total, {});
        for (std::size_t i = 0; i < points.size(); ++i)
            cells_[flat_index(points[i])].push_back(static_cast<int>(i));
    }

    /// Indices of all points within distance r of x (x itself excluded when
    /// `skip` names its index; pass -1 to keep everything).
    std::vector<int> within(const Point& x, double r, int skip = -1) const {
        std::vector<int> out;
        const double r2 = r * r;
        visit_cells(x, r, [&](int i) {
            if (i != skip && sq_dist(points_[i], x) <= r2) out.push_back(i);
        });
        return out;
    }

    /// Nearest neighbor of x within rmax; returns -1 if none.
    int nearest_within(const Point& x, double rmax, int skip = -1) const {
        int best = -1;
        double best2 = rmax * rmax;
        visit_cells(x, rmax, [&](int i) {
            if (i == skip) return;
            const double d2 = sq_dist(points_[i], x);
            if (d2 <= best2) {
                best2 = d2;
                best = i;
            }
        });
        return best;
    }

private:
    std::size_t coord_cell(double v, std::size_t j) const {
        const double rel = (v - box_.lower[j]) / cell_;
        std::int64_t c = static_cast<std::int64_t>(std::floor(rel));
        c = std::clamp<std::int64_t>(c, 0, static_cast<std::int64_t>(dims_[j]) - 1);
        return static_cast<std::size_t>(c);
    }

    std::size_t flat_index(const Point& p) const {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < dims_.size(); ++j)
            idx = idx * dims_[j] + coord_cell(p[j], j);
        return idx;
    }

    template <typename Fn>
    void visit_cells(const Point& x, double r, Fn&& fn) const {
        const std::size_t d = dims_.size();
        std::vector<std::size_t> lo(d), hi(d), cur(d);
        for (std::size_t j = 0; j < d; ++j) {
            lo[j] = coord_cell(x[j] - r, j);
            hi[j] = coord_cell(x[j] + r, j);
            cur[j] = lo[j];
        }
        while (true) {
            std::size_t idx = 0;
            for (std::size_t j = 0; j < d; ++j) idx = idx * dims_[j] + cur[j];
            for (int i : cells_[idx]) fn(i);
            std::size_t j = d;
            while (j-- > 0) {
                if (cur[j] < hi[j]) {
                    ++cur[j];
                    break;
                }
                cur[j] = lo[j];
                if (j == 0) return;
            }
        }
    }

    const std::vector<Point>& points_;
    Box box_;
    double cell_;
    std::vector<std::size_t> dims_;
    std::vector<std::vector<int>> cells_;
};

inline constexpr double kUnboundedCell = std::numeric_limits<double>::infinity();

/// Circumscribed radius of the 1-D Voronoi cell of x: the larger half-gap
/// to the nearest neighbor on each side, infinite when a side is empty.
inline double circumradius_1d(double x, const std::vector<double>& neighbors) {
    double left = kUnboundedCell, right = kUnboundedCell;
    for (double y : neighbors) {
        if (y < x) left = std::min(left, x - y);
        else if (y > x) right = std::min(right, y - x);
    }
    if (std::isinf(left) || std::isinf(right)) return kUnboundedCell;
    return 0.5 * std::max(left, right);
}

namespace detail {

struct Vec2 {
    double x, y;
};

// Clip a convex polygon by the half-plane {z : dot(n, z) <= b}.
inline std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, Vec2 n,
                                        double b) {
    std::vector<Vec2> out;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 a = poly[i];
        const Vec2 c = poly[(i + 1) % m];
        const double fa = n.x * a.x + n.y * a.y - b;
        const double fc = n.x * c.x + n.y * c.y - b;
        if (fa <= 0.0) out.push_back(a);
        if ((fa < 0.0 && fc > 0.0) || (fa > 0.0 && fc < 0.0)) {
            const double s = fa / (fa - fc);
            out.push_back({a.x + s * (c.x - a.x), a.y + s * (c.y - a.y)});
        }
    }
    return out;
}

// Bounded cell iff the neighbor directions positively span the plane,
// i.e. the largest angular gap between consecutive directions is < pi.
inline bool cell_bounded_2d(const Point& x, const std::vector<Point>& neighbors) {
    std::vector<double> ang;
    ang.reserve(neighbors.size());
    for (const auto& y : neighbors) {
        const double dx = y[0] - x[0], dy = y[1] - x[1];
        if (dx == 0.0 && dy == 0.0) continue;
        ang.push_back(std::atan2(dy, dx));
    }
    if (ang.size() < 3) return false;
    std::sort(ang.begin(), ang.end());
    double gap = ang.front() + 2.0 * M_PI - ang.back();
    for (std::size_t i = 1; i < ang.size(); ++i)
        gap = std::max(gap, ang[i] - ang[i - 1]);
    return gap < M_PI - 1e-12;
}

}  // namespace detail

/// Circumscribed radius of the 2-D Voronoi cell of x: intersect the
/// bisector half-planes by incremental convex clipping and take the
/// farthest vertex. Boundedness is decided exactly from the direction cone
/// of the neighbors; the clipping square is enlarged until no cell vertex
/// touches it.
inline double circumradius_2d(const Point& x, const std::vector<Point>& neighbors) {
    if (!detail::cell_bounded_2d(x, neighbors)) return kUnboundedCell;
    double scale = 0.0;
    for (const auto& y : neighbors)
        scale = std::max(scale, std::sqrt(sq_dist(x, y)));
    double h = 4.0 * scale;
    for (int attempt = 0; attempt < 60; ++attempt) {
        std::vector<detail::Vec2> poly = {{x[0] - h, x[1] - h},
                                          {x[0] + h, x[1] - h},
                                          {x[0] + h, x[1] + h},
                                          {x[0] - h, x[1] + h}};
        for (const auto& y : neighbors) {
            const detail::Vec2 n{y[0] - x[0], y[1] - x[1]};
            if (n.x == 0.0 && n.y == 0.0) continue;
            const double b = 0.5 * (n.x * (x[0] + y[0]) + n.y * (x[1] + y[1]));
            poly = detail::clip_halfplane(poly, n, b);
            if (poly.empty()) return 0.0;
        }
        bool touches = false;
        double r2 = 0.0;
        for (const auto& v : poly) {
            const double dx = v.x - x[0], dy = v.y - x[1];
            if (std::fabs(dx) >= h * (1.0 - 1e-9) || std::fabs(dy) >= h * (1.0 - 1e-9))
                touches = true;
            r2 = std::max(r2, dx * dx + dy * dy);
        }
        if (!touches) return std::sqrt(r2);
        h *= 4.0;  // bounded cell, just larger than the current square
    }
    throw std::runtime_error("circumradius_2d: clipping square did not stabilize");
}

/// Circumscribed radius dispatch for d in {1, 2}.
inline double circumradius(const Point& x, const std::vector<Point>& neighbors) {
    if (x.size() == 1) {
        std::vector<double> ys;
        ys.reserve(neighbors.size());
        for (const auto& y : neighbors) ys.push_back(y[0]);
        return circumradius_1d(x[0], ys);
    }
    if (x.size() == 2) return circumradius_2d(x, neighbors);
    throw std::invalid_argument("circumradius: only d = 1, 2 supported");
}

}  // namespace poisbound
