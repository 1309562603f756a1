#pragma once

// Counter-based splittable random streams. A stream is identified by
// (master_seed, stream_id); draw k of a stream is a pure function of
// (master_seed, stream_id, k), so replications can be scheduled on any
// number of workers and still produce identical output.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace poisbound {

struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    /// Derive the stream for replication `rep` of sub-experiment `tag`.
    SeedSpec substream(std::uint64_t tag, std::uint64_t rep) const {
        SeedSpec s;
        s.master_seed = master_seed;
        std::uint64_t z = stream_id ^ (tag * 0x9e3779b97f4a7c15ULL);
        z ^= rep + 0x9e3779b97f4a7c15ULL + (z << 6) + (z >> 2);
        s.stream_id = z;
        return s;
    }
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-mode generator: output(i) = mix(key + i*gamma). No mutable state
/// beyond the counter, so streams are cheap to fork and fully reproducible.
class Rng {
public:
    explicit Rng(SeedSpec seed)
        : key_(detail::splitmix64(seed.master_seed ^
                                  detail::splitmix64(seed.stream_id))),
          counter_(0) {}

    std::uint64_t next_u64() {
        return detail::splitmix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform in [0,1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in {0,...,n-1}.
    std::uint64_t uniform_index(std::uint64_t n) {
        // Rejection to avoid modulo bias.
        const std::uint64_t limit = n * (UINT64_MAX / n);
        std::uint64_t x;
        do { x = next_u64(); } while (x >= limit);
        return x % n;
    }

    /// Poisson draw; product-of-uniforms for small mean, PTRS rejection
    /// (Hormann) for large mean. Both paths depend only on this stream.
    std::uint64_t poisson(double mean) {
        if (mean < 0.0) throw std::domain_error("Rng::poisson: negative mean");
        if (mean == 0.0) return 0;
        if (mean < 30.0) {
            const double l = std::exp(-mean);
            std::uint64_t k = 0;
            double p = uniform();
            while (p > l) {
                ++k;
                p *= uniform();
            }
            return k;
        }
        return poisson_ptrs(mean);
    }

private:
    std::uint64_t poisson_ptrs(double mean) {
        const double slam = std::sqrt(mean);
        const double llam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        while (true) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::fabs(u);
            const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
                k * llam - mean - std::lgamma(k + 1.0))
                return static_cast<std::uint64_t>(k);
        }
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace poisbound
