#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "poisbound/runs.hpp"

using namespace poisbound;

TEST_CASE("run counting on hand-checked sequences") {
    // Non-overlapping convention: a run must start after a zero (or at 0).
    CHECK(count_runs({1, 1, 1}, 1) == 1);
    CHECK(count_runs({0, 1, 0, 1}, 1) == 2);
    CHECK(count_runs({1, 1, 0, 1, 1}, 2) == 2);
    CHECK(count_runs({1, 1, 1, 1}, 2) == 1);
    CHECK(count_runs({0, 0, 0}, 1) == 0);
    CHECK(count_runs({1, 0, 1, 1, 0, 1, 1, 1}, 2) == 2);
    CHECK(count_runs({1}, 1) == 1);
    CHECK_THROWS_AS(count_runs({1, 0}, 3), std::domain_error);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(RunsConfig(5, 0, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(RunsConfig(5, 6, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(RunsConfig(5, 2, 0.7), std::invalid_argument);
    CHECK_THROWS_AS(RunsConfig(5, 2, 0.0), std::invalid_argument);
}

TEST_CASE("exhaustive law matches the closed-form mean") {
    for (std::uint64_t n : {4, 9, 14}) {
        for (std::uint64_t k = 1; k <= n; ++k) {
            for (double p : {0.1, 0.3, 0.5}) {
                const RunsConfig cfg(n, k, p);
                const IntegerPMF law = brute_force_dist(cfg);
                REQUIRE(law.mean() == Catch::Approx(cfg.mean()).margin(1e-12));
            }
        }
    }
}

TEST_CASE("exhaustive law on a tiny case, by hand") {
    // n = 2, k = 1: sequences 00 -> 0, 01 -> 1, 10 -> 1, 11 -> 1 (the
    // second position of 11 is not preceded by a zero), so S = 2 is
    // impossible and P(S=1) = 2 p(1-p) + p^2.
    const RunsConfig cfg(2, 1, 0.3);
    const IntegerPMF law = brute_force_dist(cfg);
    CHECK(law.prob(0) == Catch::Approx(0.49).margin(1e-12));
    CHECK(law.prob(1) == Catch::Approx(0.51).margin(1e-12));
    CHECK(law.prob(2) == 0.0);
}

TEST_CASE("simulation agrees with exhaustive enumeration") {
    const RunsConfig cfg(12, 2, 0.4);
    const IntegerPMF exact = brute_force_dist(cfg);
    const IntegerPMF sim = simulate_runs_dist(cfg, 20000, SeedSpec{5, 0});
    CHECK(tv_distance(sim, exact) < 0.02);
}

TEST_CASE("size-bias identity and the induced coupling") {
    for (std::uint64_t n : {6, 10, 14}) {
        for (std::uint64_t k : {1, 2, 3}) {
            const RunsConfig cfg(n, k, 0.3);
            const RunsSizeBiasReport r = sizebias_runs_check(cfg);
            REQUIRE(r.max_identity_error <= 1e-12);
            REQUIRE(r.coupling.lambda() == Catch::Approx(cfg.mean()).margin(1e-14));
            // Z = -U_Y is nonpositive and the coupling is exact, so every
            // theorem bound must hold with zero q-sequence.
            REQUIRE(r.coupling.z_nonpositive());
            REQUIRE(q_sequence(r.coupling).all_zero(1e-11));
            const ExactBounds b = bounds_exact(r.coupling, 2, 1);
            REQUIRE(*b.tv.satisfied);
            REQUIRE(*b.wasserstein.satisfied);
            REQUIRE(*b.zero_prob.satisfied);
            REQUIRE(*b.cdf_at_v.satisfied);
            // Mean identity E[Z] = (Var(S) - lambda)/lambda.
            const IntegerPMF ps = r.coupling.x_marginal();
            REQUIRE(r.coupling.expect_z() ==
                    Catch::Approx((ps.variance() - cfg.mean()) / cfg.mean())
                        .margin(1e-11));
        }
    }
}

TEST_CASE("theorem bounds against the exhaustive left-hand sides") {
    for (std::uint64_t n : {8, 12, 16}) {
        for (std::uint64_t k : {1, 2, 4}) {
            for (double p : {0.1, 0.3, 0.5}) {
                const RunsConfig cfg(n, k, p);
                for (std::uint64_t v : {0, 1, 2}) {
                    const RunsBounds b = bounds_runs(cfg, v);
                    REQUIRE(b.tv.exact_lhs.has_value());
                    REQUIRE(*b.tv.satisfied);
                    REQUIRE(*b.uniform.satisfied);
                }
                // Explicit TV bound value.
                const RunsBounds b0 = bounds_runs(cfg, 0);
                CHECK(b0.tv.bound ==
                      Catch::Approx(static_cast<double>(2 * k + 1) *
                                    std::min(1.0, cfg.mean()) *
                                    std::pow(p, static_cast<double>(k)))
                          .margin(1e-14));
            }
        }
    }
}

TEST_CASE("zero-count probability bound") {
    for (std::uint64_t n : {6, 12, 18}) {
        for (std::uint64_t k : {1, 2, 3}) {
            for (double p : {0.1, 0.3, 0.5}) {
                const RunsConfig cfg(n, k, p);
                const IntegerPMF law = brute_force_dist(cfg);
                REQUIRE(law.prob(0) <= runs_zero_prob_bound(cfg) + 1e-12);
            }
        }
    }
}
