#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "poisbound/rng.hpp"
#include "poisbound/stein.hpp"

using namespace poisbound;

namespace {

IndicatorSet random_set(Rng& rng, std::uint64_t top) {
    IndicatorSet a;
    for (std::uint64_t j = 0; j <= top; ++j)
        if (rng.uniform() < 0.5) a.members.push_back(j);
    if (a.members.empty()) a.members.push_back(0);
    return a;
}

double indicator_target(double lambda, const IndicatorSet& a) {
    double t = 0.0;
    for (std::uint64_t j : a.members) t += poisson_pmf(lambda, j);
    return t;
}

}  // namespace

TEST_CASE("singleton solution matches the defining recurrence anchors") {
    // At i = 1 the equation at index 0 gives f(1) = (1{0 in A} - pmf(a))/lambda
    // for A = {a} in closed form.
    for (double lambda : {0.3, 1.0, 4.2}) {
        CHECK(detail::stein_f_singleton(lambda, 0, 1) ==
              Catch::Approx((1.0 - std::exp(-lambda)) / lambda).epsilon(1e-14));
        CHECK(detail::stein_f_singleton(lambda, 3, 1) ==
              Catch::Approx(-poisson_pmf(lambda, 3) / lambda).epsilon(1e-13));
        CHECK(detail::stein_f_singleton(lambda, 2, 0) == 0.0);
    }
    // lambda = 1, A = {0}: f(2) from one recurrence step.
    const double f1 = detail::stein_f_singleton(1.0, 0, 1);
    const double f2 = detail::stein_f_singleton(1.0, 0, 2);
    CHECK(1.0 * f2 - 1.0 * f1 == Catch::Approx(0.0 - std::exp(-1.0)).margin(1e-14));
}

TEST_CASE("indicator residuals stay below 1e-10 far beyond the naive range") {
    // The naive forward recursion breaks down near i = 15; the series form
    // must satisfy the equation to 1e-10 at every index up to 200.
    Rng rng(SeedSpec{2024, 1});
    for (double lambda : {0.1, 1.0, 10.0}) {
        const IndicatorSet a = random_set(rng, 50);
        const double target = indicator_target(lambda, a);
        double fprev = stein_f_indicator(lambda, a, 0);
        for (std::uint64_t i = 0; i <= 200; ++i) {
            const double fnext = stein_f_indicator(lambda, a, i + 1);
            const double res = lambda * fnext - static_cast<double>(i) * fprev -
                               ((a.contains(i) ? 1.0 : 0.0) - target);
            REQUIRE(std::fabs(res) < 1e-10);
            fprev = fnext;
        }
    }
}

TEST_CASE("magic factors: closed forms and plug-in values") {
    CHECK(kLipschitzFactorExact ==
          Catch::Approx(1.1436851799476091).epsilon(1e-14));
    CHECK(kLipschitzFactor >= kLipschitzFactorExact);

    const MagicFactors m = magic_factors(4.0, 3, 2);
    CHECK(m.sup_f_g == 1.0);
    CHECK(m.sup_delta_f_g == Catch::Approx(1.1437 / 2.0).margin(1e-15));
    CHECK(m.sup_f_A == Catch::Approx(0.5).margin(1e-15));
    CHECK(m.sup_delta_f_A == Catch::Approx(0.25).margin(1e-15));
    CHECK(m.f0_at_1 == Catch::Approx(0.25).margin(1e-15));
    CHECK(m.f0_from_2 == Catch::Approx(1.0 / 16.0).margin(1e-15));
    REQUIRE(m.delta_f0_n.has_value());
    CHECK(*m.delta_f0_n == Catch::Approx(std::min(0.5, 1.0 / 16.0)).margin(1e-15));
    REQUIRE(m.delta_f0v.has_value());
    CHECK(*m.delta_f0v == Catch::Approx(1.0).margin(1e-15));
    CHECK(m.lemma_v_precondition_ok);

    // Small lambda saturates every factor at 1.
    const MagicFactors s = magic_factors(0.5);
    CHECK(s.sup_f_A == 1.0);
    CHECK(s.sup_delta_f_A == 1.0);
    CHECK(s.sup_delta_f_g == 1.0);

    // v > lambda: the level-set lemma does not apply and the factor falls
    // back to the general indicator difference bound.
    const MagicFactors f = magic_factors(2.0, 5, std::nullopt);
    CHECK_FALSE(f.lemma_v_precondition_ok);
    CHECK(*f.delta_f0v == f.sup_delta_f_A);
}

TEST_CASE("magic factors dominate the computed solutions") {
    Rng rng(SeedSpec{2024, 2});
    for (double lambda : {0.5, 2.0, 8.0}) {
        const MagicFactors m = magic_factors(lambda);
        for (int trial = 0; trial < 10; ++trial) {
            const IndicatorSet a = random_set(rng, 40);
            double fprev = 0.0;
            for (std::uint64_t i = 1; i <= 120; ++i) {
                const double f = stein_f_indicator(lambda, a, i);
                REQUIRE(std::fabs(f) <= m.sup_f_A + 1e-12);
                REQUIRE(std::fabs(f - fprev) <= m.sup_delta_f_A + 1e-12);
                fprev = f;
            }
        }
        // Singleton {0} specifics.
        REQUIRE(std::fabs(detail::stein_f_singleton(lambda, 0, 1)) <=
                m.f0_at_1 + 1e-12);
        for (std::uint64_t i = 2; i <= 120; ++i)
            REQUIRE(std::fabs(detail::stein_f_singleton(lambda, 0, i)) <=
                    m.f0_from_2 + 1e-12);
        for (std::uint64_t n : {1, 2, 5}) {
            const MagicFactors mn = magic_factors(lambda, std::nullopt, n);
            for (std::uint64_t i = n; i <= 120; ++i) {
                const double df = detail::stein_f_singleton(lambda, 0, i + 1) -
                                  detail::stein_f_singleton(lambda, 0, i);
                REQUIRE(std::fabs(df) <= *mn.delta_f0_n + 1e-12);
            }
        }
        // Level sets {0..v} with v <= lambda: one-sided difference bound.
        for (std::uint64_t v = 0; static_cast<double>(v) <= lambda; ++v) {
            const MagicFactors mv = magic_factors(lambda, v, std::nullopt);
            REQUIRE(mv.lemma_v_precondition_ok);
            const IndicatorSet lv = IndicatorSet::interval(v);
            for (std::uint64_t i = v + 2; i <= 120; ++i) {
                const double df = stein_f_indicator(lambda, lv, i + 1) -
                                  stein_f_indicator(lambda, lv, i);
                REQUIRE(df <= *mv.delta_f0v + 1e-12);
            }
        }
    }
}

TEST_CASE("lipschitz solution: identity test function gives f = -1") {
    // For g(m) = m the unique bounded solution is f(i) = -1 for i >= 1:
    // lambda(-1) - i(-1) = i - lambda.
    const auto id = [](std::uint64_t m) { return static_cast<double>(m); };
    for (double lambda : {0.3, 1.0, 3.7, 20.0}) {
        SteinLipschitzSolution f(lambda, id);
        CHECK(f.expectation() == Catch::Approx(lambda).epsilon(1e-12));
        CHECK(f(0) == 0.0);
        for (std::uint64_t i = 1; i <= 60; ++i)
            REQUIRE(f(i) == Catch::Approx(-1.0).epsilon(1e-11));
    }
}

TEST_CASE("lipschitz solution obeys its magic factor") {
    for (double lambda : {0.6, 2.5, 12.0}) {
        const MagicFactors m = magic_factors(lambda);
        for (double cap : {1.0, 4.0, 9.0}) {
            SteinLipschitzSolution f(lambda, [cap](std::uint64_t k) {
                return std::min(static_cast<double>(k), cap);
            });
            // |f| is bounded on all of N_0, but the sqrt(lambda) difference
            // factor only covers Delta f(i) for i >= 1; Delta f(0) = f(1)
            // is merely bounded by 1.
            REQUIRE(std::fabs(f(1)) <= 1.0 + 1e-11);
            double fprev = f(1);
            for (std::uint64_t i = 2; i <= 80; ++i) {
                const double fi = f(i);  // residual checked internally
                REQUIRE(std::fabs(fi) <= m.sup_f_g + 1e-11);
                REQUIRE(std::fabs(fi - fprev) <= m.sup_delta_f_g + 1e-11);
                fprev = fi;
            }
        }
    }
}

TEST_CASE("non-Lipschitz test functions are rejected") {
    SteinLipschitzSolution f(1.0, [](std::uint64_t k) {
        return static_cast<double>(k) * static_cast<double>(k);
    });
    CHECK_THROWS_AS(f(3), std::domain_error);
}

TEST_CASE("stein identity equals the direct probability gap") {
    Rng rng(SeedSpec{2024, 3});
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<std::uint64_t> sup;
        std::vector<double> mass;
        double total = 0.0;
        for (std::uint64_t v = 0; v <= 12; ++v)
            if (rng.uniform() < 0.4) {
                sup.push_back(v);
                const double w = rng.uniform(0.05, 1.0);
                mass.push_back(w);
                total += w;
            }
        if (sup.size() < 2) continue;
        for (double& w : mass) w /= total;
        const IntegerPMF law(sup, mass);
        const double lambda = rng.uniform(0.1, 10.0);
        const IndicatorSet a = random_set(rng, 15);

        double rhs = indicator_target(lambda, a);
        for (std::uint64_t j : a.members) rhs -= law.prob(j);
        CHECK(stein_discrepancy(law, lambda, a) ==
              Catch::Approx(rhs).margin(1e-10));

        // Lipschitz flavor with g = identity: the gap is lambda - E[X].
        const std::function<double(std::uint64_t)> id =
            [](std::uint64_t m) { return static_cast<double>(m); };
        CHECK(stein_discrepancy(law, lambda, id) ==
              Catch::Approx(lambda - law.mean()).margin(1e-10));
    }
}

TEST_CASE("poisson expectation of a Lipschitz function") {
    const std::function<double(std::uint64_t)> id =
        [](std::uint64_t m) { return static_cast<double>(m); };
    for (double lambda : {0.2, 5.0, 60.0})
        CHECK(poisson_expectation_lip(lambda, id) ==
              Catch::Approx(lambda).epsilon(1e-12));
}
