#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "poisbound/pmf.hpp"
#include "poisbound/poisson.hpp"
#include "poisbound/special.hpp"

using namespace poisbound;

// Reference values computed independently with 30-digit arithmetic.

TEST_CASE("regularized incomplete gamma") {
    CHECK(gamma_p(0.5, 1.0) == Catch::Approx(0.84270079294971487).epsilon(1e-14));
    CHECK(gamma_p(2.5, 3.0) == Catch::Approx(0.69378108158672160).epsilon(1e-14));
    CHECK(gamma_p(10.0, 4.0) == Catch::Approx(0.0081322427969338632).epsilon(1e-13));
    CHECK(gamma_p(3.0, 0.0) == 0.0);
    CHECK_THROWS_AS(gamma_p(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(gamma_p(1.0, -1.0), std::domain_error);
}

TEST_CASE("chi-square quantile") {
    CHECK(chi_square_quantile(0.95, 1.0) ==
          Catch::Approx(3.8414588206941260).epsilon(1e-12));
    CHECK(chi_square_quantile(0.99, 5.0) ==
          Catch::Approx(15.086272469388990).epsilon(1e-12));
    CHECK(chi_square_quantile(0.9999, 15.0) ==
          Catch::Approx(44.263224944174978).epsilon(1e-12));
    // Round trip through the CDF.
    for (double p : {0.01, 0.3, 0.7, 0.999})
        for (double k : {1.0, 4.0, 20.0})
            CHECK(gamma_p(k / 2.0, chi_square_quantile(p, k) / 2.0) ==
                  Catch::Approx(p).margin(1e-12));
}

TEST_CASE("poisson pmf, cdf and survival") {
    CHECK(poisson_pmf(3.7, 5) == Catch::Approx(0.14286892970396471).epsilon(1e-14));
    CHECK(poisson_cdf(3.7, 5) == Catch::Approx(0.83008829507595711).epsilon(1e-14));
    CHECK(poisson_sf(3.7, 12) ==
          Catch::Approx(1.3042399642776548e-4).epsilon(1e-12));
    CHECK(poisson_cdf(3.7, 5) + poisson_sf(3.7, 5) == Catch::Approx(1.0).margin(1e-14));
    // pmf sums to the cdf.
    double s = 0.0;
    for (std::uint64_t k = 0; k <= 9; ++k) s += poisson_pmf(2.2, k);
    CHECK(s == Catch::Approx(poisson_cdf(2.2, 9)).margin(1e-14));

    const PoissonLaw law(2.2);
    CHECK(law.pmf(3) == Catch::Approx(poisson_pmf(2.2, 3)).margin(1e-16));
    const auto masses = law.truncated_masses();
    double total = 0.0;
    for (double m : masses) total += m;
    CHECK(total >= 1.0 - 1e-12);
    CHECK(total <= 1.0 + 1e-14);
}

TEST_CASE("IntegerPMF validation and moments") {
    CHECK_THROWS_AS(IntegerPMF({0, 0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(IntegerPMF({0, 1}, {0.7, 0.7}), std::invalid_argument);
    CHECK_THROWS_AS(IntegerPMF({0}, {-1.0}), std::invalid_argument);

    const IntegerPMF p({0, 2, 5}, {0.2, 0.5, 0.3});
    CHECK(p.mean() == Catch::Approx(2.5).margin(1e-15));
    CHECK(p.variance() == Catch::Approx(3.25).margin(1e-14));
    CHECK(p.prob(2) == 0.5);
    CHECK(p.prob(1) == 0.0);
    CHECK(p.cdf(2) == Catch::Approx(0.7).margin(1e-15));
    CHECK(p.cdf(10) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("empirical PMF from samples") {
    const IntegerPMF e = IntegerPMF::empirical({0, 0, 1, 2, 2, 2, 2, 0});
    CHECK(e.prob(0) == Catch::Approx(3.0 / 8.0).margin(1e-15));
    CHECK(e.prob(1) == Catch::Approx(1.0 / 8.0).margin(1e-15));
    CHECK(e.prob(2) == Catch::Approx(4.0 / 8.0).margin(1e-15));
    CHECK(e.sample_count() == 8);
    CHECK(e.standard_error(1) ==
          Catch::Approx(std::sqrt(0.125 * 0.875 / 8.0)).margin(1e-15));
    // Exact laws report no sampling error.
    CHECK(IntegerPMF({0, 1}, {0.5, 0.5}).standard_error(0) == 0.0);
}

TEST_CASE("distances on hand-checked examples") {
    const IntegerPMF d0({3}, {1.0});
    const IntegerPMF d1({7}, {1.0});
    CHECK(tv_distance(d0, d1) == Catch::Approx(1.0).margin(1e-15));
    CHECK(wasserstein_distance(d0, d1) == Catch::Approx(4.0).margin(1e-15));
    CHECK(kolmogorov_distance(d0, d1) == Catch::Approx(1.0).margin(1e-15));
    CHECK(tv_distance(d0, d0) == 0.0);

    const IntegerPMF bern({0, 1}, {0.5, 0.5});
    CHECK(tv_distance(bern, d0) == Catch::Approx(1.0).margin(1e-15));
    CHECK(wasserstein_distance(bern, IntegerPMF({0}, {1.0})) ==
          Catch::Approx(0.5).margin(1e-15));

    // Against a Poisson target (30-digit reference values).
    const IntegerPMF law({0, 1, 3}, {0.2, 0.5, 0.3});
    CHECK(tv_distance(law, PoissonLaw(1.0)) ==
          Catch::Approx(0.37080731863331729).epsilon(1e-12));
    CHECK(wasserstein_distance(law, PoissonLaw(1.0)) ==
          Catch::Approx(0.44667385288586554).epsilon(1e-12));
    CHECK(kolmogorov_distance(law, PoissonLaw(1.0)) ==
          Catch::Approx(0.21969860292860580).epsilon(1e-12));
    CHECK(tv_distance(IntegerPMF({0, 1}, {0.7, 0.3}), PoissonLaw(0.3)) ==
          Catch::Approx(0.077754533795484640).epsilon(1e-12));

    // TV and Kolmogorov never exceed 1; Kolmogorov <= TV.
    CHECK(kolmogorov_distance(law, PoissonLaw(1.0)) <=
          tv_distance(law, PoissonLaw(1.0)) + 1e-15);
}

TEST_CASE("discrepancy vector telescopes to the mean gap") {
    // sum_i (i P(X=i) - lambda P(X=i-1)) = E[X] - lambda.
    const IntegerPMF law({0, 1, 3, 6}, {0.1, 0.4, 0.3, 0.2});
    for (double lambda : {0.4, 1.0, 2.7}) {
        const DiscrepancyVector d = DiscrepancyVector::of(law, lambda);
        CHECK(d.total() == Catch::Approx(law.mean() - lambda).margin(1e-12));
        // Spot-check one entry against the definition.
        CHECK(d.values[0] ==
              Catch::Approx(1.0 * law.prob(1) - lambda * law.prob(0)).margin(1e-15));
    }
}

TEST_CASE("poisson truncation index certifies the tail") {
    for (double lambda : {0.2, 3.0, 40.0}) {
        const std::uint64_t v = poisson_truncation_index(lambda, 1e-12);
        CHECK(poisson_sf(lambda, v) < 1e-12);
    }
}
