#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "sn/kernels.hpp"

#include "oracle_tables.inc"

using namespace sn;

TEST_SUITE_BEGIN("kernels");

TEST_CASE("normal pdf/cdf reference values") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_pdf(0.0) == doctest::Approx(0.39894228040143268).epsilon(1e-14));
    CHECK(norm_cdf(-5.0) == doctest::Approx(2.8665157187919391e-7).epsilon(1e-12));
    for (const auto& row : kNormCdfOracle) {
        const double got = norm_cdf(row[0]);
        if (std::abs(row[0]) <= 8.0)
            CHECK(std::abs(got - row[1]) <= 1e-12 * std::abs(row[1]));
        else
            CHECK(std::abs(got - row[1]) <= 1e-15 + 1e-13 * std::abs(row[1]));
    }
}

TEST_CASE("normal quantile inverts the cdf") {
    CHECK(norm_quantile(0.975) == doctest::Approx(1.9599639845400545).epsilon(1e-13));
    for (double x = -8.0; x <= 8.0; x += 0.37) {
        const double p = norm_cdf(x);
        CHECK(std::abs(norm_quantile(p) - x) <= 1e-9 * (1.0 + std::abs(x)));
    }
    CHECK_THROWS_AS((void)norm_quantile(0.0), DomainError);
    CHECK_THROWS_AS((void)norm_quantile(1.0), DomainError);
}

TEST_CASE("zeta against high-precision references") {
    for (const auto& row : kZetaOracle) {
        const double x = row[0];
        for (int m = 0; m <= 4; ++m) {
            const double expect = row[m + 1];
            const double got = zeta(m, x);
            if (expect == 0.0) {
                CHECK(std::abs(got) <= 1e-300);  // underflowed-to-zero tail
            } else {
                INFO("m=", m, " x=", x, " got=", got, " expect=", expect);
                CHECK(std::abs(got - expect) <= 1e-10 * std::abs(expect));
            }
        }
    }
}

TEST_CASE("zeta special points") {
    CHECK(zeta(0, 0.0) == doctest::Approx(0.0).epsilon(1e-15));  // log(2*Phi(0)) = 0
    CHECK(zeta(1, 0.0) == doctest::Approx(0.79788456080286536).epsilon(1e-14));
    CHECK(zeta(1, -10.0) == doctest::Approx(10.098093233962512).epsilon(1e-12));
    CHECK(zeta(2, 0.0) == doctest::Approx(-0.63661977236758134).epsilon(1e-14));
    CHECK_THROWS_AS((void)zeta(5, 0.0), DomainError);
    CHECK_THROWS_AS((void)zeta(-1, 0.0), DomainError);
}

TEST_CASE("zeta derivatives form a chain") {
    // zeta_{m+1} equals the central difference of zeta_m
    const double h = 1e-3;
    for (int i = 0; i < 200; ++i) {
        const double x = -30.0 + 60.0 * i / 199.0;
        for (int m = 0; m <= 3; ++m) {
            const double fd = (zeta(m, x + h) - zeta(m, x - h)) / (2.0 * h);
            const double ex = zeta(m + 1, x);
            CHECK(std::abs(fd - ex) <= 1e-6 * (1.0 + std::abs(ex)));
        }
    }
}

TEST_CASE("Mills ratio positivity and tail behaviour") {
    double prev = zeta(0, -25.0);
    for (double x = -25.5; x >= -40.0; x -= 0.5) {
        CHECK(zeta(1, x) + x > 0.0);
        const double z0 = zeta(0, x);
        CHECK(std::isfinite(z0));
        CHECK(z0 < prev);
        prev = z0;
    }
    for (double x = -20.0; x <= 20.0; x += 0.25) CHECK(zeta(1, x) + x > 0.0);
}

TEST_CASE("half-normal cumulants") {
    CHECK(half_normal_cumulant<double>(1) == doctest::Approx(0.7978845608028654).epsilon(1e-12));
    CHECK(half_normal_cumulant<double>(2) == doctest::Approx(0.36338022763241866).epsilon(1e-12));
    CHECK(half_normal_cumulant<double>(3) == doctest::Approx(0.21801361414499016).epsilon(1e-12));
    CHECK(half_normal_cumulant<double>(4) == doctest::Approx(0.11477068205421886).epsilon(1e-12));
    // kappa_m = zeta_m(0) for m = 1, 3, 4; the second order carries the
    // extra unit from the quadratic term of the generating function
    CHECK(half_normal_cumulant<double>(1) == doctest::Approx(zeta(1, 0.0)).epsilon(1e-14));
    CHECK(half_normal_cumulant<double>(2) == doctest::Approx(1.0 + zeta(2, 0.0)).epsilon(1e-14));
    CHECK(half_normal_cumulant<double>(3) == doctest::Approx(zeta(3, 0.0)).epsilon(1e-14));
    CHECK(half_normal_cumulant<double>(4) == doctest::Approx(zeta(4, 0.0)).epsilon(1e-14));
    CHECK_THROWS_AS((void)half_normal_cumulant<double>(5), DomainError);
}

TEST_CASE("half-normal moment recurrence cross-check") {
    // E V^m = (m-1) E V^{m-2}; cumulants from raw moments must match
    const double m1 = std::sqrt(2.0 / 3.1415926535897932385);
    const double m2 = 1.0;
    const double m3 = 2.0 * m1;
    const double m4 = 3.0 * m2;
    const double k3 = m3 - 3.0 * m2 * m1 + 2.0 * m1 * m1 * m1;
    const double k4 = m4 - 4.0 * m3 * m1 - 3.0 * m2 * m2 + 12.0 * m2 * m1 * m1 -
                      6.0 * m1 * m1 * m1 * m1;
    CHECK(half_normal_cumulant<double>(3) == doctest::Approx(k3).epsilon(1e-13));
    CHECK(half_normal_cumulant<double>(4) == doctest::Approx(k4).epsilon(1e-13));
}

TEST_CASE("chi-square cdf and quantile") {
    for (const auto& row : kChi2Oracle) {
        CHECK(chi2_cdf(row[0], row[1]) == doctest::Approx(row[2]).epsilon(1e-12));
        CHECK(chi2_quantile(row[2], row[1]) == doctest::Approx(row[0]).epsilon(1e-9));
    }
    CHECK(chi2_cdf(0.0, 3.0) == 0.0);
    CHECK(chi2_quantile(0.0, 3.0) == 0.0);
    CHECK_THROWS_AS((void)gamma_p(-1.0, 1.0), DomainError);
}

TEST_SUITE_END();
