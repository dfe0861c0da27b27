#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "sn/dist.hpp"
#include "sn/sample.hpp"
#include "sn/transform.hpp"

using namespace sn;
using namespace sn_test;

TEST_SUITE_BEGIN("dist");

namespace {
DpParams<double> make_dp(std::initializer_list<double> xi_, std::initializer_list<double> om_,
                         std::initializer_list<double> a_) {
    const auto k = static_cast<Eigen::Index>(xi_.size());
    Vecd xi(k), a(k);
    Matd om(k, k);
    Eigen::Index i = 0;
    for (double v : xi_) xi(i++) = v;
    i = 0;
    for (double v : a_) a(i++) = v;
    i = 0;
    for (double v : om_) om(i / k, i % k) = v, ++i;
    return DpParams<double>(xi, om, a);
}

// independent bivariate evaluation with the explicit 2x2 inverse
double logpdf_reference_2d(const Vecd& xi, const Matd& om, const Vecd& a, const Vecd& y) {
    const double det = om(0, 0) * om(1, 1) - om(0, 1) * om(1, 0);
    const Vecd u = y - xi;
    const double quad =
        (om(1, 1) * u(0) * u(0) - 2.0 * om(0, 1) * u(0) * u(1) + om(0, 0) * u(1) * u(1)) / det;
    const double logphi = -std::log(2.0 * 3.14159265358979323846) - 0.5 * std::log(det) -
                          0.5 * quad;
    const double w = a(0) * u(0) / std::sqrt(om(0, 0)) + a(1) * u(1) / std::sqrt(om(1, 1));
    return std::log(2.0) + logphi + std::log(0.5 * std::erfc(-w / std::sqrt(2.0)));
}
}  // namespace

TEST_CASE("logpdf basics") {
    // alpha = 0: exactly the normal density
    auto dp0 = make_dp({0.3, -0.2}, {2.0, 0.5, 0.5, 1.0}, {0.0, 0.0});
    Vecd y(2);
    y << 0.9, 0.1;
    const double det = 2.0 * 1.0 - 0.25;
    const Vecd u = y - dp0.xi();
    const double quad = (1.0 * u(0) * u(0) - 2.0 * 0.5 * u(0) * u(1) + 2.0 * u(1) * u(1)) / det;
    const double lognorm =
        -std::log(2.0 * 3.14159265358979323846) - 0.5 * std::log(det) - 0.5 * quad;
    CHECK(logpdf(dp0, y) == doctest::Approx(lognorm).epsilon(1e-13));

    // k = 1, y at the location: Phi(0) cancels the 2 for every alpha
    for (double a : {0.0, 1.0, 5.0, -11.0}) {
        auto dp = make_dp({0.0}, {1.0}, {a});
        Vecd y0(1);
        y0 << 0.0;
        CHECK(pdf(dp, y0) == doctest::Approx(0.39894228040143268).epsilon(1e-13));
    }

    // dual-path evaluation on the reference bivariate case
    auto dp = make_dp({0.0, 0.0}, {1.0, 0.4, 0.4, 1.0}, {3.0, 3.0});
    Vecd probe(2);
    probe << 0.5, -0.2;
    CHECK(logpdf(dp, probe) ==
          doctest::Approx(logpdf_reference_2d(dp.xi(), dp.omega_cov(), dp.alpha(), probe))
              .epsilon(1e-12));

    Vecd wrong(3);
    wrong.setZero();
    CHECK_THROWS_AS((void)logpdf(dp, wrong), DimensionError);
}

TEST_CASE("density normalizes to one") {
    {
        auto dp = make_dp({0.5}, {1.44}, {4.0});
        const double total = integrate_1d(
            [&](double t) {
                Vecd y(1);
                y << t;
                return pdf(dp, y);
            },
            0.5 - 12.0 * 1.2, 0.5 + 12.0 * 1.2, 256);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-7));
    }
    {
        auto dp = make_dp({0.0, 1.0}, {1.0, 0.4, 0.4, 1.0}, {3.0, 3.0});
        const double total = integrate_2d(
            [&](double u, double v) {
                Vecd y(2);
                y << u, v;
                return pdf(dp, y);
            },
            -10.0, 10.0, 1.0 - 10.0, 1.0 + 10.0, 40);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("cumulant generating function") {
    auto dp = make_dp({0.0}, {1.0}, {5.0});
    Vecd t0(1);
    t0 << 0.0;
    CHECK(cgf(dp, t0) == 0.0);

    Vecd t1(1);
    t1 << 1.0;
    CHECK(cgf(dp, t1) == doctest::Approx(1.0147382189716212).epsilon(1e-12));

    // gradient and curvature at zero match the exact moments
    auto dp2 = make_dp({0.4, -0.3}, {2.0, 0.6, 0.6, 1.0}, {2.0, -1.0});
    const auto mom = moments(dp2);
    const double h = 1e-5;
    for (int j = 0; j < 2; ++j) {
        Vecd tp = Vecd::Zero(2), tm = Vecd::Zero(2);
        tp(j) += h;
        tm(j) -= h;
        const double fd = (cgf(dp2, tp) - cgf(dp2, tm)) / (2.0 * h);
        CHECK(fd == doctest::Approx(mom.mean(j)).epsilon(1e-6));
        for (int l = 0; l < 2; ++l) {
            Vecd tpp = Vecd::Zero(2), tpm = Vecd::Zero(2), tmp = Vecd::Zero(2),
                 tmm = Vecd::Zero(2);
            tpp(j) += h;
            tpp(l) += h;
            tpm(j) += h;
            tpm(l) -= h;
            tmp(j) -= h;
            tmp(l) += h;
            tmm(j) -= h;
            tmm(l) -= h;
            const double fd2 =
                (cgf(dp2, tpp) - cgf(dp2, tpm) - cgf(dp2, tmp) + cgf(dp2, tmm)) / (4.0 * h * h);
            CHECK(std::abs(fd2 - mom.variance(j, l)) <= 2e-5);
        }
    }
}

TEST_CASE("moments and Mardia indices") {
    auto dp0 = make_dp({1.0, 2.0}, {1.0, 0.4, 0.4, 1.0}, {0.0, 0.0});
    const auto m0 = moments(dp0);
    CHECK((m0.mean - dp0.xi()).norm() == 0.0);
    CHECK((m0.variance - dp0.omega_cov()).norm() == 0.0);
    CHECK(m0.mardia_gamma1 == 0.0);
    CHECK(m0.mardia_gamma2 == 0.0);

    auto dp = make_dp({0.0}, {1.0}, {5.0});
    const auto m = moments(dp);
    CHECK(m.mean(0) == doctest::Approx(0.78239018175542678).epsilon(1e-12));
    CHECK(m.variance(0, 0) == doctest::Approx(0.38786560349271025).epsilon(1e-12));
    CHECK(m.mardia_gamma1 == doctest::Approx(0.724141452722709).epsilon(1e-12));
    CHECK(m.mardia_gamma2 == doctest::Approx(0.70534525503313832).epsilon(1e-12));

    // Monte Carlo cross-check of mean/variance/skewness
    const Matd draws = rvs_sn(dp, 10000000, SeededStream{20240517, 0});
    CHECK(draws.col(0).mean() == doctest::Approx(m.mean(0)).epsilon(2e-3));
    const double sv = (draws.col(0).array() - draws.col(0).mean()).square().mean();
    CHECK(sv == doctest::Approx(m.variance(0, 0)).epsilon(5e-3));
    CHECK(sample_skewness(draws.col(0)) ==
          doctest::Approx(std::sqrt(m.mardia_gamma1)).epsilon(1e-2));

    // supremum as the shape grows without bound
    Vecd big(1);
    big << 1e4;  // alpha*^2 = 1e8
    auto dpb = make_dp({0.0}, {1.0}, {1e4});
    const auto mb = moments(dpb);
    CHECK(std::abs(mb.mardia_gamma1 - 0.99057) < 1e-3);
    CHECK(std::abs(mb.mardia_gamma2 - 0.86918) < 1e-3);
    CHECK(mb.mardia_gamma1 < 0.99056584924412337 + 1e-12);
    CHECK(mb.mardia_gamma2 < 0.86917730360597412 + 1e-12);
}

TEST_CASE("indices depend on the shape only through alpha-star") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Index k = 2 + rep % 4;
        const Matd ob1 = random_correlation(k, rng);
        const Matd ob2 = random_correlation(k, rng);
        Vecd v1 = random_vector(k, rng), v2 = random_vector(k, rng);
        const double target = 1.5 + rep * 0.05;
        v1 *= target / std::sqrt(v1.dot(ob1 * v1));
        v2 *= target / std::sqrt(v2.dot(ob2 * v2));
        const DpParams<double> d1(Vecd::Zero(k), ob1, v1);
        const DpParams<double> d2(Vecd::Zero(k), ob2, v2);
        CHECK(alpha_star(d1) == doctest::Approx(target).epsilon(1e-12));
        const auto mm1 = moments(d1), mm2 = moments(d2);
        CHECK(mm1.mardia_gamma1 == doctest::Approx(mm2.mardia_gamma1).epsilon(1e-10));
        CHECK(mm1.mardia_gamma2 == doctest::Approx(mm2.mardia_gamma2).epsilon(1e-10));
        CHECK(mm1.mardia_gamma1 >= 0.0);
        CHECK(mm1.mardia_gamma1 < 0.9906);
        CHECK(mm1.mardia_gamma2 > -0.1);
        CHECK(mm1.mardia_gamma2 < 0.87);
    }
}

TEST_CASE("alpha-star") {
    auto dp0 = make_dp({0.0, 0.0}, {1.0, 0.0, 0.0, 1.0}, {0.0, 0.0});
    CHECK(alpha_star(dp0) == 0.0);
    auto dp = make_dp({0.0, 0.0}, {1.0, 0.0, 0.0, 1.0}, {3.0, 4.0});
    CHECK(alpha_star(dp) == doctest::Approx(5.0).epsilon(1e-14));

    // invariant under the canonical transform
    std::mt19937_64 rng(17);
    const Matd ob = random_correlation(3, rng);
    const Vecd a = random_vector(3, rng);
    const DpShape<double> shape(ob, a);
    const auto can = canonical(shape);
    const DpShape<double> idshape(Matd::Identity(3, 3), can.alpha_star);
    CHECK(alpha_star(idshape) == doctest::Approx(alpha_star(shape)).epsilon(1e-12));
}

TEST_CASE("rank-one cumulant arrays") {
    auto dp0 = make_dp({0.0, 0.0}, {1.0, 0.4, 0.4, 1.0}, {0.0, 0.0});
    const auto c3z = cumulant_array(dp0, 3);
    CHECK(c3z.factor.norm() == 0.0);

    // scalar third cumulant vs Monte Carlo third central moment
    auto dp = make_dp({0.0}, {2.25}, {4.0});
    const auto c3 = cumulant_array(dp, 3);
    const double k3 = c3(0, 0, 0);
    const Matd draws = rvs_sn(dp, 4000000, SeededStream{99, 0});
    const double m = draws.col(0).mean();
    const double mc3 = (draws.col(0).array() - m).cube().mean();
    CHECK(mc3 == doctest::Approx(k3).epsilon(2e-2));

    // contraction reproduces the skewness index
    auto dpm = make_dp({0.5, -1.0}, {4.0, 1.0, 1.0, 1.0}, {2.0, -3.0});
    const auto mom = moments(dpm);
    const auto arr = cumulant_array(dpm, 3);
    const Matd sinv = mom.variance.inverse();
    const double q = arr.factor.dot(sinv * arr.factor);
    CHECK(arr.coeff * arr.coeff * q * q * q ==
          doctest::Approx(mom.mardia_gamma1).epsilon(1e-10));

    CHECK_THROWS_AS((void)cumulant_array(dpm, 2), DomainError);
    const auto c4 = cumulant_array(dpm, 4);
    CHECK(c4(0, 1, 0, 1) == doctest::Approx(c4.coeff * c4.factor(0) * c4.factor(0) *
                                            c4.factor(1) * c4.factor(1)));
}

TEST_CASE("univariate cdf by quadrature") {
    auto dp = make_dp({0.0}, {1.0}, {5.0});
    CHECK(cdf_uv(dp, 0.0) == doctest::Approx(0.062832958189001184).epsilon(1e-7));
    CHECK(cdf_uv(dp, 40.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cdf_uv(dp, -20.0) == doctest::Approx(0.0));
    auto dpn = make_dp({1.5}, {4.0}, {0.0});
    CHECK(cdf_uv(dpn, 1.5) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_SUITE_END();
