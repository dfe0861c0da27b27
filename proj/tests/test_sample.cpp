#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "sn/dist.hpp"
#include "sn/sample.hpp"

using namespace sn;
using namespace sn_test;

TEST_SUITE_BEGIN("sample");

namespace {
DpParams<double> ref_dp() {
    Vecd xi = Vecd::Zero(2), a(2);
    a << 3, 3;
    Matd om(2, 2);
    om << 1, 0.4, 0.4, 1;
    return DpParams<double>(xi, om, a);
}

// sample Mardia skewness after whitening; O(n) through the 8 third moments
double sample_mardia_gamma1_2d(const Matd& z) {
    const Vecd mean = z.colwise().mean().transpose();
    Matd c = Matd::Zero(2, 2);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const Vecd u = z.row(i).transpose() - mean;
        c += u * u.transpose();
    }
    c /= double(z.rows());
    const Matd w = Eigen::LLT<Matd>(c).matrixL().solve(Matd::Identity(2, 2));
    double m[2][2][2] = {};
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const Vecd u = w * (z.row(i).transpose() - mean);
        for (int r = 0; r < 2; ++r)
            for (int s = 0; s < 2; ++s)
                for (int t = 0; t < 2; ++t) m[r][s][t] += u(r) * u(s) * u(t);
    }
    double b1 = 0.0;
    for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s)
            for (int t = 0; t < 2; ++t) {
                const double v = m[r][s][t] / double(z.rows());
                b1 += v * v;
            }
    return b1;
}
}  // namespace

TEST_CASE("determinism of seeded streams") {
    auto dp = ref_dp();
    const Matd a = rvs_sn(dp, 500, SeededStream{123, 4});
    const Matd b = rvs_sn(dp, 500, SeededStream{123, 4});
    CHECK((a - b).norm() == 0.0);
    const Matd c = rvs_sn(dp, 500, SeededStream{123, 5});
    CHECK((a - c).norm() != 0.0);
}

TEST_CASE("chunk plan is canonical and worker-independent") {
    auto dp = ref_dp();
    const Matd serial = rvs_sn_chunked(dp, 1003, 77, 4, 1);
    const Matd parallel = rvs_sn_chunked(dp, 1003, 77, 4, 8);
    CHECK((serial - parallel).norm() == 0.0);

    // explicit concatenation of the per-stream outputs
    Eigen::Index off = 0;
    for (std::uint64_t i = 0; i < 4; ++i) {
        const Eigen::Index cnt = 1003 / 4 + (i < 3 ? 1 : 0);
        const Matd part = rvs_sn(dp, cnt, SeededStream{77, i});
        CHECK((serial.middleRows(off, cnt) - part).norm() == 0.0);
        off += cnt;
    }
    CHECK(off == 1003);
}

TEST_CASE("zero shape passes a multivariate normality sanity check") {
    Vecd xi = Vecd::Zero(2);
    Matd om(2, 2);
    om << 1, 0.4, 0.4, 1;
    const DpParams<double> dp(xi, om, Vecd(Vecd::Zero(2)));
    const Matd z = rvs_sn(dp, 100000, SeededStream{2, 0});
    CHECK(std::abs(sample_mardia_gamma1_2d(z)) < 0.05);
}

TEST_CASE("scalar moments of the sampler") {
    Vecd xi(1), a(1);
    xi << 0;
    a << 5;
    Matd om(1, 1);
    om << 1;
    const DpParams<double> dp(xi, om, a);
    const Matd z = rvs_sn(dp, 100000, SeededStream{3, 0});
    const double se = std::sqrt(0.38786560349271025 / 100000.0);
    CHECK(std::abs(z.col(0).mean() - 0.78239018175542678) < 3.0 * se);
}

TEST_CASE("sampler moment check across random parameter sets") {
    std::mt19937_64 rng(19);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::Index k = 1 + rep % 4;
        const Matd ob = random_correlation(k, rng);
        const Vecd alpha = random_vector(k, rng);
        const Vecd xi = random_vector(k, rng, 1.0);
        Vecd sd = random_vector(k, rng, 0.4).cwiseAbs();
        sd.array() += 0.6;
        const Matd om = sd.asDiagonal() * ob * sd.asDiagonal();
        const DpParams<double> dp(xi, om, alpha);
        const auto mom = moments(dp);
        const Eigen::Index n = 50000;
        const Matd z = rvs_sn(dp, n, SeededStream{400 + std::uint64_t(rep), 0});
        for (Eigen::Index j = 0; j < k; ++j) {
            const double se = std::sqrt(mom.variance(j, j) / double(n));
            CHECK(std::abs(z.col(j).mean() - mom.mean(j)) < 4.0 * se);
            for (Eigen::Index l = j; l < k; ++l) {
                const double cjl = ((z.col(j).array() - z.col(j).mean()) *
                                    (z.col(l).array() - z.col(l).mean()))
                                       .mean();
                const double se_c = std::sqrt((mom.variance(j, j) * mom.variance(l, l) +
                                               mom.variance(j, l) * mom.variance(j, l)) /
                                              double(n));
                CHECK(std::abs(cjl - mom.variance(j, l)) < 4.0 * se_c);
            }
        }
    }
}

TEST_CASE("skewing construction specializes to the exact sampler") {
    Matd ob(3, 3);
    ob << 1, 0.3, 0.1, 0.3, 1, -0.2, 0.1, -0.2, 1;
    Vecd alpha(3);
    alpha << 2, -1, 1.5;
    const DpParams<double> dp(Vecd::Zero(3), ob, alpha);
    const SkewSpec<double> spec(SkewSpec<double>::Base::Normal, ob, alpha);
    const Matd a = rvs_skew_elliptical(spec, 100000, SeededStream{6, 0});
    const Matd b = rvs_sn(dp, 100000, SeededStream{6, 1});
    for (int j = 0; j < 3; ++j) {
        std::vector<double> xa(a.col(j).data(), a.col(j).data() + a.rows());
        std::vector<double> xb(b.col(j).data(), b.col(j).data() + b.rows());
        CHECK(ks_two_sample(xa, xb) < ks_two_sample_critical_1pct(xa.size(), xb.size()));
    }
}

TEST_CASE("zero direction reproduces the base law") {
    Matd sc(2, 2);
    sc << 2.0, 0.5, 0.5, 1.0;
    const SkewSpec<double> spec(SkewSpec<double>::Base::Normal, sc, Vecd(Vecd::Zero(2)));
    const Matd z = rvs_skew_elliptical(spec, 100000, SeededStream{8, 0});
    for (int j = 0; j < 2; ++j) {
        const double s = std::sqrt(sc(j, j));
        std::vector<double> x(z.col(j).data(), z.col(j).data() + z.rows());
        const double ks = ks_statistic(x, [&](double t) { return norm_cdf(t / s); });
        CHECK(ks < ks_critical_1pct(x.size()));
    }
}

TEST_CASE("t-base density ratio") {
    Matd sc(2, 2);
    sc << 1, 0.2, 0.2, 1;
    Vecd a(2);
    a << 2, 0;
    const SkewSpec<double> spec(SkewSpec<double>::Base::StudentT, sc, a, 5.0);
    const Eigen::Index n = 100000;
    const Matd z = rvs_skew_elliptical(spec, n, SeededStream{9, 0});

    // binned 2-D histogram against the closed-form density
    const int cells = 10;
    const double lo = -3.0, hi = 3.0, w = (hi - lo) / cells;
    Matd counts = Matd::Zero(cells, cells);
    Eigen::Index outside = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int cx = int(std::floor((z(i, 0) - lo) / w));
        const int cy = int(std::floor((z(i, 1) - lo) / w));
        if (cx < 0 || cx >= cells || cy < 0 || cy >= cells) {
            ++outside;
            continue;
        }
        counts(cx, cy) += 1.0;
    }
    double chi2 = 0.0;
    double mass_in = 0.0;
    int dof = 0;
    for (int cx = 0; cx < cells; ++cx)
        for (int cy = 0; cy < cells; ++cy) {
            const double mass = integrate_2d(
                [&](double u, double v) {
                    Vecd y(2);
                    y << u, v;
                    return pdf_skew_elliptical(spec, y);
                },
                lo + cx * w, lo + (cx + 1) * w, lo + cy * w, lo + (cy + 1) * w, 6);
            mass_in += mass;
            const double expect = mass * double(n);
            if (expect < 5.0) continue;  // sparse corners folded into the tail cell
            chi2 += (counts(cx, cy) - expect) * (counts(cx, cy) - expect) / expect;
            ++dof;
        }
    const double expect_out = (1.0 - mass_in) * double(n);
    chi2 += (double(outside) - expect_out) * (double(outside) - expect_out) / expect_out;
    CHECK(chi2 < chi2_quantile(0.99, double(dof)));
}

TEST_CASE("spec validation") {
    Matd notpd(2, 2);
    notpd << 1, 2, 2, 1;
    CHECK_THROWS_AS(SkewSpec<double>(SkewSpec<double>::Base::Normal, notpd, Vecd(Vecd::Zero(2))),
                    DomainError);
    Matd ok = Matd::Identity(2, 2);
    CHECK_THROWS_AS(SkewSpec<double>(SkewSpec<double>::Base::StudentT, ok, Vecd(Vecd::Zero(2))),
                    DomainError);  // missing dof
    CHECK_THROWS_AS(rvs_sn(ref_dp(), 0, SeededStream{1, 0}), DomainError);
}

TEST_SUITE_END();
