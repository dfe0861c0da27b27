#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "sn/diagnostics.hpp"
#include "sn/sample.hpp"

using namespace sn;
using namespace sn_test;

TEST_SUITE_BEGIN("diagnostics");

namespace {
DpParams<double> ref_dp() {
    Vecd xi = Vecd::Zero(2), a(2);
    a << 5, 5;
    Matd om(2, 2);
    om << 1, 0.4, 0.4, 1;
    return DpParams<double>(xi, om, a);
}
}  // namespace

TEST_CASE("healy plot under the true model") {
    auto dp = ref_dp();
    const Matd y = rvs_sn(dp, 10000, SeededStream{90, 0});
    const auto h = healy(dp, y);
    CHECK(h.max_abs_dev < 0.03);
    CHECK(h.sorted_probs.size() == 10000);
    CHECK(h.nominal(9999) == doctest::Approx(1.0));
    // sorted and within [0,1]
    for (Eigen::Index i = 1; i < h.sorted_probs.size(); ++i)
        CHECK(h.sorted_probs(i) >= h.sorted_probs(i - 1));
    CHECK(h.sorted_probs(0) >= 0.0);
    CHECK(h.sorted_probs(9999) <= 1.0);
}

TEST_CASE("single observation structure") {
    auto dp = ref_dp();
    Matd y(1, 2);
    y << 0.3, -0.2;
    const auto h = healy(dp, y);
    REQUIRE(h.nominal.size() == 1);
    CHECK(h.nominal(0) == 1.0);
    CHECK(h.sorted_probs(0) >= 0.0);
    CHECK(h.sorted_probs(0) <= 1.0);
}

TEST_CASE("a normal fit on skewed data shows a larger deviation") {
    auto dp = ref_dp();
    const Matd y = rvs_sn(dp, 2000, SeededStream{91, 0});
    const auto hsn = healy(dp, y);
    // moment-matched normal surrogate
    const auto mom = moments(dp);
    const DpParams<double> dpn(mom.mean, mom.variance, Vecd(Vecd::Zero(2)));
    const auto hn = healy(dpn, y);
    CHECK(hn.max_abs_dev > hsn.max_abs_dev);
}

TEST_CASE("probability transform is uniform under the model") {
    std::mt19937_64 rng(92);
    const Matd ob = random_correlation(3, rng);
    Vecd alpha(3);
    alpha << 2, -1, 3;
    const DpParams<double> dp(Vecd::Zero(3), ob, alpha);
    int ok = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const Matd y = rvs_sn(dp, 2000, SeededStream{93, std::uint64_t(rep)});
        const auto h = healy(dp, y);
        std::vector<double> probs(h.sorted_probs.data(),
                                  h.sorted_probs.data() + h.sorted_probs.size());
        const double ks = ks_statistic(probs, [](double u) {
            return std::min(1.0, std::max(0.0, u));
        });
        if (ks < ks_critical_1pct(2000)) ++ok;
    }
    CHECK(ok >= 95);
}

TEST_CASE("componentwise affine invariance") {
    auto dp = ref_dp();
    const Matd y = rvs_sn(dp, 500, SeededStream{94, 0});
    Vecd shift(2), scale(2);
    shift << 3.0, -1.0;
    scale << 2.0, 0.5;
    Matd yt(y.rows(), 2);
    for (int j = 0; j < 2; ++j) yt.col(j) = (scale(j) * y.col(j).array() + shift(j)).matrix();
    const Matd st = scale.asDiagonal() * dp.omega_cov() * scale.asDiagonal();
    const DpParams<double> dpt(Vecd(dp.xi() + shift), st, dp.alpha());
    const auto h1 = healy(dp, y);
    const auto h2 = healy(dpt, yt);
    CHECK((h1.sorted_probs - h2.sorted_probs).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(std::abs(h1.max_abs_dev - h2.max_abs_dev) < 1e-10);
}

TEST_CASE("quantile variant") {
    auto dp = ref_dp();
    const Matd y = rvs_sn(dp, 300, SeededStream{95, 0});
    const auto qq = chi2_qq(dp, y);
    for (Eigen::Index i = 1; i < qq.quantiles.size(); ++i) {
        CHECK(qq.quantiles(i) > qq.quantiles(i - 1));
        CHECK(qq.sorted_d(i) >= qq.sorted_d(i - 1));
    }
    // on-model data tracks the reference line loosely
    const double mid_q = qq.quantiles(150);
    const double mid_d = qq.sorted_d(150);
    CHECK(std::abs(mid_d - mid_q) < 1.0);
}

TEST_CASE("fit report bundles the diagnostics") {
    const Matd X = Matd::Ones(800, 1);
    {
        // normal data: small LR, small deviation
        const DpParams<double> dpn(Vecd::Zero(2),
                                   Matd((Matd(2, 2) << 1, 0.3, 0.3, 1).finished()),
                                   Vecd(Vecd::Zero(2)));
        const Matd y = rvs_sn(dpn, 800, SeededStream{96, 0});
        const MvRegressionData<double> data(y, X);
        const auto fit = fit_mv(data);
        const auto rep = fit_report(fit, data);
        CHECK(rep.lr_normality < chi2_quantile(0.999, 2.0));
        CHECK(rep.healy_max_dev < 0.06);
        CHECK(rep.lr_dof == 2);
        CHECK(rep.component_gamma1.size() == 2);
    }
    {
        // strongly skewed data: large LR
        auto dp = ref_dp();
        const Matd y = rvs_sn(dp, 800, SeededStream{97, 0});
        const MvRegressionData<double> data(y, X);
        const auto fit = fit_mv(data);
        const auto rep = fit_report(fit, data);
        CHECK(rep.lr_normality > chi2_quantile(0.999, 2.0));
        CHECK(rep.loglik == doctest::Approx(fit.loglik));
    }
}

TEST_SUITE_END();
