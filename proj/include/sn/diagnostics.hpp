#ifndef SN_DIAGNOSTICS_HPP
#define SN_DIAGNOSTICS_HPP

// Goodness-of-fit diagnostics: the Healy-style probability plot of
// chi-square-transformed Mahalanobis distances and a bundled fit report.

#include <algorithm>
#include <vector>

#include "sn/fit_mv.hpp"
#include "sn/kernels.hpp"
#include "sn/transform.hpp"
#include "sn/types.hpp"

namespace sn {

template <typename Scalar>
struct HealyData {
    Vec<Scalar> sorted_probs;  // chi^2_k CDF of the ordered distances
    Vec<Scalar> nominal;       // 1/n, 2/n, ..., 1
    Scalar max_abs_dev = 0;    // sup deviation from the bisector
};

namespace detail {
template <typename Scalar>
HealyData<Scalar> healy_from_distances(Vec<Scalar> d, Scalar dof) {
    std::sort(d.data(), d.data() + d.size());
    HealyData<Scalar> out;
    const Eigen::Index n = d.size();
    out.sorted_probs.resize(n);
    out.nominal.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.sorted_probs(i) = chi2_cdf(d(i), dof);
        out.nominal(i) = Scalar(i + 1) / Scalar(n);
    }
    out.max_abs_dev = (out.sorted_probs - out.nominal).cwiseAbs().maxCoeff();
    return out;
}
}  // namespace detail

template <typename Scalar>
HealyData<Scalar> healy(const DpParams<Scalar>& dp, const Mat<Scalar>& y) {
    return detail::healy_from_distances(Vec<Scalar>(mahalanobis(dp, y)), Scalar(dp.dim()));
}

// The companion quantile-quantile variant: ordered distances against
// chi^2_k quantiles at (i - 1/2)/n.
template <typename Scalar>
struct ChiSquareQq {
    Vec<Scalar> quantiles;
    Vec<Scalar> sorted_d;
};

template <typename Scalar>
ChiSquareQq<Scalar> chi2_qq(const DpParams<Scalar>& dp, const Mat<Scalar>& y) {
    Vec<Scalar> d = mahalanobis(dp, y);
    std::sort(d.data(), d.data() + d.size());
    ChiSquareQq<Scalar> out;
    out.sorted_d = d;
    out.quantiles.resize(d.size());
    const Eigen::Index n = d.size();
    for (Eigen::Index i = 0; i < n; ++i)
        out.quantiles(i) =
            chi2_quantile((Scalar(i) + Scalar(0.5)) / Scalar(n), Scalar(dp.dim()));
    return out;
}

// Machine-readable bundle: loglikelihood, the normality LR statistic with
// its chi^2_k reference, the Healy deviation, and componentwise skewness.
template <typename Scalar>
struct FitReport {
    Scalar loglik = 0;
    Scalar lr_normality = 0;
    Eigen::Index lr_dof = 0;
    Scalar healy_max_dev = 0;
    Vec<Scalar> component_gamma1;
};

template <typename Scalar>
FitReport<Scalar> fit_report(const FitResultMv<Scalar>& fit, const MvRegressionData<Scalar>& data) {
    FitReport<Scalar> out;
    out.loglik = fit.loglik;
    out.lr_dof = data.k();
    const Mat<Scalar> beta_ols = data.X.colPivHouseholderQr().solve(data.y);
    const Scalar ll0 = profile_loglik(beta_ols, Vec<Scalar>::Zero(data.k()), data);
    out.lr_normality = std::max(Scalar(0), Scalar(2) * (fit.loglik - ll0));

    // distances from the fitted per-row locations
    const Mat<Scalar> u = data.y - data.X * fit.beta;
    Eigen::LLT<Mat<Scalar>> llt(fit.omega);
    Vec<Scalar> d(data.n());
    const Mat<Scalar> w = llt.solve(u.transpose());
    d = (u.transpose().array() * w.array()).colwise().sum().transpose();
    out.healy_max_dev = detail::healy_from_distances(d, Scalar(data.k())).max_abs_dev;

    // componentwise centred parameters at the mean design point
    const Vec<Scalar> xbar = data.X.colwise().mean().transpose();
    const Vec<Scalar> xi_bar = fit.beta.transpose() * xbar;
    const DpParams<Scalar> dp(xi_bar, fit.omega, fit.alpha);
    const auto comps = cp_convert_mv(dp);
    out.component_gamma1.resize(data.k());
    for (Eigen::Index j = 0; j < data.k(); ++j)
        out.component_gamma1(j) = comps[static_cast<std::size_t>(j)].gamma1;
    return out;
}

}  // namespace sn

#endif
