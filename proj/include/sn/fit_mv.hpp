#ifndef SN_FIT_MV_HPP
#define SN_FIT_MV_HPP

// Multivariate skew-normal regression through the profiled loglikelihood in
// the eta = omega^-1 alpha parametrization, plus the likelihood-ratio
// normality test and partial-correlation reporting.

#include <cmath>
#include <optional>
#include <vector>

#include "sn/fit_uv.hpp"
#include "sn/kernels.hpp"
#include "sn/optim.hpp"
#include "sn/param.hpp"
#include "sn/types.hpp"

namespace sn {

template <typename Scalar>
struct MvRegressionData {
    Mat<Scalar> y;  // n x k responses
    Mat<Scalar> X;  // n x p design

    MvRegressionData(Mat<Scalar> responses, Mat<Scalar> design)
        : y(std::move(responses)), X(std::move(design)) {
        if (X.rows() != y.rows()) throw DimensionError("MvRegressionData: row mismatch");
        if (y.cols() < 1 || X.cols() < 1) throw DimensionError("MvRegressionData: empty blocks");
        if (!(y.rows() > X.cols() + y.cols()))
            throw DimensionError("MvRegressionData: need n > p + k");
        Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(X);
        if (qr.rank() < X.cols()) throw RankError("MvRegressionData: X must have full column rank");
    }

    Eigen::Index n() const { return y.rows(); }
    Eigen::Index k() const { return y.cols(); }
    Eigen::Index p() const { return X.cols(); }
};

template <typename Scalar>
struct SensitivityPoint {
    Scalar drop;
    Mat<Scalar> beta;
    Vec<Scalar> alpha;
    Scalar loglik;
};

template <typename Scalar>
struct FitResultMv {
    Mat<Scalar> beta;   // p x k
    Mat<Scalar> omega;  // fitted Omega = V(beta)
    Vec<Scalar> alpha;
    Vec<Scalar> eta;
    Scalar loglik = 0;
    Mat<Scalar> se_beta;
    Vec<Scalar> se_eta;
    Vec<Scalar> se_alpha;
    Convergence convergence = Convergence::Converged;
    Scalar boundary_deficit = 0;
    std::vector<Scalar> trace;
    std::vector<SensitivityPoint<Scalar>> sensitivity;
};

struct FitOptionsMv {
    int max_iter = 1000;
    double eta_divergence = 1e3;       // |eta| beyond this flags a frontier run
    std::optional<double> drop;        // stopping deficit; default 2.0 * k
    std::vector<double> sensitivity_drops;  // optional extra stopping points
};

// l = -(nk/2) log 2pi - (n/2) log|Omega| - (n/2) tr(Omega^-1 V) + sum zeta0(alpha' omega^-1 (y_i - xi_i))
template <typename Scalar>
Scalar loglik_mv(const Mat<Scalar>& beta, const Mat<Scalar>& omega, const Vec<Scalar>& alpha,
                 const MvRegressionData<Scalar>& data) {
    const Eigen::Index n = data.n(), k = data.k();
    if (beta.rows() != data.p() || beta.cols() != k || omega.rows() != k || omega.cols() != k ||
        alpha.size() != k)
        throw DimensionError("loglik_mv: dimension mismatch");
    Eigen::LLT<Mat<Scalar>> llt(omega);
    if (llt.info() != Eigen::Success) throw SingularError("loglik_mv: Omega must be positive definite");
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    const Mat<Scalar> u = data.y - data.X * beta;
    const Mat<Scalar> v = u.transpose() * u / Scalar(n);
    const Scalar logdet = Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const Scalar tr = llt.solve(v).trace();
    const Vec<Scalar> eta =
        (alpha.array() / omega.diagonal().array().sqrt()).matrix();
    Scalar s = Scalar(-0.5) * Scalar(n * k) * std::log(Scalar(2) * pi) -
               Scalar(0.5) * Scalar(n) * logdet - Scalar(0.5) * Scalar(n) * tr;
    const Vec<Scalar> w = u * eta;
    for (Eigen::Index i = 0; i < n; ++i) s += zeta(0, w(i));
    return s;
}

// l*(beta, eta) = -(nk/2) log 2pi - (n/2) log|V(beta)| - nk/2 + 1' zeta0(u eta)
template <typename Scalar>
Scalar profile_loglik(const Mat<Scalar>& beta, const Vec<Scalar>& eta,
                      const MvRegressionData<Scalar>& data) {
    const Eigen::Index n = data.n(), k = data.k();
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    const Mat<Scalar> u = data.y - data.X * beta;
    const Mat<Scalar> v = u.transpose() * u / Scalar(n);
    Eigen::LLT<Mat<Scalar>> llt(v);
    if (llt.info() != Eigen::Success)
        throw SingularError("profile_loglik: V(beta) is singular");
    const Scalar logdet = Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    Scalar s = Scalar(-0.5) * Scalar(n * k) * std::log(Scalar(2) * pi) -
               Scalar(0.5) * Scalar(n) * logdet - Scalar(0.5) * Scalar(n * k);
    const Vec<Scalar> w = u * eta;
    for (Eigen::Index i = 0; i < n; ++i) s += zeta(0, w(i));
    return s;
}

// dl*/dbeta = X'u V^-1 - X' zeta1(u eta) eta',  dl*/deta = u' zeta1(u eta)
template <typename Scalar>
void profile_grad(const Mat<Scalar>& beta, const Vec<Scalar>& eta,
                  const MvRegressionData<Scalar>& data, Mat<Scalar>& g_beta, Vec<Scalar>& g_eta) {
    const Eigen::Index n = data.n();
    const Mat<Scalar> u = data.y - data.X * beta;
    const Mat<Scalar> v = u.transpose() * u / Scalar(n);
    Eigen::LLT<Mat<Scalar>> llt(v);
    if (llt.info() != Eigen::Success)
        throw SingularError("profile_grad: V(beta) is singular");
    const Vec<Scalar> w = u * eta;
    Vec<Scalar> z1(n);
    for (Eigen::Index i = 0; i < n; ++i) z1(i) = zeta(1, w(i));
    g_beta = data.X.transpose() * llt.solve(u.transpose()).transpose() -
             (data.X.transpose() * z1) * eta.transpose();
    g_eta = u.transpose() * z1;
}

namespace detail {

template <typename Scalar>
Vecd pack_mv(const Mat<Scalar>& beta, const Vec<Scalar>& eta) {
    Vecd u(beta.size() + eta.size());
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < beta.cols(); ++j)
        for (Eigen::Index i = 0; i < beta.rows(); ++i) u(c++) = double(beta(i, j));
    for (Eigen::Index j = 0; j < eta.size(); ++j) u(c++) = double(eta(j));
    return u;
}

template <typename Scalar>
void unpack_mv(const Vecd& u, Mat<Scalar>& beta, Vec<Scalar>& eta) {
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < beta.cols(); ++j)
        for (Eigen::Index i = 0; i < beta.rows(); ++i) beta(i, j) = Scalar(u(c++));
    for (Eigen::Index j = 0; j < eta.size(); ++j) eta(j) = Scalar(u(c++));
}

// moment-based starting shape: componentwise skewness of the OLS residuals
// mapped through the scalar chain, assembled into a joint delta
template <typename Scalar>
Vec<Scalar> eta_moment_start(const Mat<Scalar>& resid) {
    const Eigen::Index n = resid.rows(), k = resid.cols();
    const Mat<Scalar> v = resid.transpose() * resid / Scalar(n);
    const Vec<Scalar> sd = v.diagonal().cwiseSqrt();
    Mat<Scalar> vbar = (v.array() / (sd * sd.transpose()).array()).eval();
    vbar.diagonal().setOnes();
    Vec<Scalar> delta(k);
    const Scalar gcap = Scalar(0.9) * gamma1_max<Scalar>();
    for (Eigen::Index j = 0; j < k; ++j) {
        const Scalar m2 = resid.col(j).squaredNorm() / Scalar(n);
        const Scalar m3 = resid.col(j).array().pow(3).sum() / Scalar(n);
        Scalar g1 = m3 / (m2 * std::sqrt(m2));
        g1 = std::min(std::max(g1, -gcap), gcap);
        const Scalar lam = gamma1_to_lambda(g1);
        delta(j) = lam / std::sqrt(Scalar(1) + lam * lam);
    }
    Eigen::LLT<Mat<Scalar>> llt(vbar);
    Vec<Scalar> w = llt.solve(delta);
    Scalar q = delta.dot(w);
    if (q >= Scalar(1)) {  // pull the joint delta inside the feasible set
        delta *= Scalar(0.95) / std::sqrt(q);
        w = llt.solve(delta);
        q = delta.dot(w);
    }
    const Vec<Scalar> alpha = w / std::sqrt(std::max(Scalar(1) - q, Scalar(1e-10)));
    return (alpha.array() / sd.array()).matrix();
}

template <typename Scalar>
Scalar profile_beta_only(const MvRegressionData<Scalar>& data, const Vec<Scalar>& eta,
                         Mat<Scalar>& beta, int max_iter = 300) {
    auto obj = [&](const Vecd& u, Vecd& grad) -> double {
        Mat<Scalar> b(beta.rows(), beta.cols());
        Vec<Scalar> e = eta;
        Eigen::Index c = 0;
        for (Eigen::Index j = 0; j < b.cols(); ++j)
            for (Eigen::Index i = 0; i < b.rows(); ++i) b(i, j) = Scalar(u(c++));
        Mat<Scalar> gb;
        Vec<Scalar> ge;
        profile_grad(b, e, data, gb, ge);
        c = 0;
        for (Eigen::Index j = 0; j < gb.cols(); ++j)
            for (Eigen::Index i = 0; i < gb.rows(); ++i) grad(c++) = double(gb(i, j));
        return double(profile_loglik(b, e, data));
    };
    Vecd u0(beta.size());
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < beta.cols(); ++j)
        for (Eigen::Index i = 0; i < beta.rows(); ++i) u0(c++) = double(beta(i, j));
    auto r = bfgs_maximize(obj, u0, max_iter);
    c = 0;
    for (Eigen::Index j = 0; j < beta.cols(); ++j)
        for (Eigen::Index i = 0; i < beta.rows(); ++i) beta(i, j) = Scalar(r.x(c++));
    return Scalar(r.value);
}

}  // namespace detail

template <typename Scalar>
FitResultMv<Scalar> fit_mv(const MvRegressionData<Scalar>& data, const FitOptionsMv& options = {}) {
    const Eigen::Index k = data.k(), p = data.p();
    const Mat<Scalar> beta_ols = data.X.colPivHouseholderQr().solve(data.y);
    const Mat<Scalar> resid0 = data.y - data.X * beta_ols;
    const Vec<Scalar> eta0 = detail::eta_moment_start<Scalar>(resid0);

    auto objective = [&](const Vecd& u, Vecd& grad) -> double {
        Mat<Scalar> b(p, k);
        Vec<Scalar> e(k);
        detail::unpack_mv(u, b, e);
        Mat<Scalar> gb;
        Vec<Scalar> ge;
        double val;
        try {
            val = double(profile_loglik(b, e, data));
            profile_grad(b, e, data, gb, ge);
        } catch (const SingularError&) {
            grad.setZero();
            return -std::numeric_limits<double>::infinity();
        }
        grad = detail::pack_mv(gb, ge);
        return val;
    };

    std::vector<Vec<Scalar>> starts{eta0};
    if (eta0.norm() > Scalar(1e-3)) {
        starts.push_back(Vec<Scalar>(-eta0));
    } else {
        Vec<Scalar> bump = Vec<Scalar>::Constant(k, Scalar(0.25));
        starts.push_back(bump);
    }
    detail::OptimResult best;
    best.value = -std::numeric_limits<double>::infinity();
    for (const auto& e0 : starts) {
        auto r = detail::bfgs_maximize(objective, detail::pack_mv(beta_ols, e0), options.max_iter);
        if (r.value > best.value) best = std::move(r);
    }

    Mat<Scalar> beta(p, k);
    Vec<Scalar> eta(k);
    detail::unpack_mv(best.x, beta, eta);

    FitResultMv<Scalar> out;
    out.trace.assign(best.trace.begin(), best.trace.end());
    out.convergence = best.converged ? Convergence::Converged : Convergence::MaxIter;

    // frontier run: the shape escapes to infinity with a flattening profile
    const double drop = options.drop ? *options.drop : 2.0 * double(k);
    if (eta.norm() > Scalar(options.eta_divergence)) {
        out.convergence = Convergence::Boundary;
        const Scalar sup = profile_loglik(beta, eta, data);
        const Vec<Scalar> dir = eta;
        auto resolve_at = [&](double target_drop, Mat<Scalar>& b_out, Vec<Scalar>& e_out) {
            Scalar lo = 0, hi = 1;
            Mat<Scalar> b = beta;
            if (detail::profile_beta_only(data, Vec<Scalar>(Scalar(0) * dir), b) > sup - Scalar(target_drop)) {
                b_out = b;
                e_out = Vec<Scalar>::Zero(k);
                return;
            }
            for (int i = 0; i < 40; ++i) {
                const Scalar mid = (lo + hi) / Scalar(2);
                Mat<Scalar> bm = beta;
                const Scalar v = detail::profile_beta_only(data, Vec<Scalar>(mid * dir), bm);
                (v < sup - Scalar(target_drop) ? lo : hi) = mid;
            }
            e_out = hi * dir;
            b_out = beta;
            detail::profile_beta_only(data, e_out, b_out);
        };
        for (double d : options.sensitivity_drops) {
            SensitivityPoint<Scalar> sp;
            sp.drop = Scalar(d);
            Mat<Scalar> b;
            Vec<Scalar> e;
            resolve_at(d, b, e);
            sp.beta = b;
            const Mat<Scalar> u = data.y - data.X * b;
            const Mat<Scalar> v = u.transpose() * u / Scalar(data.n());
            sp.alpha = (v.diagonal().cwiseSqrt().array() * e.array()).matrix();
            sp.loglik = profile_loglik(b, e, data);
            out.sensitivity.push_back(std::move(sp));
        }
        Mat<Scalar> b;
        Vec<Scalar> e;
        resolve_at(drop, b, e);
        beta = b;
        eta = e;
        out.boundary_deficit = sup - profile_loglik(beta, eta, data);
    }

    const Mat<Scalar> u = data.y - data.X * beta;
    out.beta = beta;
    out.eta = eta;
    out.omega = u.transpose() * u / Scalar(data.n());
    const Vec<Scalar> om = out.omega.diagonal().cwiseSqrt();
    out.alpha = (om.array() * eta.array()).matrix();
    out.loglik = profile_loglik(beta, eta, data);

    // standard errors from the central-difference Hessian of the profile score
    auto grad_only = [&](const Vecd& uu, Vecd& g) {
        Mat<Scalar> b(p, k);
        Vec<Scalar> e(k);
        detail::unpack_mv(uu, b, e);
        Mat<Scalar> gb;
        Vec<Scalar> ge;
        profile_grad(b, e, data, gb, ge);
        g = detail::pack_mv(gb, ge);
    };
    const Matd H = detail::fd_hessian(grad_only, detail::pack_mv(beta, eta));
    out.se_beta = Mat<Scalar>::Constant(p, k, std::numeric_limits<Scalar>::quiet_NaN());
    out.se_eta = Vec<Scalar>::Constant(k, std::numeric_limits<Scalar>::quiet_NaN());
    out.se_alpha = Vec<Scalar>::Constant(k, std::numeric_limits<Scalar>::quiet_NaN());
    Eigen::FullPivLU<Matd> lu(Matd(-H));
    if (lu.isInvertible()) {
        const Matd cov = lu.inverse();
        Eigen::Index c = 0;
        for (Eigen::Index j = 0; j < k; ++j)
            for (Eigen::Index i = 0; i < p; ++i) {
                if (cov(c, c) > 0) out.se_beta(i, j) = Scalar(std::sqrt(cov(c, c)));
                ++c;
            }
        for (Eigen::Index j = 0; j < k; ++j) {
            if (cov(c, c) > 0) {
                out.se_eta(j) = Scalar(std::sqrt(cov(c, c)));
                out.se_alpha(j) = om(j) * out.se_eta(j);
            }
            ++c;
        }
    }
    return out;
}

// 2 { l(SN fit) - l(normal fit) }, referred to chi^2_k.
template <typename Scalar>
Scalar lr_normality_mv(const MvRegressionData<Scalar>& data) {
    const Mat<Scalar> beta_ols = data.X.colPivHouseholderQr().solve(data.y);
    const Scalar ll0 = profile_loglik(beta_ols, Vec<Scalar>::Zero(data.k()), data);
    const FitResultMv<Scalar> f = fit_mv(data);
    return std::max(Scalar(0), Scalar(2) * (f.loglik - ll0));
}

// Omega^-1 scaled to unit diagonal with off-diagonal signs flipped.
template <typename Scalar>
Mat<Scalar> partial_correlation_matrix(const Mat<Scalar>& omega) {
    Eigen::LLT<Mat<Scalar>> llt(omega);
    if (llt.info() != Eigen::Success)
        throw SingularError("partial_correlation_matrix: Omega must be positive definite");
    const Mat<Scalar> w = llt.solve(Mat<Scalar>::Identity(omega.rows(), omega.cols()));
    const Vec<Scalar> s = w.diagonal().cwiseSqrt();
    Mat<Scalar> out = (-w.array() / (s * s.transpose()).array()).eval();
    out.diagonal().setOnes();
    return ((out + out.transpose()) / Scalar(2)).eval();
}

// Pairs (i, j) that are conditionally independent given the rest: zero
// concentration entry and at most one non-zero shape component.
template <typename Scalar>
struct CondIndepPair {
    Eigen::Index i, j;
    bool concentration_zero;
    bool alpha_clause;
};

template <typename Scalar>
std::vector<CondIndepPair<Scalar>> conditional_independence_report(const FitResultMv<Scalar>& fit,
                                                                   Scalar zero_tol) {
    const Mat<Scalar> pcm = partial_correlation_matrix(fit.omega);
    std::vector<CondIndepPair<Scalar>> out;
    const Scalar ascale = std::max(Scalar(1), fit.alpha.template lpNorm<Eigen::Infinity>());
    for (Eigen::Index i = 0; i < pcm.rows(); ++i)
        for (Eigen::Index j = i + 1; j < pcm.cols(); ++j) {
            CondIndepPair<Scalar> e;
            e.i = i;
            e.j = j;
            e.concentration_zero = std::abs(pcm(i, j)) <= zero_tol;
            const bool ai = std::abs(fit.alpha(i)) > zero_tol * ascale;
            const bool aj = std::abs(fit.alpha(j)) > zero_tol * ascale;
            e.alpha_clause = !(ai && aj);
            out.push_back(e);
        }
    return out;
}

}  // namespace sn

#endif
