#ifndef SN_FIT_UV_HPP
#define SN_FIT_UV_HPP

// Univariate skew-normal likelihood inference: direct- and centred-parameter
// loglikelihoods with analytic derivatives, method-of-moments start, EM,
// the staged MLE scheme, boundary handling, observed-information errors.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "sn/dist.hpp"
#include "sn/kernels.hpp"
#include "sn/optim.hpp"
#include "sn/param.hpp"
#include "sn/types.hpp"

namespace sn {

template <typename Scalar>
struct RegressionData {
    Vec<Scalar> y;
    Mat<Scalar> X;

    explicit RegressionData(Vec<Scalar> response)
        : y(std::move(response)), X(Mat<Scalar>::Ones(y.size(), 1)) {
        check();
    }
    RegressionData(Vec<Scalar> response, Mat<Scalar> design)
        : y(std::move(response)), X(std::move(design)) {
        check();
    }

    Eigen::Index n() const { return y.size(); }
    Eigen::Index p() const { return X.cols(); }

    // first all-ones column, -1 if none
    Eigen::Index intercept_col() const {
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            if ((X.col(j).array() == Scalar(1)).all()) return j;
        return -1;
    }

  private:
    void check() const {
        if (X.rows() != y.size()) throw DimensionError("RegressionData: row mismatch");
        if (!(y.size() > X.cols()) || X.cols() < 1)
            throw DimensionError("RegressionData: need n > p >= 1");
        Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(X);
        if (qr.rank() < X.cols()) throw RankError("RegressionData: X must have full column rank");
    }
};

enum class Convergence { Converged, Boundary, MaxIter };

template <typename Scalar>
struct FitResultUv {
    Vec<Scalar> beta_cp;  // location coefficients, centred chart
    Scalar sigma = 1;
    Scalar gamma1 = 0;
    Vec<Scalar> beta_dp;  // intercept-adjusted coefficients, direct chart
    Scalar omega = 1;
    Scalar alpha = 0;
    bool intercept_adjusted = false;
    Scalar loglik = 0;
    Vec<Scalar> se_cp;  // for (beta, sigma, gamma1)
    Convergence convergence = Convergence::Converged;
    std::vector<Scalar> trace;
    Scalar boundary_deficit = 0;
    std::optional<std::pair<Scalar, Scalar>> fixed_location_scale;
};

struct FitOptionsUv {
    int em_steps = 10;        // stage (ii) refinement
    int max_iter = 500;       // quasi-Newton budget
    int em_fallback_iter = 5000;
    std::optional<std::pair<double, double>> fixed_location_scale;  // (xi, omega)
};

// ----- direct parametrization -----

// l(DP) = -(n/2) log 2pi - n log omega - z'z/2 + sum zeta0(alpha z_i)
template <typename Scalar>
Scalar loglik_dp(const Vec<Scalar>& beta, Scalar omega, Scalar alpha,
                 const RegressionData<Scalar>& data) {
    if (!(omega > Scalar(0))) throw DomainError("loglik_dp: omega must be positive");
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    const Vec<Scalar> z = (data.y - data.X * beta) / omega;
    Scalar s = Scalar(-0.5) * Scalar(data.n()) * std::log(Scalar(2) * pi) -
               Scalar(data.n()) * std::log(omega) - Scalar(0.5) * z.squaredNorm();
    for (Eigen::Index i = 0; i < z.size(); ++i) s += zeta(0, alpha * z(i));
    return s;
}

// likelihood equations: X'(z - alpha p1)/omega, (z'z - alpha p1'z - n)/omega, p1'z
template <typename Scalar>
Vec<Scalar> score_dp(const Vec<Scalar>& beta, Scalar omega, Scalar alpha,
                     const RegressionData<Scalar>& data) {
    const Vec<Scalar> z = (data.y - data.X * beta) / omega;
    Vec<Scalar> p1(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) p1(i) = zeta(1, alpha * z(i));
    Vec<Scalar> g(data.p() + 2);
    g.head(data.p()) = data.X.transpose() * (z - alpha * p1) / omega;
    g(data.p()) = (z.squaredNorm() - alpha * p1.dot(z) - Scalar(data.n())) / omega;
    g(data.p() + 1) = p1.dot(z);
    return g;
}

// ----- centred parametrization -----

namespace detail {

template <typename Scalar>
struct CpChain {
    Scalar R, T, lambda, delta, muz, sz;
    Scalar muz_p, sz_p, muz_pp, sz_pp;  // d/dlambda and d2/dlambda2
    Scalar dlam, d2lam;                 // dlambda/dgamma1 and second derivative
};

template <typename Scalar>
CpChain<Scalar> cp_chain(Scalar gamma1) {
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    CpChain<Scalar> c;
    c.R = std::cbrt(Scalar(2) * gamma1 / (Scalar(4) - pi));
    const Scalar T2 = Scalar(2) / pi - (Scalar(1) - Scalar(2) / pi) * c.R * c.R;
    c.T = std::sqrt(std::max(T2, Scalar(1e-300)));
    c.lambda = c.R / c.T;
    c.delta = c.lambda / std::sqrt(Scalar(1) + c.lambda * c.lambda);
    c.muz = sqrt_2_over_pi<Scalar>() * c.delta;
    c.sz = std::sqrt(Scalar(1) - c.muz * c.muz);
    const Scalar opl2 = Scalar(1) + c.lambda * c.lambda;
    c.muz_p = sqrt_2_over_pi<Scalar>() / (opl2 * std::sqrt(opl2));
    c.sz_p = -c.muz * c.muz_p / c.sz;
    c.muz_pp = Scalar(-3) * c.muz / (opl2 * opl2);
    c.sz_pp = -((c.muz_p * (c.muz_p * c.sz - c.muz * c.sz_p)) / (c.sz * c.sz) +
                c.muz * c.muz_pp / c.sz);
    const Scalar i2p = Scalar(1) - Scalar(2) / pi;
    c.dlam = Scalar(2) / (Scalar(3) * (Scalar(4) - pi)) *
             (Scalar(1) / (c.T * c.R * c.R) + i2p / (c.T * c.T * c.T));
    const Scalar Rp = Scalar(2) / (Scalar(3) * c.R * c.R * (Scalar(4) - pi));
    const Scalar Tp = -i2p * c.R * Rp / c.T;
    c.d2lam = Scalar(-2) / (Scalar(3) * (Scalar(4) - pi)) *
              (Tp / (c.T * c.R * c.T * c.R) + Scalar(2) * Rp / (c.T * c.R * c.R * c.R) +
               Scalar(3) * i2p * Tp / (c.T * c.T * c.T * c.T));
    return c;
}

}  // namespace detail

// l(CP) = -(n/2) log 2pi + n log(sz/sigma) - z'z/2 + sum zeta0(lambda z_i),
// z_i = muz + sz (y_i - x_i'beta)/sigma.
template <typename Scalar>
Scalar loglik_cp(const Vec<Scalar>& beta, Scalar sigma, Scalar gamma1,
                 const RegressionData<Scalar>& data) {
    if (!(sigma > Scalar(0))) throw DomainError("loglik_cp: sigma must be positive");
    if (!(std::abs(gamma1) < gamma1_max<Scalar>())) throw DomainError("loglik_cp: gamma1 out of range");
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    const auto c = detail::cp_chain(gamma1);
    const Vec<Scalar> r = (data.y - data.X * beta) / sigma;
    Scalar s = Scalar(-0.5) * Scalar(data.n()) * std::log(Scalar(2) * pi) +
               Scalar(data.n()) * std::log(c.sz / sigma);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const Scalar z = c.muz + c.sz * r(i);
        s += Scalar(-0.5) * z * z + zeta(0, c.lambda * z);
    }
    return s;
}

// Analytic gradient in (beta, sigma, gamma1).  At gamma1 = 0 the chain rule
// degenerates to 0 * inf; the analytic limit is the skewness score
// sum r_i (r_i^2 - 3) / 6.
template <typename Scalar>
Vec<Scalar> grad_cp(const Vec<Scalar>& beta, Scalar sigma, Scalar gamma1,
                    const RegressionData<Scalar>& data) {
    if (!(sigma > Scalar(0))) throw DomainError("grad_cp: sigma must be positive");
    if (!(std::abs(gamma1) < gamma1_max<Scalar>())) throw DomainError("grad_cp: gamma1 out of range");
    const Eigen::Index n = data.n(), p = data.p();
    const Vec<Scalar> r = (data.y - data.X * beta) / sigma;
    Vec<Scalar> g(p + 2);
    if (std::abs(gamma1) < Scalar(1e-24)) {
        // limits at the symmetric point
        g.head(p) = data.X.transpose() * r / sigma;
        g(p) = (r.squaredNorm() - Scalar(n)) / sigma;
        g(p + 1) = (r.array().pow(3).sum() - Scalar(3) * r.sum()) / Scalar(6);
        return g;
    }
    const auto c = detail::cp_chain(gamma1);
    const Vec<Scalar> z = (c.muz + c.sz * r.array()).matrix();
    Vec<Scalar> p1(n);
    for (Eigen::Index i = 0; i < n; ++i) p1(i) = zeta(1, c.lambda * z(i));
    const Vec<Scalar> zp = (c.muz_p + c.sz_p * r.array()).matrix();
    const Scalar s2 = c.sz / sigma;
    g.head(p) = s2 * s2 *
                (data.X.transpose() *
                 (data.y - data.X * beta -
                  (sigma / c.sz) * (c.lambda * p1.array() - c.muz).matrix()));
    g(p) = -Scalar(n) / sigma +
           c.sz * (data.y - data.X * beta).dot(z - c.lambda * p1) / (sigma * sigma);
    const Scalar dl_dlam =
        Scalar(n) * c.sz_p / c.sz - z.dot(zp) + p1.dot(z + c.lambda * zp);
    g(p + 1) = dl_dlam * c.dlam;
    return g;
}

// Analytic Hessian in (beta, sigma, gamma1); the lambda row/column is
// rescaled by dlambda/dgamma1 and the corner picks up the second-derivative
// term of the chain rule.
template <typename Scalar>
Mat<Scalar> hess_cp(const Vec<Scalar>& beta, Scalar sigma, Scalar gamma1,
                    const RegressionData<Scalar>& data) {
    if (!(sigma > Scalar(0))) throw DomainError("hess_cp: sigma must be positive");
    if (!(std::abs(gamma1) < gamma1_max<Scalar>())) throw DomainError("hess_cp: gamma1 out of range");
    const Eigen::Index n = data.n(), p = data.p();
    const auto c = detail::cp_chain(gamma1);
    const Vec<Scalar> res = data.y - data.X * beta;
    const Vec<Scalar> r = res / sigma;
    const Vec<Scalar> z = (c.muz + c.sz * r.array()).matrix();
    Vec<Scalar> p1(n), p2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p1(i) = zeta(1, c.lambda * z(i));
        p2(i) = zeta(2, c.lambda * z(i));
    }
    const Vec<Scalar> zp = (c.muz_p + c.sz_p * r.array()).matrix();
    const Vec<Scalar> zpp = (c.muz_pp + c.sz_pp * r.array()).matrix();
    const Vec<Scalar> zt = z + c.lambda * zp;
    const Vec<Scalar> ip = (Scalar(1) - c.lambda * c.lambda * p2.array()).matrix();

    const Scalar s2 = c.sz / sigma;
    // negative-Hessian blocks in (beta, sigma, lambda)
    const Mat<Scalar> nh_bb =
        s2 * s2 * (data.X.transpose() * ip.asDiagonal() * data.X);
    const Vec<Scalar> nh_bs =
        (c.sz / (sigma * sigma)) *
        (data.X.transpose() *
         (z - c.lambda * p1 + (ip.array() * (z.array() - c.muz)).matrix()));
    const Vec<Scalar> nh_bl =
        (data.X.transpose() *
         (c.sz_p * (Scalar(-2) * c.sz * r.array() + c.lambda * p1.array() - c.muz) +
          c.sz * (p1.array() + c.lambda * p2.array() * zt.array() - c.muz_p))
             .matrix()) /
        sigma;
    const Scalar nh_ss =
        (-Scalar(n) + Scalar(2) * c.sz * r.dot(z - c.lambda * p1) +
         c.sz * c.sz * r.dot((ip.array() * r.array()).matrix())) /
        (sigma * sigma);
    const Scalar nh_sl =
        -r.dot((c.sz_p * (z.array() - c.lambda * p1.array()) +
                c.sz * (zp.array() - p1.array() - c.lambda * p2.array() * zt.array()))
                   .matrix()) /
        sigma;
    const Scalar nh_ll = Scalar(n) * (c.sz_p * c.sz_p - c.sz * c.sz_pp) / (c.sz * c.sz) +
                         zp.squaredNorm() + z.dot(zpp) -
                         zt.dot((p2.array() * zt.array()).matrix()) -
                         p1.dot(Scalar(2) * zp + c.lambda * zpp);
    const Scalar dl_dlam =
        Scalar(n) * c.sz_p / c.sz - z.dot(zp) + p1.dot(z + c.lambda * zp);

    Mat<Scalar> H(p + 2, p + 2);
    H.topLeftCorner(p, p) = -nh_bb;
    H.block(0, p, p, 1) = -nh_bs;
    H.block(p, 0, 1, p) = -nh_bs.transpose();
    H.block(0, p + 1, p, 1) = -nh_bl * c.dlam;
    H.block(p + 1, 0, 1, p) = (-nh_bl * c.dlam).transpose();
    H(p, p) = -nh_ss;
    H(p, p + 1) = H(p + 1, p) = -nh_sl * c.dlam;
    H(p + 1, p + 1) = -nh_ll * c.dlam * c.dlam + dl_dlam * c.d2lam;
    return H;
}

// ----- initialization and EM -----

template <typename Scalar>
struct MomInit {
    Vec<Scalar> beta;
    Scalar sigma = 1;
    Scalar gamma1 = 0;
};

// OLS location, residual sd, sample skewness (out-of-range values pulled to
// 0.9 of the supremum).
template <typename Scalar>
MomInit<Scalar> mom_init(const RegressionData<Scalar>& data) {
    if (data.n() < 3) throw DimensionError("mom_init: need n >= 3");
    MomInit<Scalar> out;
    out.beta = data.X.colPivHouseholderQr().solve(data.y);
    const Vec<Scalar> res = data.y - data.X * out.beta;
    const Scalar m2 = res.squaredNorm() / Scalar(data.n());
    if (!(m2 > Scalar(0))) throw DegenerateError("mom_init: zero residual variance");
    out.sigma = std::sqrt(m2);
    const Scalar m3 = res.array().pow(3).sum() / Scalar(data.n());
    Scalar g1 = m3 / (m2 * std::sqrt(m2));
    const Scalar gmax = gamma1_max<Scalar>();
    if (std::abs(g1) >= gmax) g1 = (g1 > 0 ? Scalar(0.9) : Scalar(-0.9)) * gmax;
    out.gamma1 = g1;
    return out;
}

template <typename Scalar>
struct EmState {
    Vec<Scalar> beta;  // direct-parameter coefficients
    Scalar omega = 1;
    Scalar alpha = 0;
    Scalar loglik = 0;
};

// One EM sweep on the latent half-normal factor h:
//   y_i | h_i ~ N(x_i'beta + psi h_i, tau^2),  psi = omega delta,
//   tau^2 = omega^2 (1 - delta^2),  h_i | y_i truncated normal on (0, inf).
template <typename Scalar>
EmState<Scalar> em_step(const EmState<Scalar>& cur, const RegressionData<Scalar>& data) {
    const Eigen::Index n = data.n(), p = data.p();
    const Scalar delta = cur.alpha / std::sqrt(Scalar(1) + cur.alpha * cur.alpha);
    const Vec<Scalar> z = (data.y - data.X * cur.beta) / cur.omega;
    const Scalar s = std::sqrt(std::max(Scalar(1) - delta * delta, Scalar(1e-14)));
    Vec<Scalar> eh(n), eh2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar m = delta * z(i);
        const Scalar t = zeta(1, m / s);
        eh(i) = m + s * t;
        eh2(i) = m * m + s * s + m * s * t;
    }
    // M-step: regression of y on (X, E h) with the E h^2 correction
    Mat<Scalar> A(p + 1, p + 1);
    A.topLeftCorner(p, p) = data.X.transpose() * data.X;
    A.block(0, p, p, 1) = data.X.transpose() * eh;
    A.block(p, 0, 1, p) = A.block(0, p, p, 1).transpose();
    A(p, p) = eh2.sum();
    Vec<Scalar> b(p + 1);
    b.head(p) = data.X.transpose() * data.y;
    b(p) = eh.dot(data.y);
    const Vec<Scalar> sol = A.ldlt().solve(b);
    EmState<Scalar> next;
    next.beta = sol.head(p);
    const Scalar psi = sol(p);
    const Vec<Scalar> res = data.y - data.X * next.beta;
    const Scalar tau2 =
        std::max((res.squaredNorm() - Scalar(2) * psi * res.dot(eh) + psi * psi * eh2.sum()) /
                     Scalar(n),
                 Scalar(1e-12));
    next.omega = std::sqrt(tau2 + psi * psi);
    next.alpha = psi / std::sqrt(tau2);
    next.loglik = loglik_dp(next.beta, next.omega, next.alpha, data);
    return next;
}

// ----- staged fit -----

namespace detail {

// gamma1 clamp just inside the admissible interval for internal evaluations
template <typename Scalar>
Scalar gamma1_effective_max() {
    return gamma1_max<Scalar>() * (Scalar(1) - Scalar(1e-9));
}

template <typename Scalar>
FitResultUv<Scalar> finalize_uv(const Vec<Scalar>& beta_cp, Scalar sigma, Scalar gamma1,
                                const RegressionData<Scalar>& data) {
    FitResultUv<Scalar> out;
    out.beta_cp = beta_cp;
    out.sigma = sigma;
    out.gamma1 = gamma1;
    const Scalar lambda = gamma1_to_lambda(gamma1);
    const Scalar dlt = lambda / std::sqrt(Scalar(1) + lambda * lambda);
    const Scalar muz = sqrt_2_over_pi<Scalar>() * dlt;
    const Scalar sz = std::sqrt(Scalar(1) - muz * muz);
    out.alpha = lambda;
    out.omega = sigma / sz;
    out.beta_dp = beta_cp;
    const Eigen::Index ic = data.intercept_col();
    if (ic >= 0) {
        out.beta_dp(ic) -= sigma * muz / sz;
        out.intercept_adjusted = true;
    }
    out.loglik = loglik_cp(beta_cp, sigma, gamma1, data);
    // observed-information standard errors
    const Mat<Scalar> H = hess_cp(beta_cp, sigma, gamma1, data);
    out.se_cp = Vec<Scalar>::Constant(data.p() + 2, std::numeric_limits<Scalar>::quiet_NaN());
    Eigen::FullPivLU<Mat<Scalar>> lu(Mat<Scalar>(-H));
    if (lu.isInvertible()) {
        const Mat<Scalar> cov = lu.inverse();
        for (Eigen::Index i = 0; i < cov.rows(); ++i)
            if (cov(i, i) > Scalar(0)) out.se_cp(i) = std::sqrt(cov(i, i));
    }
    return out;
}

}  // namespace detail

template <typename Scalar>
FitResultUv<Scalar> fit_uv(const RegressionData<Scalar>& data, const FitOptionsUv& options = {});

namespace detail {

// alpha-only likelihood with (xi, omega) held fixed
template <typename Scalar>
FitResultUv<Scalar> fit_uv_fixed(const RegressionData<Scalar>& data, Scalar xi, Scalar omega,
                                 const FitOptionsUv& options) {
    const Vec<Scalar> z = (data.y.array() - xi).matrix() / omega;
    FitResultUv<Scalar> out;
    out.fixed_location_scale = {xi, omega};
    out.beta_cp = Vec<Scalar>::Constant(1, xi);
    out.beta_dp = out.beta_cp;
    out.omega = omega;
    out.se_cp = Vec<Scalar>::Constant(3, std::numeric_limits<Scalar>::quiet_NaN());

    const Vec<Scalar> xiv = Vec<Scalar>::Constant(1, xi);
    const bool all_pos = (z.array() > Scalar(0)).all();
    const bool all_neg = (z.array() < Scalar(0)).all();
    if (all_pos || all_neg) {
        // the zeta0 sum increases monotonically with +-alpha: frontier maximum
        const Scalar cap = all_pos ? Scalar(1e4) : Scalar(-1e4);
        out.alpha = cap;
        out.convergence = Convergence::Boundary;
        out.loglik = loglik_dp(xiv, omega, cap, data);
        out.gamma1 = (all_pos ? Scalar(1) : Scalar(-1)) * gamma1_effective_max<Scalar>();
        out.sigma = omega;  // nominal
        return out;
    }
    auto obj = [&](const Vecd& a, Vecd& g) {
        Scalar ll = 0, gr = 0;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            ll += zeta(0, a(0) * z(i));
            gr += zeta(1, a(0) * z(i)) * z(i);
        }
        g(0) = gr;
        return double(ll);
    };
    Vecd a0(1);
    a0 << 0.5;
    auto r = bfgs_maximize(obj, a0, options.max_iter);
    out.alpha = Scalar(r.x(0));
    out.loglik = loglik_dp(xiv, omega, out.alpha, data);
    out.gamma1 = lambda_to_gamma1(out.alpha);
    const Scalar dlt = out.alpha / std::sqrt(Scalar(1) + out.alpha * out.alpha);
    out.sigma = omega * std::sqrt(Scalar(1) - Scalar(2) / Scalar(3.1415926535897932384626433832795) * dlt * dlt);
    out.convergence = r.converged ? Convergence::Converged : Convergence::MaxIter;
    out.trace.assign(r.trace.begin(), r.trace.end());
    return out;
}

}  // namespace detail

// Three-stage maximum likelihood in the centred chart: moments start, a few
// EM sweeps, quasi-Newton on (beta, log sigma, atanh-mapped gamma1); full EM
// as fallback when the quasi-Newton stage stalls.
template <typename Scalar>
FitResultUv<Scalar> fit_uv(const RegressionData<Scalar>& data, const FitOptionsUv& options) {
    if (options.fixed_location_scale)
        return detail::fit_uv_fixed<Scalar>(data, Scalar(options.fixed_location_scale->first),
                                            Scalar(options.fixed_location_scale->second), options);

    const Eigen::Index p = data.p();
    const Scalar gcap = detail::gamma1_effective_max<Scalar>();
    std::vector<Scalar> trace;

    // (i) moments
    MomInit<Scalar> mom = mom_init(data);
    // (ii) EM refinement in the direct chart
    EmState<Scalar> em;
    {
        const Scalar lambda = gamma1_to_lambda(std::min(std::max(mom.gamma1, -gcap), gcap));
        const Scalar dlt = lambda / std::sqrt(Scalar(1) + lambda * lambda);
        const Scalar muz = sqrt_2_over_pi<Scalar>() * dlt;
        const Scalar sz = std::sqrt(Scalar(1) - muz * muz);
        em.beta = mom.beta;
        const Eigen::Index ic = data.intercept_col();
        if (ic >= 0) em.beta(ic) -= mom.sigma * muz / sz;
        em.omega = mom.sigma / sz;
        em.alpha = lambda;
        em.loglik = loglik_dp(em.beta, em.omega, em.alpha, data);
    }
    trace.push_back(em.loglik);
    for (int i = 0; i < options.em_steps; ++i) {
        em = em_step(em, data);
        trace.push_back(em.loglik);
    }

    // back to the centred chart
    Vec<Scalar> beta_cp = em.beta;
    {
        const Scalar dlt = em.alpha / std::sqrt(Scalar(1) + em.alpha * em.alpha);
        const Scalar muz = sqrt_2_over_pi<Scalar>() * dlt;
        const Scalar sz = std::sqrt(Scalar(1) - muz * muz);
        const Eigen::Index ic = data.intercept_col();
        if (ic >= 0) beta_cp(ic) += em.omega * muz;
        mom.sigma = em.omega * sz;
        mom.gamma1 = std::min(std::max(lambda_to_gamma1(em.alpha), -gcap), gcap);
    }

    // (iii) quasi-Newton on unconstrained coordinates
    auto unpack = [&](const Vecd& u, Vec<Scalar>& beta, Scalar& sigma, Scalar& g1) {
        beta = u.head(p).template cast<Scalar>();
        sigma = std::exp(Scalar(u(p)));
        g1 = gcap * std::tanh(Scalar(u(p + 1)));
    };
    auto obj = [&](const Vecd& u, Vecd& grad) -> double {
        Vec<Scalar> beta;
        Scalar sigma, g1;
        unpack(u, beta, sigma, g1);
        const Vec<Scalar> g = grad_cp(beta, sigma, g1, data);
        grad.head(p) = g.head(p).template cast<double>();
        grad(p) = double(g(p) * sigma);
        const Scalar th = std::tanh(Scalar(u(p + 1)));
        grad(p + 1) = double(g(p + 1) * gcap * (Scalar(1) - th * th));
        return double(loglik_cp(beta, sigma, g1, data));
    };
    Vecd u0(p + 2);
    u0.head(p) = beta_cp.template cast<double>();
    u0(p) = std::log(double(mom.sigma));
    u0(p + 1) = std::atanh(std::min(std::max(double(mom.gamma1) / double(gcap), -0.999999), 0.999999));
    auto qn = detail::bfgs_maximize(obj, u0, options.max_iter);

    Vec<Scalar> beta_hat;
    Scalar sigma_hat, g1_hat;
    unpack(qn.x, beta_hat, sigma_hat, g1_hat);

    Convergence conv = qn.converged ? Convergence::Converged : Convergence::MaxIter;
    if (!qn.converged) {
        // full EM fallback ("reliability rather than speed")
        EmState<Scalar> st = em;
        Scalar prev = st.loglik;
        for (int i = 0; i < options.em_fallback_iter; ++i) {
            st = em_step(st, data);
            trace.push_back(st.loglik);
            if (std::abs(st.loglik - prev) < Scalar(1e-10) * (Scalar(1) + std::abs(st.loglik)))
                break;
            prev = st.loglik;
        }
        if (double(st.loglik) > qn.value) {
            const Scalar dlt = st.alpha / std::sqrt(Scalar(1) + st.alpha * st.alpha);
            const Scalar muz = sqrt_2_over_pi<Scalar>() * dlt;
            const Scalar sz = std::sqrt(Scalar(1) - muz * muz);
            beta_hat = st.beta;
            const Eigen::Index ic = data.intercept_col();
            if (ic >= 0) beta_hat(ic) += st.omega * muz;
            sigma_hat = st.omega * sz;
            g1_hat = std::min(std::max(lambda_to_gamma1(st.alpha), -gcap), gcap);
            conv = Convergence::Converged;
        }
    }
    for (double v : qn.trace) trace.push_back(Scalar(v));

    const Scalar gmax = gamma1_max<Scalar>();
    if (std::abs(g1_hat) >= gmax - Scalar(1e-6)) conv = Convergence::Boundary;

    FitResultUv<Scalar> out = detail::finalize_uv(beta_hat, sigma_hat, g1_hat, data);
    out.convergence = conv;
    out.trace = std::move(trace);
    return out;
}

// Profile loglikelihood over gamma1 (location/scale maximized out).
namespace detail {
template <typename Scalar>
Scalar profile_gamma1(const RegressionData<Scalar>& data, Scalar gamma1, Vec<Scalar>& beta,
                      Scalar& sigma) {
    const Eigen::Index p = data.p();
    auto obj = [&](const Vecd& u, Vecd& grad) -> double {
        const Vec<Scalar> b = u.head(p).template cast<Scalar>();
        const Scalar s = std::exp(Scalar(u(p)));
        const Vec<Scalar> g = grad_cp(b, s, gamma1, data);
        grad.head(p) = g.head(p).template cast<double>();
        grad(p) = double(g(p) * s);
        return double(loglik_cp(b, s, gamma1, data));
    };
    Vecd u0(p + 1);
    u0.head(p) = beta.template cast<double>();
    u0(p) = std::log(double(sigma));
    auto r = bfgs_maximize(obj, u0, 300);
    beta = r.x.head(p).template cast<Scalar>();
    sigma = std::exp(Scalar(r.x(p)));
    return Scalar(r.value);
}
}  // namespace detail

// Frontier handling: walk gamma1 inward from the boundary until the profile
// loglikelihood sits `drop` units below the supremum.
template <typename Scalar>
FitResultUv<Scalar> boundary_resolve(const FitResultUv<Scalar>& fit,
                                     const RegressionData<Scalar>& data, Scalar drop = Scalar(2)) {
    if (fit.convergence != Convergence::Boundary || drop <= Scalar(0)) return fit;
    const Scalar sup = fit.loglik;

    if (fit.fixed_location_scale) {
        const Scalar xi = fit.fixed_location_scale->first;
        const Scalar omega = fit.fixed_location_scale->second;
        const Vec<Scalar> xiv = Vec<Scalar>::Constant(1, xi);
        auto ll = [&](Scalar a) { return loglik_dp(xiv, omega, a, data); };
        Scalar lo = 0, hi = fit.alpha;
        if (ll(lo) > sup - drop) {
            // whole path is within `drop`; return the symmetric end
            FitResultUv<Scalar> out = fit;
            out.alpha = lo;
            out.gamma1 = 0;
            out.loglik = ll(lo);
            out.boundary_deficit = sup - out.loglik;
            return out;
        }
        for (int i = 0; i < 200; ++i) {
            const Scalar mid = (lo + hi) / Scalar(2);
            (ll(mid) < sup - drop ? lo : hi) = mid;
        }
        FitResultUv<Scalar> out = fit;
        out.alpha = hi;
        out.gamma1 = lambda_to_gamma1(hi);
        out.loglik = ll(hi);
        out.boundary_deficit = sup - out.loglik;
        return out;
    }

    const Scalar gb = fit.gamma1;
    Vec<Scalar> beta = fit.beta_cp;
    Scalar sigma = fit.sigma;
    auto prof = [&](Scalar g1) { return detail::profile_gamma1(data, g1, beta, sigma); };
    Scalar lo = 0, hi = gb;
    if (prof(lo) > sup - drop) {
        FitResultUv<Scalar> out = detail::finalize_uv(beta, sigma, lo, data);
        out.convergence = Convergence::Boundary;
        out.trace = fit.trace;
        out.boundary_deficit = sup - out.loglik;
        return out;
    }
    for (int i = 0; i < 80; ++i) {
        const Scalar mid = (lo + hi) / Scalar(2);
        (prof(mid) < sup - drop ? lo : hi) = mid;
    }
    const Scalar ll = prof(hi);
    (void)ll;
    FitResultUv<Scalar> out = detail::finalize_uv(beta, sigma, hi, data);
    out.convergence = Convergence::Boundary;
    out.trace = fit.trace;
    out.boundary_deficit = sup - out.loglik;
    return out;
}

// 2 { l(SN fit) - l(normal fit) } for the null hypothesis of normality.
template <typename Scalar>
Scalar lr_normality_uv(const RegressionData<Scalar>& data) {
    const Vec<Scalar> beta = data.X.colPivHouseholderQr().solve(data.y);
    const Scalar s2 = (data.y - data.X * beta).squaredNorm() / Scalar(data.n());
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    const Scalar ll0 = Scalar(-0.5) * Scalar(data.n()) *
                       (std::log(Scalar(2) * pi) + Scalar(1) + std::log(s2));
    const FitResultUv<Scalar> f = fit_uv(data);
    return std::max(Scalar(0), Scalar(2) * (f.loglik - ll0));
}

// Expected information in the centred chart for the location-only model
// (X = 1_n), by composite 16-point Gauss-Legendre integration of the
// observed information against the density.  The per-observation Hessian is
// obtained from a duplicated observation since every term is additive.
template <typename Scalar>
Mat<Scalar> expected_information_cp(const CpParamsUv<Scalar>& cp, Eigen::Index n = 1) {
    static const double gl_x[8] = {0.0950125098376374, 0.2816035507792589,
                                   0.4580167776572274, 0.6178762444026438,
                                   0.7554044083550030, 0.8656312023878318,
                                   0.9445750230732326, 0.9894009349916499};
    static const double gl_w[8] = {0.1894506104550685, 0.1826034150449236,
                                   0.1691565193950025, 0.1495959888165767,
                                   0.1246289712555339, 0.0951585116824928,
                                   0.0622535239386479, 0.0271524594117541};
    const DpParams<Scalar> dp = cp_to_dp_uv(cp);
    const Vec<Scalar> beta = Vec<Scalar>::Constant(1, cp.mu);
    const Scalar a = cp.mu - Scalar(12) * cp.sigma, b = cp.mu + Scalar(12) * cp.sigma;
    const int panels = 64;
    Mat<Scalar> acc = Mat<Scalar>::Zero(3, 3);
    for (int s = 0; s < panels; ++s) {
        const Scalar lo = a + (b - a) * Scalar(s) / Scalar(panels);
        const Scalar hi = a + (b - a) * Scalar(s + 1) / Scalar(panels);
        const Scalar h = (hi - lo) / Scalar(2), mid = (hi + lo) / Scalar(2);
        for (int q = 0; q < 8; ++q) {
            for (int sgn = -1; sgn <= 1; sgn += 2) {
                const Scalar y = mid + Scalar(sgn) * h * Scalar(gl_x[q]);
                Vec<Scalar> pair(2);
                pair << y, y;
                RegressionData<Scalar> two(pair);
                const Mat<Scalar> h_obs = hess_cp(beta, cp.sigma, cp.gamma1, two) / Scalar(2);
                Vec<Scalar> yv(1);
                yv << y;
                acc -= h * Scalar(gl_w[q]) * pdf(dp, yv) * h_obs;
            }
        }
    }
    return Scalar(n) * acc;
}

}  // namespace sn

#endif
