#ifndef SN_DIST_HPP
#define SN_DIST_HPP

// Density, cumulant generating function, exact moments and Mardia indices
// of the skew-normal law.

#include <cmath>

#include "sn/kernels.hpp"
#include "sn/param.hpp"
#include "sn/types.hpp"

namespace sn {

template <typename Scalar>
struct MomentSummary {
    Vec<Scalar> mean;
    Mat<Scalar> variance;
    Scalar mardia_gamma1;
    Scalar mardia_gamma2;
};

template <typename Scalar>
Scalar logpdf(const DpParams<Scalar>& dp, const Vec<Scalar>& y) {
    if (y.size() != dp.dim()) throw DimensionError("logpdf: dimension mismatch");
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    const Vec<Scalar> u = y - dp.xi();
    const Scalar quad = u.dot(dp.solve_omega(u));
    const Scalar log_phi = Scalar(-0.5) * (Scalar(dp.dim()) * std::log(Scalar(2) * pi) +
                                           dp.log_det_omega() + quad);
    const Scalar arg = dp.alpha().dot((u.array() / dp.scale_diag().array()).matrix());
    return log_phi + zeta(0, arg);  // zeta_0 carries the log 2
}

template <typename Scalar>
Scalar pdf(const DpParams<Scalar>& dp, const Vec<Scalar>& y) {
    return std::exp(logpdf(dp, y));
}

// K(t) = t'xi + t'Omega t / 2 + log(2 Phi(delta' omega t))
template <typename Scalar>
Scalar cgf(const DpParams<Scalar>& dp, const Vec<Scalar>& t) {
    if (t.size() != dp.dim()) throw DimensionError("cgf: dimension mismatch");
    const Scalar arg = dp.delta().dot((dp.scale_diag().array() * t.array()).matrix());
    return t.dot(dp.xi()) + Scalar(0.5) * t.dot(dp.omega_cov() * t) + zeta(0, arg);
}

// alpha* = sqrt(alpha' Omega_bar alpha), the scalar shape summary.
template <typename Scalar>
Scalar alpha_star(const DpParams<Scalar>& dp) {
    return std::sqrt(dp.alpha().dot(dp.omega_bar() * dp.alpha()));
}

template <typename Scalar>
Scalar alpha_star(const DpShape<Scalar>& shape) {
    return std::sqrt(shape.alpha.dot(shape.omega_bar * shape.alpha));
}

// Exact mean/variance plus the Mardia skewness/kurtosis indices.  The
// quadratic form mu_z' Sigma^-1 mu_z is evaluated through the identity
// m/(1-m) with m = mu_z' Omega_bar^-1 mu_z, which reduces to
// 2a/(pi + (pi-2)a) for a = (alpha*)^2.
template <typename Scalar>
MomentSummary<Scalar> moments(const DpParams<Scalar>& dp) {
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    const Vec<Scalar> muz = sqrt_2_over_pi<Scalar>() * dp.delta();
    const Vec<Scalar> wmuz = (dp.scale_diag().array() * muz.array()).matrix();
    MomentSummary<Scalar> out;
    out.mean = dp.xi() + wmuz;
    out.variance = dp.omega_cov() - wmuz * wmuz.transpose();
    const Scalar a = dp.alpha().dot(dp.omega_bar() * dp.alpha());
    const Scalar q = Scalar(2) * a / (pi + (pi - Scalar(2)) * a);
    out.mardia_gamma1 = std::pow((Scalar(4) - pi) / Scalar(2), Scalar(2)) * q * q * q;
    out.mardia_gamma2 = Scalar(2) * (pi - Scalar(3)) * q * q;
    return out;
}

namespace detail {
template <typename Scalar, typename F>
Scalar adaptive_simpson(const F& f, Scalar a, Scalar b, Scalar fa, Scalar fm, Scalar fb,
                        Scalar whole, Scalar tol, int depth) {
    const Scalar m = (a + b) / Scalar(2);
    const Scalar lm = (a + m) / Scalar(2), rm = (m + b) / Scalar(2);
    const Scalar flm = f(lm), frm = f(rm);
    const Scalar left = (m - a) / Scalar(6) * (fa + Scalar(4) * flm + fm);
    const Scalar right = (b - m) / Scalar(6) * (fm + Scalar(4) * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= Scalar(15) * tol)
        return left + right + (left + right - whole) / Scalar(15);
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / Scalar(2), depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / Scalar(2), depth - 1);
}

template <typename Scalar, typename F>
Scalar integrate(const F& f, Scalar a, Scalar b, Scalar tol = Scalar(1e-10)) {
    const Scalar m = (a + b) / Scalar(2);
    const Scalar fa = f(a), fm = f(m), fb = f(b);
    const Scalar whole = (b - a) / Scalar(6) * (fa + Scalar(4) * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}
}  // namespace detail

// Univariate distribution function by adaptive quadrature of the density
// (absolute accuracy ~1e-9).
template <typename Scalar>
Scalar cdf_uv(const DpParams<Scalar>& dp, Scalar x) {
    if (dp.dim() != 1) throw DimensionError("cdf_uv: expects k = 1");
    const Scalar xi = dp.xi()(0), omega = dp.scale_diag()(0), alpha = dp.alpha()(0);
    const Scalar z = (x - xi) / omega;
    const Scalar lo = Scalar(-13.5);
    if (z <= lo) return Scalar(0);
    if (z >= Scalar(13.5)) return Scalar(1);
    auto f = [&](Scalar t) {
        return Scalar(2) * norm_pdf(t) * norm_cdf(alpha * t);
    };
    return std::min(Scalar(1), detail::integrate(f, lo, z, Scalar(1e-11)));
}

// Order-3/4 cumulant array.  These are rank one: kappa_{ij...r} =
// coeff * v_i v_j ... v_r with v = omega * delta, so the array is stored in
// factored form.
template <typename Scalar>
struct RankOneCumulant {
    int order;
    Scalar coeff;       // half-normal cumulant of the same order
    Vec<Scalar> factor;  // omega * delta

    Scalar operator()(Eigen::Index i, Eigen::Index j, Eigen::Index r) const {
        if (order != 3) throw DomainError("3-index access requires order 3");
        return coeff * factor(i) * factor(j) * factor(r);
    }
    Scalar operator()(Eigen::Index i, Eigen::Index j, Eigen::Index r, Eigen::Index s) const {
        if (order != 4) throw DomainError("4-index access requires order 4");
        return coeff * factor(i) * factor(j) * factor(r) * factor(s);
    }
};

template <typename Scalar>
RankOneCumulant<Scalar> cumulant_array(const DpParams<Scalar>& dp, int order) {
    if (order != 3 && order != 4) throw DomainError("cumulant_array: order must be 3 or 4");
    RankOneCumulant<Scalar> out;
    out.order = order;
    out.coeff = half_normal_cumulant<Scalar>(order);
    out.factor = (dp.scale_diag().array() * dp.delta().array()).matrix();
    return out;
}

}  // namespace sn

#endif
