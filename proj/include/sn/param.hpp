#ifndef SN_PARAM_HPP
#define SN_PARAM_HPP

// Parametrizations of the skew-normal family and the exact conversions
// among them: direct (xi, Omega, alpha), shape-level (Omega_bar, alpha),
// delta, (lambda, Psi), and the univariate centred (mu, sigma, gamma1).

#include <cmath>
#include <vector>

#include "sn/kernels.hpp"
#include "sn/types.hpp"

namespace sn {

inline constexpr double kMatrixTol = 1e-12;  // symmetry / unit-diagonal tolerance

template <typename Scalar>
void validate_correlation(const Mat<Scalar>& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw DimensionError("correlation matrix must be square and non-empty");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (std::abs(m(i, i) - Scalar(1)) > Scalar(kMatrixTol))
            throw DomainError("correlation matrix must have unit diagonal");
        for (Eigen::Index j = 0; j < i; ++j)
            if (std::abs(m(i, j) - m(j, i)) > Scalar(kMatrixTol))
                throw DomainError("correlation matrix must be symmetric");
    }
    Eigen::LLT<Mat<Scalar>> llt(m);
    if (llt.info() != Eigen::Success)
        throw DomainError("correlation matrix must be positive definite");
}

// Shape-level parameters (no location/scale): correlation Omega_bar + alpha.
template <typename Scalar>
struct DpShape {
    Mat<Scalar> omega_bar;
    Vec<Scalar> alpha;

    DpShape(Mat<Scalar> ob, Vec<Scalar> a) : omega_bar(std::move(ob)), alpha(std::move(a)) {
        validate_correlation(omega_bar);
        if (alpha.size() != omega_bar.rows())
            throw DimensionError("alpha dimension must match omega_bar");
    }
    Eigen::Index dim() const { return alpha.size(); }
};

// Direct parameters (xi, Omega, alpha) with eagerly derived scale diagonal,
// scaled correlation, delta, and a cached Cholesky factor of Omega.
template <typename Scalar>
class DpParams {
  public:
    DpParams(Vec<Scalar> xi, Mat<Scalar> omega_cov, Vec<Scalar> alpha)
        : xi_(std::move(xi)), omega_(std::move(omega_cov)), alpha_(std::move(alpha)) {
        const Eigen::Index k = xi_.size();
        if (omega_.rows() != k || omega_.cols() != k || alpha_.size() != k)
            throw DimensionError("DpParams: inconsistent dimensions");
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < i; ++j)
                if (std::abs(omega_(i, j) - omega_(j, i)) > Scalar(kMatrixTol) *
                        (Scalar(1) + std::abs(omega_(i, j))))
                    throw DomainError("Omega must be symmetric");
        llt_.compute(omega_);
        if (llt_.info() != Eigen::Success)
            throw DomainError("Omega must be positive definite");
        scale_ = omega_.diagonal().cwiseSqrt();
        omega_bar_ = omega_.array() /
                     (scale_ * scale_.transpose()).array();
        // exact unit diagonal, guards tiny rounding in the scaling
        omega_bar_.diagonal().setOnes();
        const Scalar q = alpha_.dot(omega_bar_ * alpha_);
        delta_ = (omega_bar_ * alpha_) / std::sqrt(Scalar(1) + q);
        log_det_ = Scalar(2) * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }

    Eigen::Index dim() const { return xi_.size(); }
    const Vec<Scalar>& xi() const { return xi_; }
    const Mat<Scalar>& omega_cov() const { return omega_; }
    const Vec<Scalar>& alpha() const { return alpha_; }
    const Vec<Scalar>& scale_diag() const { return scale_; }       // omega = sqrt(diag(Omega))
    const Mat<Scalar>& omega_bar() const { return omega_bar_; }    // scaled correlation
    const Vec<Scalar>& delta() const { return delta_; }            // shape-level delta
    Scalar log_det_omega() const { return log_det_; }
    const Eigen::LLT<Mat<Scalar>>& llt() const { return llt_; }

    Vec<Scalar> solve_omega(const Vec<Scalar>& v) const { return llt_.solve(v); }
    DpShape<Scalar> shape() const { return DpShape<Scalar>(omega_bar_, alpha_); }

  private:
    Vec<Scalar> xi_;
    Mat<Scalar> omega_;
    Vec<Scalar> alpha_;
    Vec<Scalar> scale_;
    Mat<Scalar> omega_bar_;
    Vec<Scalar> delta_;
    Scalar log_det_ = 0;
    Eigen::LLT<Mat<Scalar>> llt_;
};

template <typename Scalar>
struct LambdaPsiParams {
    Vec<Scalar> lambda;
    Mat<Scalar> psi;

    LambdaPsiParams(Vec<Scalar> l, Mat<Scalar> p) : lambda(std::move(l)), psi(std::move(p)) {
        validate_correlation(psi);
        if (lambda.size() != psi.rows())
            throw DimensionError("lambda dimension must match Psi");
    }
};

template <typename Scalar = double>
Scalar gamma1_max() {
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    return (Scalar(4) - pi) / Scalar(2) * std::pow(Scalar(2) / (pi - Scalar(2)), Scalar(1.5));
}

template <typename Scalar>
struct CpParamsUv {
    Scalar mu;
    Scalar sigma;
    Scalar gamma1;

    CpParamsUv(Scalar m, Scalar s, Scalar g1) : mu(m), sigma(s), gamma1(g1) {
        if (!(sigma > Scalar(0))) throw DomainError("CpParamsUv: sigma must be positive");
        if (!(std::abs(gamma1) < gamma1_max<Scalar>()))
            throw DomainError("CpParamsUv: |gamma1| must be below its supremum");
    }
};

template <typename Scalar>
Vec<Scalar> dp_to_delta(const DpShape<Scalar>& shape) {
    const Scalar q = shape.alpha.dot(shape.omega_bar * shape.alpha);
    return (shape.omega_bar * shape.alpha) / std::sqrt(Scalar(1) + q);
}

template <typename Scalar>
Vec<Scalar> delta_to_alpha(const Vec<Scalar>& delta, const Mat<Scalar>& omega_bar) {
    validate_correlation(omega_bar);
    if (delta.size() != omega_bar.rows())
        throw DimensionError("delta dimension must match omega_bar");
    if ((delta.array().abs() >= Scalar(1) - Scalar(kMatrixTol)).any())
        throw DomainError("delta components must satisfy |delta_j| < 1");
    Eigen::LLT<Mat<Scalar>> llt(omega_bar);
    const Vec<Scalar> w = llt.solve(delta);
    const Scalar s = Scalar(1) - delta.dot(w);
    if (s <= Scalar(0))
        throw DomainError("delta is infeasible for this correlation matrix");
    return w / std::sqrt(s);
}

// (Omega_bar, alpha) -> (lambda, Psi):
//   lambda_j = delta_j / sqrt(1 - delta_j^2),
//   Psi = Delta^-1 (Omega_bar - delta delta^T) Delta^-1,  Delta = diag(1/sqrt(1+lambda_j^2)).
template <typename Scalar>
LambdaPsiParams<Scalar> dp_to_lambdapsi(const DpShape<Scalar>& shape) {
    const Vec<Scalar> delta = dp_to_delta(shape);
    const Vec<Scalar> lambda =
        delta.array() / (Scalar(1) - delta.array().square()).sqrt();
    const Vec<Scalar> inv_Delta = (Scalar(1) + lambda.array().square()).sqrt();
    Mat<Scalar> psi = shape.omega_bar - delta * delta.transpose();
    psi = inv_Delta.asDiagonal() * psi * inv_Delta.asDiagonal();
    psi = ((psi + psi.transpose()) / Scalar(2)).eval();
    psi.diagonal().setOnes();
    return LambdaPsiParams<Scalar>(std::move(lambda), std::move(psi));
}

// Inverse map: Omega_bar = Delta (Psi + lambda lambda^T) Delta,
//              alpha = Delta^-1 Psi^-1 lambda / sqrt(1 + lambda^T Psi^-1 lambda).
template <typename Scalar>
DpShape<Scalar> lambdapsi_to_dp(const LambdaPsiParams<Scalar>& lp) {
    const Vec<Scalar> inv_Delta = (Scalar(1) + lp.lambda.array().square()).sqrt();
    Mat<Scalar> ob = lp.psi + lp.lambda * lp.lambda.transpose();
    ob = (ob.array() / (inv_Delta * inv_Delta.transpose()).array()).eval();
    ob = ((ob + ob.transpose()) / Scalar(2)).eval();
    ob.diagonal().setOnes();
    Eigen::LLT<Mat<Scalar>> llt(lp.psi);
    const Vec<Scalar> w = llt.solve(lp.lambda);
    Vec<Scalar> alpha = (inv_Delta.array() * w.array()).matrix() /
                        std::sqrt(Scalar(1) + lp.lambda.dot(w));
    return DpShape<Scalar>(std::move(ob), std::move(alpha));
}

// Scalar chain gamma1 <-> lambda via the closed R,T formulas.
template <typename Scalar>
Scalar gamma1_to_lambda(Scalar gamma1) {
    if (!(std::abs(gamma1) < gamma1_max<Scalar>()))
        throw DomainError("gamma1 out of range");
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    const Scalar R = std::cbrt(Scalar(2) * gamma1 / (Scalar(4) - pi));
    const Scalar T = std::sqrt(Scalar(2) / pi - (Scalar(1) - Scalar(2) / pi) * R * R);
    return R / T;
}

template <typename Scalar>
Scalar lambda_to_gamma1(Scalar lambda) {
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    const Scalar delta = lambda / std::sqrt(Scalar(1) + lambda * lambda);
    const Scalar muz = sqrt_2_over_pi<Scalar>() * delta;
    const Scalar sz = std::sqrt(Scalar(1) - muz * muz);
    const Scalar r = muz / sz;
    return (Scalar(4) - pi) / Scalar(2) * r * r * r;
}

template <typename Scalar>
DpParams<Scalar> cp_to_dp_uv(const CpParamsUv<Scalar>& cp) {
    const Scalar lambda = gamma1_to_lambda(cp.gamma1);
    const Scalar delta = lambda / std::sqrt(Scalar(1) + lambda * lambda);
    const Scalar muz = sqrt_2_over_pi<Scalar>() * delta;
    const Scalar sz = std::sqrt(Scalar(1) - muz * muz);
    const Scalar omega = cp.sigma / sz;
    Vec<Scalar> xi(1), alpha(1);
    xi << cp.mu - omega * muz;
    alpha << lambda;  // univariate: alpha and lambda coincide
    Mat<Scalar> om(1, 1);
    om << omega * omega;
    return DpParams<Scalar>(std::move(xi), std::move(om), std::move(alpha));
}

template <typename Scalar>
CpParamsUv<Scalar> dp_to_cp_uv(const DpParams<Scalar>& dp) {
    if (dp.dim() != 1) throw DimensionError("dp_to_cp_uv: expects k = 1");
    const Scalar alpha = dp.alpha()(0);
    const Scalar omega = dp.scale_diag()(0);
    const Scalar delta = alpha / std::sqrt(Scalar(1) + alpha * alpha);
    const Scalar muz = sqrt_2_over_pi<Scalar>() * delta;
    const Scalar sz = std::sqrt(Scalar(1) - muz * muz);
    return CpParamsUv<Scalar>(dp.xi()(0) + omega * muz, omega * sz, lambda_to_gamma1(alpha));
}

// Componentwise centred parameters of a multivariate law: each scalar margin
// (dimension-one case of the marginalization formula) mapped through
// dp_to_cp_uv.
template <typename Scalar>
std::vector<CpParamsUv<Scalar>> cp_convert_mv(const DpParams<Scalar>& dp) {
    const Eigen::Index k = dp.dim();
    std::vector<CpParamsUv<Scalar>> out;
    out.reserve(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
        // marginal shape of component j: abar_j = (a_j + ObarInv_11 Obar_12 a_2) / sqrt(1 + a_2' Obar_22.1 a_2)
        const Eigen::Index m = k - 1;
        Vec<Scalar> a2(m);
        Mat<Scalar> ob22(m, m);
        Vec<Scalar> ob12(m);
        Eigen::Index c = 0;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (i == j) continue;
            a2(c) = dp.alpha()(i);
            ob12(c) = dp.omega_bar()(j, i);
            Eigen::Index c2 = 0;
            for (Eigen::Index l = 0; l < k; ++l) {
                if (l == j) continue;
                ob22(c, c2++) = dp.omega_bar()(i, l);
            }
            ++c;
        }
        Scalar abar;
        if (m == 0) {
            abar = dp.alpha()(0);
        } else {
            const Mat<Scalar> sc = ob22 - ob12 * ob12.transpose();  // Obar_22.1 (1x1 block for j)
            abar = (dp.alpha()(j) + ob12.dot(a2)) / std::sqrt(Scalar(1) + a2.dot(sc * a2));
        }
        const Scalar omega_j = dp.scale_diag()(j);
        Vec<Scalar> xi1(1), a1(1);
        xi1 << dp.xi()(j);
        a1 << abar;
        Mat<Scalar> o1(1, 1);
        o1 << omega_j * omega_j;
        out.push_back(dp_to_cp_uv(DpParams<Scalar>(xi1, o1, a1)));
    }
    return out;
}

}  // namespace sn

#endif
