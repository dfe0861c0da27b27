#ifndef SN_TRANSFORM_HPP
#define SN_TRANSFORM_HPP

// Distribution theory under linear maps: margins, affine transforms, the
// canonical form, independence of linear/quadratic forms, chi-square laws,
// exact conditionals and their skew-normal approximation, Mahalanobis
// distances.

#include <cmath>
#include <optional>
#include <vector>

#include "sn/dist.hpp"
#include "sn/param.hpp"
#include "sn/types.hpp"

namespace sn {

inline constexpr double kAlgebraTol = 1e-10;  // tolerance for algebraic identities

namespace detail {

template <typename Scalar>
std::vector<Eigen::Index> complement_indices(const std::vector<Eigen::Index>& idx,
                                             Eigen::Index k) {
    std::vector<bool> in(static_cast<std::size_t>(k), false);
    for (auto i : idx) {
        if (i < 0 || i >= k) throw IndexError("index out of range");
        if (in[static_cast<std::size_t>(i)]) throw IndexError("duplicate index");
        in[static_cast<std::size_t>(i)] = true;
    }
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < k; ++i)
        if (!in[static_cast<std::size_t>(i)]) out.push_back(i);
    return out;
}

template <typename Scalar>
Mat<Scalar> submatrix(const Mat<Scalar>& m, const std::vector<Eigen::Index>& rows,
                      const std::vector<Eigen::Index>& cols) {
    Mat<Scalar> out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                m(rows[i], cols[j]);
    return out;
}

template <typename Scalar>
Vec<Scalar> subvector(const Vec<Scalar>& v, const std::vector<Eigen::Index>& idx) {
    Vec<Scalar> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    return out;
}

}  // namespace detail

// Marginal law of the selected components; the shape of the kept block is
//   abar_1 = (alpha_1 + ObarInv_11 Obar_12 alpha_2) / sqrt(1 + alpha_2' Obar_22.1 alpha_2)
// evaluated in scaled coordinates, so it applies unchanged with location
// and scale present.
template <typename Scalar>
DpParams<Scalar> marginal(const DpParams<Scalar>& dp, const std::vector<Eigen::Index>& indices) {
    if (indices.empty()) throw IndexError("marginal: empty index set");
    const Eigen::Index k = dp.dim();
    const auto rest = detail::complement_indices<Scalar>(indices, k);
    const Mat<Scalar> o11 = detail::submatrix(dp.omega_cov(), indices, indices);
    const Vec<Scalar> xi1 = detail::subvector(dp.xi(), indices);
    if (rest.empty()) return DpParams<Scalar>(xi1, o11, detail::subvector(dp.alpha(), indices));

    const Mat<Scalar> ob11 = detail::submatrix(dp.omega_bar(), indices, indices);
    const Mat<Scalar> ob12 = detail::submatrix(dp.omega_bar(), indices, rest);
    const Mat<Scalar> ob22 = detail::submatrix(dp.omega_bar(), rest, rest);
    const Vec<Scalar> a1 = detail::subvector(dp.alpha(), indices);
    const Vec<Scalar> a2 = detail::subvector(dp.alpha(), rest);
    Eigen::LLT<Mat<Scalar>> llt11(ob11);
    const Mat<Scalar> sol = llt11.solve(ob12);               // ObarInv_11 Obar_12
    const Mat<Scalar> schur = ob22 - ob12.transpose() * sol;  // Obar_22.1
    const Vec<Scalar> abar1 = (a1 + sol * a2) / std::sqrt(Scalar(1) + a2.dot(schur * a2));
    return DpParams<Scalar>(xi1, o11, abar1);
}

// Law of X = A' Y for a k x h matrix A of full column rank:
//   xi_X = A'xi,  Omega_X = A'Omega A,
//   alpha_X = omega_X Omega_X^-1 B' alpha / sqrt(1 + alpha'(Omega_bar - B Omega_X^-1 B')alpha),
//   B = omega^-1 Omega A.
template <typename Scalar>
DpParams<Scalar> affine(const DpParams<Scalar>& dp, const Mat<Scalar>& A) {
    if (A.rows() != dp.dim()) throw DimensionError("affine: A must have k rows");
    const Mat<Scalar> omega_x = A.transpose() * dp.omega_cov() * A;
    Eigen::LLT<Mat<Scalar>> llt(omega_x);
    if (llt.info() != Eigen::Success)
        throw RankError("affine: A' Omega A is singular (A not of full column rank)");
    const Vec<Scalar> xi_x = A.transpose() * dp.xi();
    const Mat<Scalar> B =
        (dp.omega_cov() * A).array().colwise() / dp.scale_diag().array();
    const Vec<Scalar> omega_x_diag = omega_x.diagonal().cwiseSqrt();
    const Vec<Scalar> bta = B.transpose() * dp.alpha();
    const Vec<Scalar> sol = llt.solve(bta);
    const Scalar denom = Scalar(1) + dp.alpha().dot(dp.omega_bar() * dp.alpha()) - bta.dot(sol);
    const Vec<Scalar> alpha_x =
        (omega_x_diag.array() * sol.array()).matrix() / std::sqrt(denom);
    return DpParams<Scalar>(xi_x, omega_x, alpha_x);
}

// Canonical form: an invertible A* with A* Z ~ SN_k(I, alpha*) where alpha*
// has at most one non-zero entry, equal to sqrt(alpha' Omega_bar alpha).
// A* = H L^-1 with L the Cholesky factor of Omega_bar and H the Householder
// reflector carrying e_1 onto L'alpha / |L'alpha|.
template <typename Scalar>
struct CanonicalForm {
    Mat<Scalar> transform;   // A*
    Vec<Scalar> alpha_star;  // (|L'alpha|, 0, ..., 0)
};

template <typename Scalar>
CanonicalForm<Scalar> canonical(const DpShape<Scalar>& shape) {
    const Eigen::Index k = shape.dim();
    Eigen::LLT<Mat<Scalar>> llt(shape.omega_bar);
    const Mat<Scalar> L = llt.matrixL();
    const Mat<Scalar> Linv = L.template triangularView<Eigen::Lower>().solve(
        Mat<Scalar>::Identity(k, k));
    const Vec<Scalar> v = L.transpose() * shape.alpha;
    const Scalar vn = v.norm();
    CanonicalForm<Scalar> out;
    out.alpha_star = Vec<Scalar>::Zero(k);
    if (vn < std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + shape.alpha.norm())) {
        out.transform = Linv;
        return out;
    }
    out.alpha_star(0) = vn;
    Vec<Scalar> w = v / vn;
    w(0) -= Scalar(1);
    const Scalar wn2 = w.squaredNorm();
    Mat<Scalar> H = Mat<Scalar>::Identity(k, k);
    if (wn2 > Scalar(0)) H -= (Scalar(2) / wn2) * (w * w.transpose());
    out.transform = H * Linv;
    return out;
}

// Independence of the blocks of Y = A'Z under a column partition of A
// (conditions: A_i' Omega A_j = 0 for i != j, and A_i' Omega alpha != 0 for
// at most one i), together with the per-block laws.
template <typename Scalar>
struct BlockIndependence {
    bool independent = false;
    bool scale_condition = false;  // condition (a)
    bool shape_condition = false;  // condition (b)
    std::vector<DpParams<Scalar>> blocks;
};

template <typename Scalar>
BlockIndependence<Scalar> independent_blocks(const DpShape<Scalar>& shape, const Mat<Scalar>& A,
                                             const std::vector<std::vector<Eigen::Index>>& partition) {
    if (A.rows() != shape.dim()) throw DimensionError("independent_blocks: A must have k rows");
    std::vector<bool> seen(static_cast<std::size_t>(A.cols()), false);
    for (const auto& g : partition) {
        if (g.empty()) throw IndexError("independent_blocks: empty block");
        for (auto c : g) {
            if (c < 0 || c >= A.cols() || seen[static_cast<std::size_t>(c)])
                throw IndexError("independent_blocks: partition must be disjoint and in range");
            seen[static_cast<std::size_t>(c)] = true;
        }
    }
    for (bool s : seen)
        if (!s) throw IndexError("independent_blocks: partition must cover all columns");

    const std::size_t h = partition.size();
    std::vector<Mat<Scalar>> Ai(h);
    for (std::size_t i = 0; i < h; ++i) {
        Ai[i].resize(A.rows(), static_cast<Eigen::Index>(partition[i].size()));
        for (std::size_t c = 0; c < partition[i].size(); ++c)
            Ai[i].col(static_cast<Eigen::Index>(c)) = A.col(partition[i][c]);
    }

    BlockIndependence<Scalar> out;
    out.scale_condition = true;
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = i + 1; j < h; ++j) {
            const Mat<Scalar> cross = Ai[i].transpose() * shape.omega_bar * Ai[j];
            const Scalar scale = std::sqrt(
                (Ai[i].transpose() * shape.omega_bar * Ai[i]).norm() *
                (Ai[j].transpose() * shape.omega_bar * Ai[j]).norm());
            if (cross.norm() > Scalar(kAlgebraTol) * std::max(Scalar(1), scale))
                out.scale_condition = false;
        }
    }
    int skewed = 0;
    for (std::size_t i = 0; i < h; ++i) {
        const Vec<Scalar> s = Ai[i].transpose() * (shape.omega_bar * shape.alpha);
        const Scalar scale = std::sqrt((Ai[i].transpose() * shape.omega_bar * Ai[i]).norm()) *
                             (Scalar(1) + shape.alpha.norm());
        if (s.norm() > Scalar(kAlgebraTol) * scale) ++skewed;
    }
    out.shape_condition = skewed <= 1;
    out.independent = out.scale_condition && out.shape_condition;

    DpParams<Scalar> z(Vec<Scalar>::Zero(shape.dim()), shape.omega_bar, shape.alpha);
    for (std::size_t i = 0; i < h; ++i) out.blocks.push_back(affine(z, Ai[i]));
    return out;
}

namespace detail {
template <typename Scalar>
Eigen::Index matrix_rank(const Mat<Scalar>& B) {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(B);
    const Scalar thr = Scalar(1e-9) * std::max(Scalar(1), es.eigenvalues().cwiseAbs().maxCoeff());
    return (es.eigenvalues().array().abs() > thr).count();
}
}  // namespace detail

// Z'BZ ~ chi^2_p iff B Omega_bar B = B (B symmetric PSD of rank p); returns
// p when the identity holds to tolerance, nothing otherwise.
template <typename Scalar>
std::optional<Eigen::Index> quadratic_form_is_chi2(const DpShape<Scalar>& shape,
                                                   const Mat<Scalar>& B) {
    if (B.rows() != shape.dim() || B.cols() != shape.dim())
        throw DimensionError("quadratic_form_is_chi2: B must be k x k");
    if ((B - B.transpose()).norm() > Scalar(kAlgebraTol) * std::max(Scalar(1), B.norm()))
        throw DomainError("quadratic_form_is_chi2: B must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(B);
    if (es.eigenvalues().minCoeff() < -Scalar(kAlgebraTol) * std::max(Scalar(1), B.norm()))
        throw DomainError("quadratic_form_is_chi2: B must be positive semi-definite");
    const Mat<Scalar> resid = B * shape.omega_bar * B - B;
    if (resid.norm() > Scalar(kAlgebraTol) * std::max(Scalar(1), B.norm())) return std::nullopt;
    return detail::matrix_rank(B);
}

// Helper for the full-rank construction B = C (C' Omega_bar C)^-1 C'.
template <typename Scalar>
Mat<Scalar> chi2_projector(const Mat<Scalar>& C, const Mat<Scalar>& omega_bar) {
    Eigen::LLT<Mat<Scalar>> llt(C.transpose() * omega_bar * C);
    if (llt.info() != Eigen::Success) throw RankError("chi2_projector: C must have full column rank");
    Mat<Scalar> B = C * llt.solve(C.transpose());
    return ((B + B.transpose()) / Scalar(2)).eval();
}

// Mutual independence of the quadratic forms Z'B_i Z:
//   (a) B_i Omega_bar B_j = 0 for i != j,
//   (b) alpha' Omega_bar B_i Omega_bar alpha != 0 for at most one i.
template <typename Scalar>
bool quad_forms_independent(const DpShape<Scalar>& shape, const std::vector<Mat<Scalar>>& bs) {
    const Vec<Scalar> oa = shape.omega_bar * shape.alpha;
    for (std::size_t i = 0; i < bs.size(); ++i)
        if (bs[i].rows() != shape.dim() || bs[i].cols() != shape.dim())
            throw DimensionError("quad_forms_independent: B_i must be k x k");
    for (std::size_t i = 0; i < bs.size(); ++i)
        for (std::size_t j = i + 1; j < bs.size(); ++j) {
            const Scalar scale = std::max(Scalar(1), bs[i].norm() * bs[j].norm());
            if ((bs[i] * shape.omega_bar * bs[j]).norm() > Scalar(kAlgebraTol) * scale)
                return false;
        }
    int skewed = 0;
    for (const auto& b : bs) {
        const Scalar scale = std::max(Scalar(1), b.norm() * oa.squaredNorm());
        if (std::abs(oa.dot(b * oa)) > Scalar(kAlgebraTol) * scale) ++skewed;
    }
    return skewed <= 1;
}

// Fisher-Cochran style verdict for Z ~ SN_k(I, alpha): with sum B_i = I and
// B_i alpha != 0 for at most one i, the forms are independent chi^2_{p_i}
// iff sum p_i = k.
template <typename Scalar>
struct FisherCochranResult {
    bool applicable = false;        // preconditions hold
    bool independent_chi2 = false;  // verdict
    std::vector<Eigen::Index> ranks;
};

template <typename Scalar>
FisherCochranResult<Scalar> fisher_cochran(const DpShape<Scalar>& shape,
                                           const std::vector<Mat<Scalar>>& bs) {
    FisherCochranResult<Scalar> out;
    const Eigen::Index k = shape.dim();
    if ((shape.omega_bar - Mat<Scalar>::Identity(k, k)).norm() > Scalar(kAlgebraTol) * Scalar(k))
        return out;
    Mat<Scalar> sum = Mat<Scalar>::Zero(k, k);
    for (const auto& b : bs) sum += b;
    if ((sum - Mat<Scalar>::Identity(k, k)).norm() > Scalar(kAlgebraTol) * Scalar(k)) return out;
    int skewed = 0;
    for (const auto& b : bs) {
        const Scalar scale = std::max(Scalar(1), b.norm() * shape.alpha.norm());
        if ((b * shape.alpha).norm() > Scalar(kAlgebraTol) * scale) ++skewed;
    }
    if (skewed > 1) return out;
    out.applicable = true;
    Eigen::Index total = 0;
    for (const auto& b : bs) {
        out.ranks.push_back(detail::matrix_rank(b));
        total += out.ranks.back();
    }
    out.independent_chi2 = (total == k);
    return out;
}

// Exact conditional law of the remaining block given Y_1 = y_1.  The
// cumulant generating function is that of a normal plus the shifted
// log Phi term, so mean/variance and all higher cumulants come from the
// zeta family at x0:
//   E = xi2c + zeta1(x0) tau,  Var = Omega_22.1 + zeta2(x0) tau tau',
//   kappa_m = zeta_m(x0) tau^{(x) m}  (m > 2),  tau = omega_2 delta~_2.
template <typename Scalar>
struct ConditionalLaw {
    Vec<Scalar> xi2c;
    Mat<Scalar> omega22_1;
    Scalar x0 = 0;
    Scalar x0_prime = 0;
    Vec<Scalar> tau;
    Vec<Scalar> alpha2;
    Vec<Scalar> omega2;  // marginal scale of the conditioned-on-free block
    Scalar normalizer = 1;  // Phi(x0)

    Vec<Scalar> mean() const { return xi2c + zeta(1, x0) * tau; }
    Mat<Scalar> variance() const {
        return omega22_1 + zeta(2, x0) * (tau * tau.transpose()).eval();
    }
    RankOneCumulant<Scalar> cumulant(int m) const {
        if (m < 3 || m > 4) throw DomainError("conditional cumulant: order must be 3 or 4");
        return RankOneCumulant<Scalar>{m, zeta(m, x0), tau};
    }

    Scalar logpdf(const Vec<Scalar>& y2) const {
        if (y2.size() != xi2c.size()) throw DimensionError("conditional logpdf: dimension mismatch");
        const Scalar pi = Scalar(3.1415926535897932384626433832795);
        Eigen::LLT<Mat<Scalar>> llt(omega22_1);
        const Vec<Scalar> u = y2 - xi2c;
        const Scalar quad = u.dot(llt.solve(u));
        const Scalar logdet =
            Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        const Scalar log_phi =
            Scalar(-0.5) * (Scalar(y2.size()) * std::log(Scalar(2) * pi) + logdet + quad);
        const Scalar arg = alpha2.dot((u.array() / omega2.array()).matrix()) + x0_prime;
        // log Phi(arg) - log Phi(x0), via zeta_0 for tail stability
        return log_phi + zeta(0, arg) - zeta(0, x0);
    }
    Scalar pdf(const Vec<Scalar>& y2) const { return std::exp(logpdf(y2)); }
};

template <typename Scalar>
ConditionalLaw<Scalar> conditional_exact(const DpParams<Scalar>& dp,
                                         const std::vector<Eigen::Index>& cond_indices,
                                         const Vec<Scalar>& y1) {
    const Eigen::Index k = dp.dim();
    if (cond_indices.empty() || static_cast<Eigen::Index>(cond_indices.size()) >= k)
        throw DimensionError("conditional_exact: conditioning block must be a strict non-empty subset");
    if (y1.size() != static_cast<Eigen::Index>(cond_indices.size()))
        throw DimensionError("conditional_exact: y1 size mismatch");
    const auto rest = detail::complement_indices<Scalar>(cond_indices, k);

    const Mat<Scalar> o11 = detail::submatrix(dp.omega_cov(), cond_indices, cond_indices);
    const Mat<Scalar> o12 = detail::submatrix(dp.omega_cov(), cond_indices, rest);
    const Mat<Scalar> o22 = detail::submatrix(dp.omega_cov(), rest, rest);
    const Vec<Scalar> xi1 = detail::subvector(dp.xi(), cond_indices);
    const Vec<Scalar> xi2 = detail::subvector(dp.xi(), rest);
    const Vec<Scalar> a1 = detail::subvector(dp.alpha(), cond_indices);
    const Vec<Scalar> a2 = detail::subvector(dp.alpha(), rest);
    const Vec<Scalar> om1 = o11.diagonal().cwiseSqrt();
    const Vec<Scalar> om2 = o22.diagonal().cwiseSqrt();

    Eigen::LLT<Mat<Scalar>> llt11(o11);
    const Vec<Scalar> dev1 = y1 - xi1;
    ConditionalLaw<Scalar> law;
    law.xi2c = xi2 + o12.transpose() * llt11.solve(dev1);
    law.omega22_1 = o22 - o12.transpose() * llt11.solve(o12);
    law.omega22_1 = ((law.omega22_1 + law.omega22_1.transpose()) / Scalar(2)).eval();
    // scaled by the *marginal* scale of block 2, so generally not unit-diagonal
    const Mat<Scalar> ob221 =
        (law.omega22_1.array() / (om2 * om2.transpose()).array()).eval();

    const Scalar s = std::sqrt(Scalar(1) + a2.dot(ob221 * a2));
    const Vec<Scalar> abar1 =
        (a1 + (om1.array() * llt11.solve(o12 * (a2.array() / om2.array()).matrix()).array())
                  .matrix()) /
        s;
    law.x0 = abar1.dot((dev1.array() / om1.array()).matrix());
    law.x0_prime = s * law.x0;
    const Vec<Scalar> dt2 = (ob221 * a2) / s;  // delta of (Obar_22.1, alpha_2)
    law.tau = (om2.array() * dt2.array()).matrix();
    law.alpha2 = a2;
    law.omega2 = om2;
    law.normalizer = norm_cdf(law.x0);
    return law;
}

// Third-order moment match of the conditional by a skew-normal.  With
// c = (zeta3(x0)/kappa3)^(1/3) the matched law has omega*delta = c tau,
// Omega = Var + (2/pi) c^2 tau tau', xi = E - sqrt(2/pi) c tau.  When the
// implied delta is infeasible the two-cumulant normal match is returned
// instead and `feasible` is false.
template <typename Scalar>
struct SnApproximation {
    DpParams<Scalar> dp;
    bool feasible = true;
    Scalar mean_error = 0;
    Scalar var_error = 0;
    Scalar third_cumulant_error = 0;
};

template <typename Scalar>
SnApproximation<Scalar> conditional_sn_approx(const ConditionalLaw<Scalar>& law) {
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    const Vec<Scalar> mean = law.mean();
    const Mat<Scalar> var = law.variance();
    const Scalar z3 = zeta(3, law.x0);
    const Scalar c = std::cbrt(z3 / half_normal_cumulant<Scalar>(3));
    const Vec<Scalar> wd = c * law.tau;

    Mat<Scalar> omega_a = var + (Scalar(2) / pi) * (wd * wd.transpose());
    omega_a = ((omega_a + omega_a.transpose()) / Scalar(2)).eval();
    const Vec<Scalar> xi_a = mean - sqrt_2_over_pi<Scalar>() * wd;
    const Vec<Scalar> om_a = omega_a.diagonal().cwiseSqrt();
    const Vec<Scalar> delta_a = (wd.array() / om_a.array()).matrix();

    auto make = [&](const Vec<Scalar>& alpha) {
        return DpParams<Scalar>(xi_a, omega_a, alpha);
    };
    Mat<Scalar> obar_a = (omega_a.array() / (om_a * om_a.transpose()).array()).eval();
    obar_a.diagonal().setOnes();

    const Eigen::Index m = mean.size();
    bool ok = (delta_a.array().abs() < Scalar(1) - Scalar(kMatrixTol)).all();
    Vec<Scalar> alpha_a = Vec<Scalar>::Zero(m);
    if (ok) {
        try {
            alpha_a = delta_to_alpha(delta_a, obar_a);
        } catch (const DomainError&) {
            ok = false;
        }
    }

    SnApproximation<Scalar> out{ok ? make(alpha_a)
                                   : DpParams<Scalar>(mean, var, Vec<Scalar>::Zero(m)),
                                ok};
    const MomentSummary<Scalar> mm = moments(out.dp);
    out.mean_error = (mm.mean - mean).cwiseAbs().maxCoeff();
    out.var_error = (mm.variance - var).cwiseAbs().maxCoeff();
    const Vec<Scalar> wd_fit =
        (out.dp.scale_diag().array() * out.dp.delta().array()).matrix();
    const Scalar k3 = half_normal_cumulant<Scalar>(3);
    Scalar e3 = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index l = 0; l < m; ++l)
                e3 = std::max(e3, std::abs(k3 * wd_fit(i) * wd_fit(j) * wd_fit(l) -
                                           z3 * law.tau(i) * law.tau(j) * law.tau(l)));
    out.third_cumulant_error = e3;
    return out;
}

// Mahalanobis distances d_i = (y_i - xi)' Omega^-1 (y_i - xi), chi^2_k
// under the model.
template <typename Scalar>
Vec<Scalar> mahalanobis(const DpParams<Scalar>& dp, const Mat<Scalar>& y) {
    if (y.cols() != dp.dim()) throw DimensionError("mahalanobis: column count mismatch");
    const Mat<Scalar> u = y.rowwise() - dp.xi().transpose();
    const Mat<Scalar> w = dp.llt().solve(u.transpose());
    return (u.transpose().array() * w.array()).colwise().sum().transpose();
}

}  // namespace sn

#endif
