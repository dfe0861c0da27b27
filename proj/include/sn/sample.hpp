#ifndef SN_SAMPLE_HPP
#define SN_SAMPLE_HPP

// Random variate generation: the exact sign-flip sampler for the
// skew-normal law and the generic skewed-elliptical sampler.

#include <cstdint>
#include <mutex>
#include <thread>
#include <vector>

#include "sn/param.hpp"
#include "sn/rng.hpp"
#include "sn/types.hpp"

namespace sn {

// Exact sampler through the augmented-normal representation: draw
// (X0, X) ~ N_{k+1}(0, [[1, delta'], [delta, Omega_bar]]), emit
// sign(X0) * X, then apply location and scale.  Per row exactly k+1
// normal draws are consumed, in order (X0, X_1, ..., X_k).
template <typename Scalar>
Mat<Scalar> rvs_sn(const DpParams<Scalar>& dp, Eigen::Index n, RandomStream& stream) {
    if (n < 1) throw DomainError("rvs_sn: n must be positive");
    const Eigen::Index k = dp.dim();
    Mat<Scalar> aug(k + 1, k + 1);
    aug(0, 0) = Scalar(1);
    aug.block(0, 1, 1, k) = dp.delta().transpose();
    aug.block(1, 0, k, 1) = dp.delta();
    aug.block(1, 1, k, k) = dp.omega_bar();
    Eigen::LLT<Mat<Scalar>> llt(aug);
    if (llt.info() != Eigen::Success)
        throw DomainError("rvs_sn: augmented correlation matrix not positive definite");
    const Mat<Scalar> L = llt.matrixL();

    Mat<Scalar> out(n, k);
    Vec<Scalar> g(k + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= k; ++j) g(j) = Scalar(stream.normal());
        const Vec<Scalar> x = L * g;
        const Scalar sign = x(0) > Scalar(0) ? Scalar(1) : Scalar(-1);
        out.row(i) = (dp.xi().array() +
                      dp.scale_diag().array() * sign * x.tail(k).array())
                         .transpose();
    }
    return out;
}

template <typename Scalar>
Mat<Scalar> rvs_sn(const DpParams<Scalar>& dp, Eigen::Index n, SeededStream seed) {
    RandomStream stream(seed);
    return rvs_sn(dp, n, stream);
}

// Canonical chunk plan: chunk i of c holds n/c rows plus one extra for the
// first n%c chunks, generated from stream_id = first_id + i; chunks are
// concatenated in stream order.  Workers only change who fills which block.
template <typename Scalar>
Mat<Scalar> rvs_sn_chunked(const DpParams<Scalar>& dp, Eigen::Index n, std::uint64_t seed,
                           std::uint64_t chunks, unsigned workers = 0) {
    if (chunks < 1) throw DomainError("rvs_sn_chunked: need at least one chunk");
    const Eigen::Index k = dp.dim();
    Mat<Scalar> out(n, k);
    std::vector<Eigen::Index> offset(chunks + 1, 0);
    for (std::uint64_t i = 0; i < chunks; ++i) {
        const Eigen::Index cnt = n / static_cast<Eigen::Index>(chunks) +
                                 (static_cast<std::uint64_t>(n % static_cast<Eigen::Index>(chunks)) > i ? 1 : 0);
        offset[i + 1] = offset[i] + cnt;
    }
    auto fill = [&](std::uint64_t i) {
        const Eigen::Index cnt = offset[i + 1] - offset[i];
        if (cnt == 0) return;
        out.middleRows(offset[i], cnt) = rvs_sn(dp, cnt, SeededStream{seed, i});
    };
    if (workers <= 1 || chunks == 1) {
        for (std::uint64_t i = 0; i < chunks; ++i) fill(i);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t next = 0;
        const unsigned nw = std::min<std::uint64_t>(workers, chunks);
        std::mutex mu;
        for (unsigned w = 0; w < nw; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    std::uint64_t mine;
                    {
                        std::lock_guard<std::mutex> lock(mu);
                        if (next >= chunks) return;
                        mine = next++;
                    }
                    fill(mine);
                }
            });
        for (auto& t : pool) t.join();
    }
    return out;
}

// Skewing construction f~(y) = 2 f(y) G(a'y) for an elliptical base f
// centred at the origin and a symmetric scalar weight distribution G.
template <typename Scalar>
struct SkewSpec {
    enum class Base { Normal, StudentT };

    Base base = Base::Normal;
    Scalar nu = 0;        // degrees of freedom when base is StudentT
    Mat<Scalar> scale;    // k x k positive definite scatter matrix
    Vec<Scalar> direction;  // a in W(y) = a'y

    SkewSpec(Base b, Mat<Scalar> sc, Vec<Scalar> a, Scalar dof = Scalar(0))
        : base(b), nu(dof), scale(std::move(sc)), direction(std::move(a)) {
        if (scale.rows() != scale.cols() || scale.rows() != direction.size())
            throw DimensionError("SkewSpec: inconsistent dimensions");
        if ((scale - scale.transpose()).norm() > Scalar(kMatrixTol) * (Scalar(1) + scale.norm()))
            throw DomainError("SkewSpec: scale must be symmetric");
        if (base == Base::StudentT && !(nu > Scalar(0)))
            throw DomainError("SkewSpec: StudentT base needs nu > 0");
        Eigen::LLT<Mat<Scalar>> llt(scale);
        if (llt.info() != Eigen::Success)
            throw DomainError("SkewSpec: scale must be positive definite");
    }

    Eigen::Index dim() const { return direction.size(); }
};

// Exact sampler: Y from the base, X ~ N(0,1) independent, emit Y when
// X < a'Y and -Y otherwise.  Order per row: base draws first (k normals,
// then the chi-square for a t base), then the weight draw.
template <typename Scalar>
Mat<Scalar> rvs_skew_elliptical(const SkewSpec<Scalar>& spec, Eigen::Index n,
                                RandomStream& stream) {
    if (n < 1) throw DomainError("rvs_skew_elliptical: n must be positive");
    const Eigen::Index k = spec.dim();
    Eigen::LLT<Mat<Scalar>> llt(spec.scale);
    const Mat<Scalar> L = llt.matrixL();
    Mat<Scalar> out(n, k);
    Vec<Scalar> g(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) g(j) = Scalar(stream.normal());
        Vec<Scalar> y = L * g;
        if (spec.base == SkewSpec<Scalar>::Base::StudentT) {
            const Scalar w = Scalar(stream.chi2(double(spec.nu)));
            y *= std::sqrt(spec.nu / w);
        }
        const Scalar x = Scalar(stream.normal());
        out.row(i) = (x < spec.direction.dot(y) ? y : Vec<Scalar>(-y)).transpose();
    }
    return out;
}

template <typename Scalar>
Mat<Scalar> rvs_skew_elliptical(const SkewSpec<Scalar>& spec, Eigen::Index n, SeededStream seed) {
    RandomStream stream(seed);
    return rvs_skew_elliptical(spec, n, stream);
}

template <typename Scalar>
Scalar logpdf_skew_elliptical(const SkewSpec<Scalar>& spec, const Vec<Scalar>& y) {
    if (y.size() != spec.dim()) throw DimensionError("logpdf_skew_elliptical: dimension mismatch");
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    const Eigen::Index k = spec.dim();
    Eigen::LLT<Mat<Scalar>> llt(spec.scale);
    const Scalar logdet = Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const Scalar quad = y.dot(llt.solve(y));
    Scalar log_base;
    if (spec.base == SkewSpec<Scalar>::Base::Normal) {
        log_base = Scalar(-0.5) * (Scalar(k) * std::log(Scalar(2) * pi) + logdet + quad);
    } else {
        const Scalar nu = spec.nu;
        log_base = std::lgamma((nu + Scalar(k)) / Scalar(2)) - std::lgamma(nu / Scalar(2)) -
                   Scalar(0.5) * (Scalar(k) * std::log(nu * pi) + logdet) -
                   (nu + Scalar(k)) / Scalar(2) * std::log1p(quad / nu);
    }
    // log 2 + log G(a'y) with G = Phi, i.e. zeta_0
    return log_base + zeta(0, spec.direction.dot(y));
}

template <typename Scalar>
Scalar pdf_skew_elliptical(const SkewSpec<Scalar>& spec, const Vec<Scalar>& y) {
    return std::exp(logpdf_skew_elliptical(spec, y));
}

}  // namespace sn

#endif
