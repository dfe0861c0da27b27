#ifndef SN_DISCRIM_HPP
#define SN_DISCRIM_HPP

// Discrimination between skew-normal populations sharing (Omega, alpha):
// the likelihood rule, the Fisher linear rule built from the exact first
// two moments, exact and Monte Carlo misclassification rates, and the
// two-population geometry sweep.

#include <cmath>
#include <vector>

#include "sn/dist.hpp"
#include "sn/fit_mv.hpp"
#include "sn/sample.hpp"
#include "sn/transform.hpp"
#include "sn/types.hpp"

namespace sn {

template <typename Scalar>
struct DiscrimModel {
    std::vector<Vec<Scalar>> xi;  // one location per group
    Mat<Scalar> omega;            // shared scale matrix
    Vec<Scalar> alpha;            // shared shape
    Vec<Scalar> priors;

    DiscrimModel(std::vector<Vec<Scalar>> locations, Mat<Scalar> om, Vec<Scalar> a,
                 Vec<Scalar> pr)
        : xi(std::move(locations)), omega(std::move(om)), alpha(std::move(a)),
          priors(std::move(pr)) {
        if (xi.empty()) throw GroupCountError("DiscrimModel: need at least one group");
        for (const auto& x : xi)
            if (x.size() != omega.rows()) throw DimensionError("DiscrimModel: location dimension");
        if (priors.size() != static_cast<Eigen::Index>(xi.size()))
            throw DimensionError("DiscrimModel: one prior per group");
        if ((priors.array() <= Scalar(0)).any() ||
            std::abs(priors.sum() - Scalar(1)) > Scalar(1e-9))
            throw DomainError("DiscrimModel: priors must be positive and sum to one");
        DpParams<Scalar> check(xi[0], omega, alpha);  // validates (Omega, alpha)
        (void)check;
    }

    std::size_t groups() const { return xi.size(); }
    Eigen::Index dim() const { return omega.rows(); }
    DpParams<Scalar> group_law(std::size_t i) const {
        return DpParams<Scalar>(xi.at(i), omega, alpha);
    }
};

template <typename Scalar>
struct GeometrySummary {
    Scalar cos_theta1;  // angle between omega^-1 alpha and xi_1 - xi_2
    Scalar cos_theta2;  // angle between omega^-1 alpha and Omega^-1 (xi_1 - xi_2)
};

template <typename Scalar>
GeometrySummary<Scalar> geometry(const DiscrimModel<Scalar>& model) {
    if (model.groups() != 2) throw GroupCountError("geometry: defined for two groups");
    const Vec<Scalar> d = model.xi[0] - model.xi[1];
    const Vec<Scalar> om = model.omega.diagonal().cwiseSqrt();
    const Vec<Scalar> v = (model.alpha.array() / om.array()).matrix();
    Eigen::LLT<Mat<Scalar>> llt(model.omega);
    const Vec<Scalar> w = llt.solve(d);
    GeometrySummary<Scalar> out;
    out.cos_theta1 = v.dot(d) / (v.norm() * d.norm());
    out.cos_theta2 = v.dot(w) / (v.norm() * w.norm());
    return out;
}

// argmax_i log(pi_i) + log f_i(y); ties resolved toward the lowest index.
template <typename Scalar>
std::size_t classify_likelihood(const DiscrimModel<Scalar>& model, const Vec<Scalar>& y) {
    if (y.size() != model.dim()) throw DimensionError("classify_likelihood: dimension mismatch");
    std::size_t best = 0;
    Scalar best_score = -std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < model.groups(); ++i) {
        const Scalar s = std::log(model.priors(static_cast<Eigen::Index>(i))) +
                         logpdf(model.group_law(i), y);
        if (s > best_score) {
            best_score = s;
            best = i;
        }
    }
    return best;
}

// Normal-theory linear rule with the exact skew-normal mean and covariance:
// argmax_i m_i' S^-1 y - m_i' S^-1 m_i / 2 + log pi_i.
template <typename Scalar>
std::size_t classify_fisher(const DiscrimModel<Scalar>& model, const Vec<Scalar>& y) {
    if (y.size() != model.dim()) throw DimensionError("classify_fisher: dimension mismatch");
    const MomentSummary<Scalar> mom = moments(model.group_law(0));
    const Vec<Scalar> shift = mom.mean - model.xi[0];  // omega mu_z, group independent
    Eigen::LLT<Mat<Scalar>> llt(mom.variance);
    std::size_t best = 0;
    Scalar best_score = -std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < model.groups(); ++i) {
        const Vec<Scalar> m = model.xi[i] + shift;
        const Vec<Scalar> sm = llt.solve(m);
        const Scalar s = sm.dot(y) - Scalar(0.5) * sm.dot(m) +
                         std::log(model.priors(static_cast<Eigen::Index>(i)));
        if (s > best_score) {
            best_score = s;
            best = i;
        }
    }
    return best;
}

// Linearity conditions for the two-group likelihood rule:
//   (19)  (xi_1 - xi_2)' omega^-1 alpha = 0
//   (20)  omega^-1 alpha = c Omega^-1 (xi_1 - xi_2), c != 0.
template <typename Scalar>
struct LinearityConditions {
    bool eq19 = false;
    bool eq20 = false;
    std::optional<Scalar> c;
};

template <typename Scalar>
LinearityConditions<Scalar> linearity_conditions(const DiscrimModel<Scalar>& model) {
    if (model.groups() != 2) throw GroupCountError("linearity_conditions: needs exactly 2 groups");
    const Vec<Scalar> d = model.xi[0] - model.xi[1];
    const Vec<Scalar> om = model.omega.diagonal().cwiseSqrt();
    const Vec<Scalar> v = (model.alpha.array() / om.array()).matrix();
    Eigen::LLT<Mat<Scalar>> llt(model.omega);
    const Vec<Scalar> w = llt.solve(d);
    LinearityConditions<Scalar> out;
    const Scalar s19 = std::abs(d.dot(v));
    out.eq19 = s19 <= Scalar(kAlgebraTol) * std::max(Scalar(1), d.norm() * v.norm());
    const Scalar wn2 = w.squaredNorm();
    if (wn2 > Scalar(0)) {
        const Scalar c = v.dot(w) / wn2;
        const bool colinear =
            (v - c * w).norm() <= Scalar(kAlgebraTol) * std::max(Scalar(1), v.norm());
        if (colinear && std::abs(c) * w.norm() > Scalar(kAlgebraTol) * std::max(Scalar(1), v.norm())) {
            out.eq20 = true;
            out.c = c;
        }
    }
    return out;
}

// Exact misclassification of the Fisher rule (two groups): the linear score
// is univariate skew-normal, so each error is a scalar tail probability.
template <typename Scalar>
Vec<Scalar> misclassification_exact_fisher(const DiscrimModel<Scalar>& model) {
    if (model.groups() != 2) throw GroupCountError("misclassification_exact_fisher: needs 2 groups");
    const MomentSummary<Scalar> mom = moments(model.group_law(0));
    const Vec<Scalar> shift = mom.mean - model.xi[0];
    Eigen::LLT<Mat<Scalar>> llt(mom.variance);
    const Vec<Scalar> a = llt.solve(model.xi[0] - model.xi[1]);
    const Scalar t0 = Scalar(0.5) * a.dot(model.xi[0] + model.xi[1] + Scalar(2) * shift) -
                      std::log(model.priors(0) / model.priors(1));
    Mat<Scalar> acol(a.size(), 1);
    acol.col(0) = a;
    Vec<Scalar> err(2);
    for (int i = 0; i < 2; ++i) {
        const DpParams<Scalar> proj = affine(model.group_law(static_cast<std::size_t>(i)), acol);
        const Scalar p_below = cdf_uv(proj, t0);
        err(i) = (i == 0) ? p_below : Scalar(1) - p_below;
    }
    return err;
}

enum class DiscrimRule { Likelihood, Fisher };

template <typename Scalar>
struct McMisclassification {
    Vec<Scalar> error;     // per-group error probability
    Vec<Scalar> std_err;   // binomial standard errors
    Scalar agreement = 1;  // p*: both rules allocate identically (prior-weighted)
};

// Monte Carlo error rates with n_rep draws per group; the two rules are
// evaluated jointly so the agreement probability comes from the same draws.
// Group g consumes stream_id base + g.
template <typename Scalar>
McMisclassification<Scalar> misclassification_mc(const DiscrimModel<Scalar>& model,
                                                 DiscrimRule rule, Eigen::Index n_rep,
                                                 SeededStream stream) {
    const std::size_t g = model.groups();
    McMisclassification<Scalar> out;
    out.error = Vec<Scalar>::Zero(static_cast<Eigen::Index>(g));
    out.std_err = Vec<Scalar>::Zero(static_cast<Eigen::Index>(g));
    Scalar agree_acc = 0;
    for (std::size_t i = 0; i < g; ++i) {
        const Mat<Scalar> draws =
            rvs_sn(model.group_law(i), n_rep, SeededStream{stream.seed, stream.stream_id + i});
        Eigen::Index wrong = 0, agree = 0;
        for (Eigen::Index r = 0; r < n_rep; ++r) {
            const Vec<Scalar> y = draws.row(r).transpose();
            const std::size_t cl = classify_likelihood(model, y);
            const std::size_t cf = classify_fisher(model, y);
            const std::size_t c = (rule == DiscrimRule::Likelihood) ? cl : cf;
            if (c != i) ++wrong;
            if (cl == cf) ++agree;
        }
        const Scalar p = Scalar(wrong) / Scalar(n_rep);
        out.error(static_cast<Eigen::Index>(i)) = p;
        out.std_err(static_cast<Eigen::Index>(i)) =
            std::sqrt(std::max(p * (Scalar(1) - p), Scalar(0)) / Scalar(n_rep));
        agree_acc += model.priors(static_cast<Eigen::Index>(i)) * Scalar(agree) / Scalar(n_rep);
    }
    out.agreement = agree_acc;
    return out;
}

// ----- two-population geometry sweep -----

template <typename Scalar>
struct Table1Row {
    Scalar p1_lik, p1_fisher, p2_lik, p2_fisher, agreement;
    Scalar cos_theta1, cos_theta2;  // as printed: theta1 against Omega^-1 d, theta2 against d
};

struct Table1Config {
    std::uint64_t seed = 0;
    Eigen::Index n_rep = 100000;
};

// Seventeen equally spaced directions of the location difference, from the
// shape axis to its negative, at the reference setting: k = 2, equal priors,
// omega = I, scaled correlation 0.4, alpha = (3,3), |xi_1 - xi_2| = 1.
// Row j uses stream ids (2j, 2j+1).
template <typename Scalar>
std::vector<Table1Row<Scalar>> table1_sweep(const Table1Config& config) {
    const Scalar pi = Scalar(3.1415926535897932384626433832795);
    Mat<Scalar> omega(2, 2);
    omega << 1, Scalar(0.4), Scalar(0.4), 1;
    Vec<Scalar> alpha(2);
    alpha << 3, 3;
    Vec<Scalar> ep(2), em(2);
    ep << 1, 1;
    em << 1, -1;
    ep /= std::sqrt(Scalar(2));
    em /= std::sqrt(Scalar(2));
    Vec<Scalar> priors(2);
    priors << Scalar(0.5), Scalar(0.5);
    Eigen::LLT<Mat<Scalar>> llt(omega);

    std::vector<Table1Row<Scalar>> rows;
    for (int j = 0; j <= 16; ++j) {
        const Scalar psi = pi * Scalar(j) / Scalar(16);
        const Vec<Scalar> d = std::cos(psi) * ep + std::sin(psi) * em;  // xi_2 - xi_1
        std::vector<Vec<Scalar>> locs{Vec<Scalar>(-d / Scalar(2)), Vec<Scalar>(d / Scalar(2))};
        DiscrimModel<Scalar> model(locs, omega, alpha, priors);
        Table1Row<Scalar> row;
        const Vec<Scalar> u = alpha / alpha.norm();
        const Vec<Scalar> w = llt.solve(d);
        row.cos_theta1 = u.dot(w) / w.norm();
        row.cos_theta2 = u.dot(d);
        const Vec<Scalar> exact = misclassification_exact_fisher(model);
        row.p1_fisher = exact(0);
        row.p2_fisher = exact(1);
        const auto mc = misclassification_mc(model, DiscrimRule::Likelihood, config.n_rep,
                                             SeededStream{config.seed, 2 * static_cast<std::uint64_t>(j)});
        row.p1_lik = mc.error(0);
        row.p2_lik = mc.error(1);
        row.agreement = mc.agreement;
        rows.push_back(row);
    }
    return rows;
}

// ----- training from labeled data -----

struct TrainOptions {
    std::optional<Vecd> priors;  // defaults to observed frequencies
    FitOptionsMv fit;
};

// Common (Omega, alpha) with per-group locations via a group-indicator
// design through the multivariate fitter; priors from frequencies.
template <typename Scalar>
DiscrimModel<Scalar> train_discrim(const Mat<Scalar>& y, const std::vector<int>& labels,
                                   const TrainOptions& options = {}) {
    if (static_cast<Eigen::Index>(labels.size()) != y.rows())
        throw DimensionError("train_discrim: one label per row");
    int g = 0;
    for (int l : labels) {
        if (l < 0) throw DomainError("train_discrim: labels must be nonnegative group indices");
        g = std::max(g, l + 1);
    }
    if (g < 2) throw GroupCountError("train_discrim: need at least two groups");
    const Eigen::Index k = y.cols();
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(g), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (Eigen::Index c : counts)
        if (c < k + 1) throw GroupCountError("train_discrim: every group needs at least k+1 rows");

    Mat<Scalar> X = Mat<Scalar>::Zero(y.rows(), g);
    for (Eigen::Index i = 0; i < y.rows(); ++i)
        X(i, labels[static_cast<std::size_t>(i)]) = Scalar(1);
    MvRegressionData<Scalar> data(y, X);
    const FitResultMv<Scalar> fit = fit_mv(data, options.fit);

    std::vector<Vec<Scalar>> locs;
    for (int i = 0; i < g; ++i) locs.push_back(fit.beta.row(i).transpose());
    Vec<Scalar> priors(g);
    if (options.priors) {
        if (options.priors->size() != g) throw DimensionError("train_discrim: prior count");
        priors = options.priors->template cast<Scalar>();
    } else {
        for (int i = 0; i < g; ++i)
            priors(i) = Scalar(counts[static_cast<std::size_t>(i)]) / Scalar(y.rows());
    }
    return DiscrimModel<Scalar>(std::move(locs), fit.omega, fit.alpha, std::move(priors));
}

}  // namespace sn

#endif
