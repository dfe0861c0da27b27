#ifndef SN_JSON_IO_HPP
#define SN_JSON_IO_HPP

// JSON schemas for CLI interchange.  The parameter-file schema is
//   {"xi": [...], "Omega": [[...]], "alpha": [...]}
// with an optional "parametrization" tag ("dp" | "lambda_psi" | "cp");
// lambda_psi files carry {"xi", "omega", "lambda", "Psi"} and cp files
// (univariate) {"mu", "sigma", "gamma1"}.

#include <json.hpp>

#include "sn/discrim.hpp"
#include "sn/fit_mv.hpp"
#include "sn/fit_uv.hpp"
#include "sn/param.hpp"
#include "sn/transform.hpp"
#include "sn/types.hpp"

namespace sn {

using json = nlohmann::json;

struct JsonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline json vec_to_json(const Vecd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json mat_to_json(const Matd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(std::move(row));
    }
    return a;
}

inline Vecd vec_from_json(const json& a, const char* what) {
    if (!a.is_array()) throw JsonError(std::string("expected array for ") + what);
    Vecd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number()) throw JsonError(std::string("non-numeric entry in ") + what);
        v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    }
    return v;
}

inline Matd mat_from_json(const json& a, const char* what) {
    if (!a.is_array() || a.empty()) throw JsonError(std::string("expected matrix for ") + what);
    const std::size_t cols = a[0].is_array() ? a[0].size() : 0;
    if (cols == 0) throw JsonError(std::string("expected nested arrays for ") + what);
    Matd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_array() || a[i].size() != cols)
            throw JsonError(std::string("ragged matrix for ") + what);
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i][j].get<double>();
    }
    return m;
}

// Load any supported parameter file as direct parameters.
inline DpParams<double> params_from_json(const json& j) {
    const std::string kind = j.value("parametrization", std::string("dp"));
    try {
        if (kind == "dp") {
            return DpParams<double>(vec_from_json(j.at("xi"), "xi"),
                                    mat_from_json(j.at("Omega"), "Omega"),
                                    vec_from_json(j.at("alpha"), "alpha"));
        }
        if (kind == "lambda_psi") {
            const Vecd xi = vec_from_json(j.at("xi"), "xi");
            const Vecd omega = vec_from_json(j.at("omega"), "omega");
            LambdaPsiParams<double> lp(vec_from_json(j.at("lambda"), "lambda"),
                                       mat_from_json(j.at("Psi"), "Psi"));
            const DpShape<double> shape = lambdapsi_to_dp(lp);
            const Matd cov =
                omega.asDiagonal() * shape.omega_bar * omega.asDiagonal();
            return DpParams<double>(xi, cov, shape.alpha);
        }
        if (kind == "cp") {
            CpParamsUv<double> cp(j.at("mu").get<double>(), j.at("sigma").get<double>(),
                                  j.at("gamma1").get<double>());
            return cp_to_dp_uv(cp);
        }
    } catch (const json::exception& e) {
        throw JsonError(std::string("parameter file: ") + e.what());
    }
    throw JsonError("unknown parametrization '" + kind + "'");
}

inline json params_to_json(const DpParams<double>& dp, const std::string& target = "dp") {
    json j;
    if (target == "dp") {
        j["parametrization"] = "dp";
        j["xi"] = vec_to_json(dp.xi());
        j["Omega"] = mat_to_json(dp.omega_cov());
        j["alpha"] = vec_to_json(dp.alpha());
        return j;
    }
    if (target == "lambda_psi") {
        const auto lp = dp_to_lambdapsi(dp.shape());
        j["parametrization"] = "lambda_psi";
        j["xi"] = vec_to_json(dp.xi());
        j["omega"] = vec_to_json(dp.scale_diag());
        j["lambda"] = vec_to_json(lp.lambda);
        j["Psi"] = mat_to_json(lp.psi);
        return j;
    }
    if (target == "cp") {
        j["parametrization"] = "cp";
        if (dp.dim() == 1) {
            const auto cp = dp_to_cp_uv(dp);
            j["mu"] = cp.mu;
            j["sigma"] = cp.sigma;
            j["gamma1"] = cp.gamma1;
        } else {
            json comps = json::array();
            for (const auto& cp : cp_convert_mv(dp))
                comps.push_back({{"mu", cp.mu}, {"sigma", cp.sigma}, {"gamma1", cp.gamma1}});
            j["components"] = std::move(comps);
        }
        return j;
    }
    throw JsonError("unknown target parametrization '" + target + "'");
}

inline const char* convergence_name(Convergence c) {
    switch (c) {
        case Convergence::Converged: return "converged";
        case Convergence::Boundary: return "boundary";
        default: return "max_iter";
    }
}

inline json fit_uv_to_json(const FitResultUv<double>& f) {
    json j;
    j["cp"] = {{"beta", vec_to_json(f.beta_cp)}, {"sigma", f.sigma}, {"gamma1", f.gamma1}};
    j["dp"] = {{"beta", vec_to_json(f.beta_dp)},
               {"omega", f.omega},
               {"alpha", f.alpha},
               {"intercept_adjusted", f.intercept_adjusted}};
    j["loglik"] = f.loglik;
    j["se_cp"] = vec_to_json(f.se_cp);
    j["convergence"] = convergence_name(f.convergence);
    if (f.convergence == Convergence::Boundary) j["boundary_deficit"] = f.boundary_deficit;
    j["trace"] = vec_to_json(Eigen::Map<const Vecd>(f.trace.data(),
                                                    static_cast<Eigen::Index>(f.trace.size())));
    return j;
}

inline json fit_mv_to_json(const FitResultMv<double>& f) {
    json j;
    j["beta"] = mat_to_json(f.beta);
    j["Omega"] = mat_to_json(f.omega);
    j["alpha"] = vec_to_json(f.alpha);
    j["eta"] = vec_to_json(f.eta);
    j["loglik"] = f.loglik;
    j["se"] = {{"beta", mat_to_json(f.se_beta)},
               {"eta", vec_to_json(f.se_eta)},
               {"alpha", vec_to_json(f.se_alpha)}};
    j["convergence"] = convergence_name(f.convergence);
    if (f.convergence == Convergence::Boundary) j["boundary_deficit"] = f.boundary_deficit;
    if (!f.sensitivity.empty()) {
        json s = json::array();
        for (const auto& sp : f.sensitivity)
            s.push_back({{"drop", sp.drop},
                         {"beta", mat_to_json(sp.beta)},
                         {"alpha", vec_to_json(sp.alpha)},
                         {"loglik", sp.loglik}});
        j["sensitivity"] = std::move(s);
    }
    return j;
}

inline json conditional_to_json(const ConditionalLaw<double>& law) {
    json j;
    j["xi2c"] = vec_to_json(law.xi2c);
    j["Omega22_1"] = mat_to_json(law.omega22_1);
    j["x0"] = law.x0;
    j["x0_prime"] = law.x0_prime;
    j["tau"] = vec_to_json(law.tau);
    j["alpha2"] = vec_to_json(law.alpha2);
    j["normalizer"] = law.normalizer;
    j["mean"] = vec_to_json(law.mean());
    j["variance"] = mat_to_json(law.variance());
    return j;
}

inline json approximation_to_json(const SnApproximation<double>& a) {
    json j;
    j["feasible"] = a.feasible;
    j["dp"] = params_to_json(a.dp);
    j["matched_cumulant_error"] = {a.mean_error, a.var_error, a.third_cumulant_error};
    return j;
}

inline json discrim_model_to_json(const DiscrimModel<double>& m,
                                  const std::vector<std::string>& label_names) {
    json j;
    json locs = json::array();
    for (const auto& x : m.xi) locs.push_back(vec_to_json(x));
    j["xi"] = std::move(locs);
    j["Omega"] = mat_to_json(m.omega);
    j["alpha"] = vec_to_json(m.alpha);
    j["priors"] = vec_to_json(m.priors);
    j["labels"] = label_names;
    return j;
}

inline DiscrimModel<double> discrim_model_from_json(const json& j,
                                                    std::vector<std::string>* label_names) {
    try {
        std::vector<Vecd> locs;
        for (const auto& x : j.at("xi")) locs.push_back(vec_from_json(x, "xi"));
        if (label_names) *label_names = j.at("labels").get<std::vector<std::string>>();
        return DiscrimModel<double>(std::move(locs), mat_from_json(j.at("Omega"), "Omega"),
                                    vec_from_json(j.at("alpha"), "alpha"),
                                    vec_from_json(j.at("priors"), "priors"));
    } catch (const json::exception& e) {
        throw JsonError(std::string("model file: ") + e.what());
    }
}

}  // namespace sn

#endif
