#include "sn/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sn/csv.hpp"
#include "sn/diagnostics.hpp"
#include "sn/discrim.hpp"
#include "sn/fit_mv.hpp"
#include "sn/fit_uv.hpp"
#include "sn/json_io.hpp"
#include "sn/sample.hpp"

namespace sn {
namespace {

struct CliFailure : std::runtime_error {
    int code;
    CliFailure(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliFailure(2, "cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CliFailure(2, "bad JSON in '" + path + "': " + e.what());
    }
    return j;
}

CsvDataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliFailure(2, "cannot open '" + path + "'");
    return CsvDataset::read(in);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

Matd design_with_intercept(const CsvDataset& csv, const std::string& covariates) {
    const auto names = split_list(covariates);
    Matd X(csv.rows(), 1 + static_cast<Eigen::Index>(names.size()));
    X.col(0).setOnes();
    for (std::size_t i = 0; i < names.size(); ++i)
        X.col(1 + static_cast<Eigen::Index>(i)) = csv.numeric_column(names[i]);
    return X;
}

int exit_code_for(Convergence c) {
    switch (c) {
        case Convergence::Converged: return 0;
        case Convergence::Boundary: return 3;
        default: return 4;
    }
}

int cmd_fit_uv(const std::string& data_path, const std::string& response,
               const std::string& covariates, const std::string& param, double drop,
               std::ostream& out) {
    const CsvDataset csv = load_csv(data_path);
    RegressionData<double> data(csv.numeric_column(response), design_with_intercept(csv, covariates));
    FitResultUv<double> fit = fit_uv(data);
    if (fit.convergence == Convergence::Boundary) fit = boundary_resolve(fit, data, drop);
    json j = fit_uv_to_json(fit);
    j["parametrization"] = param;
    out << j.dump(2) << "\n";
    return exit_code_for(fit.convergence);
}

int cmd_fit_mv(const std::string& data_path, const std::string& responses,
               const std::string& covariates, double drop, std::ostream& out) {
    const CsvDataset csv = load_csv(data_path);
    const auto resp = split_list(responses);
    if (resp.empty()) throw CliFailure(2, "--responses must name at least one column");
    MvRegressionData<double> data(csv.numeric_columns(resp), design_with_intercept(csv, covariates));
    FitOptionsMv opt;
    if (drop > 0) opt.drop = drop;
    const FitResultMv<double> fit = fit_mv(data, opt);
    out << fit_mv_to_json(fit).dump(2) << "\n";
    return exit_code_for(fit.convergence);
}

int cmd_sample(const std::string& params_path, long long n, std::uint64_t seed,
               std::uint64_t streams, std::ostream& out) {
    const DpParams<double> dp = params_from_json(load_json(params_path));
    if (n < 1) throw CliFailure(2, "--n must be positive");
    const unsigned workers =
        streams > 1 ? std::max(1u, std::thread::hardware_concurrency()) : 1u;
    const Matd draws = rvs_sn_chunked(dp, static_cast<Eigen::Index>(n), seed, streams, workers);
    std::vector<std::string> header;
    for (Eigen::Index j = 0; j < dp.dim(); ++j) header.push_back("y" + std::to_string(j + 1));
    write_csv(out, header, draws);
    return 0;
}

int cmd_convert(const std::string& params_path, const std::string& to, std::ostream& out) {
    const DpParams<double> dp = params_from_json(load_json(params_path));
    out << params_to_json(dp, to).dump(2) << "\n";
    return 0;
}

int cmd_conditional(const std::string& params_path, const std::string& given, bool approx,
                    std::ostream& out) {
    const DpParams<double> dp = params_from_json(load_json(params_path));
    std::vector<Eigen::Index> idx;
    std::vector<double> vals;
    for (const auto& tok : split_list(given)) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw CliFailure(2, "--given entries must look like j=value");
        try {
            idx.push_back(std::stoll(tok.substr(0, eq)) - 1);  // 1-based on the CLI
            vals.push_back(std::stod(tok.substr(eq + 1)));
        } catch (const std::exception&) {
            throw CliFailure(2, "cannot parse --given entry '" + tok + "'");
        }
    }
    Vecd y1 = Eigen::Map<Vecd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    const ConditionalLaw<double> law = conditional_exact(dp, idx, y1);
    json j = conditional_to_json(law);
    if (approx) j["approximation"] = approximation_to_json(conditional_sn_approx(law));
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_classify_train(const std::string& data_path, const std::string& label,
                       const std::string& features, const std::string& priors,
                       std::ostream& out) {
    const CsvDataset csv = load_csv(data_path);
    std::vector<std::string> feat = split_list(features);
    if (feat.empty()) {
        for (const auto& h : csv.header())
            if (h != label) feat.push_back(h);
    }
    const Matd y = csv.numeric_columns(feat);
    const auto raw = csv.string_column(label);
    std::vector<std::string> names(std::set<std::string>(raw.begin(), raw.end()).begin(),
                                   std::set<std::string>(raw.begin(), raw.end()).end());
    std::map<std::string, int> code;
    for (std::size_t i = 0; i < names.size(); ++i) code[names[i]] = static_cast<int>(i);
    std::vector<int> labels;
    for (const auto& s : raw) labels.push_back(code[s]);

    TrainOptions opt;
    if (!priors.empty()) {
        const auto ps = split_list(priors);
        Vecd pv(static_cast<Eigen::Index>(ps.size()));
        for (std::size_t i = 0; i < ps.size(); ++i) pv(static_cast<Eigen::Index>(i)) = std::stod(ps[i]);
        opt.priors = pv;
    }
    const DiscrimModel<double> model = train_discrim(y, labels, opt);
    json j = discrim_model_to_json(model, names);
    j["features"] = feat;
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_classify_predict(const std::string& model_path, const std::string& data_path,
                         std::ostream& out) {
    const json mj = load_json(model_path);
    std::vector<std::string> names;
    const DiscrimModel<double> model = discrim_model_from_json(mj, &names);
    std::vector<std::string> feat;
    if (mj.contains("features")) feat = mj["features"].get<std::vector<std::string>>();
    const CsvDataset csv = load_csv(data_path);
    if (feat.empty()) feat = csv.header();
    const Matd y = csv.numeric_columns(feat);
    if (y.cols() != model.dim()) throw CliFailure(2, "data dimension does not match the model");
    out << "row,label\n";
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const std::size_t c = classify_likelihood(model, Vecd(y.row(i).transpose()));
        out << (i + 1) << "," << (c < names.size() ? names[c] : std::to_string(c)) << "\n";
    }
    return 0;
}

int cmd_discrim_sim(std::uint64_t seed, long long nrep, std::ostream& out) {
    Table1Config cfg;
    cfg.seed = seed;
    cfg.n_rep = static_cast<Eigen::Index>(nrep);
    const auto rows = table1_sweep<double>(cfg);
    out << "p1L,p1F,p2L,p2F,p_star,cos_theta1,cos_theta2\n";
    for (const auto& r : rows) {
        out << format_number(r.p1_lik) << "," << format_number(r.p1_fisher) << ","
            << format_number(r.p2_lik) << "," << format_number(r.p2_fisher) << ","
            << format_number(r.agreement) << "," << format_number(r.cos_theta1) << ","
            << format_number(r.cos_theta2) << "\n";
    }
    return 0;
}

int cmd_healy(const std::string& params_path, const std::string& data_path,
              const std::string& variant, std::ostream& out) {
    const DpParams<double> dp = params_from_json(load_json(params_path));
    const CsvDataset csv = load_csv(data_path);
    const Matd y = csv.numeric_columns(csv.header());
    if (y.cols() != dp.dim()) throw CliFailure(2, "data dimension does not match the parameters");
    out << "nominal,observed\n";
    if (variant == "qq") {
        const auto qq = chi2_qq(dp, y);
        for (Eigen::Index i = 0; i < qq.sorted_d.size(); ++i)
            out << format_number(qq.quantiles(i)) << "," << format_number(qq.sorted_d(i)) << "\n";
    } else {
        const auto h = healy(dp, y);
        for (Eigen::Index i = 0; i < h.nominal.size(); ++i)
            out << format_number(h.nominal(i)) << "," << format_number(h.sorted_probs(i)) << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"skew-normal distribution toolkit"};
    app.require_subcommand(1);

    std::string data_path, params_path, model_path, response, responses, covariates, given,
        label, features, priors_arg;
    std::string param = "cp", to = "dp", variant = "cdf";
    double drop = 2.0, drop_mv = -1.0;
    long long n = 0, nrep = 100000;
    std::uint64_t seed = 0, streams = 1;
    bool approx = false;

    auto* fit_uv_cmd = app.add_subcommand("fit-uv", "fit a univariate model to CSV data");
    fit_uv_cmd->add_option("--data", data_path, "CSV file")->required();
    fit_uv_cmd->add_option("--response", response, "response column")->required();
    fit_uv_cmd->add_option("--covariates", covariates, "comma-separated covariate columns");
    fit_uv_cmd->add_option("--param", param, "cp|dp (primary output chart)")
        ->check(CLI::IsMember({"cp", "dp"}));
    fit_uv_cmd->add_option("--drop", drop, "loglikelihood drop for boundary resolution");

    auto* fit_mv_cmd = app.add_subcommand("fit-mv", "fit a multivariate model to CSV data");
    fit_mv_cmd->add_option("--data", data_path, "CSV file")->required();
    fit_mv_cmd->add_option("--responses", responses, "comma-separated response columns")->required();
    fit_mv_cmd->add_option("--covariates", covariates, "comma-separated covariate columns");
    fit_mv_cmd->add_option("--drop", drop_mv, "loglikelihood drop for boundary resolution");

    auto* sample_cmd = app.add_subcommand("sample", "draw from a parameter file, CSV to stdout");
    sample_cmd->add_option("--params", params_path, "parameter JSON")->required();
    sample_cmd->add_option("--n", n, "number of draws")->required();
    sample_cmd->add_option("--seed", seed, "RNG seed")->required();
    sample_cmd->add_option("--streams", streams, "number of chunked streams");

    auto* convert_cmd = app.add_subcommand("convert", "convert between parametrizations");
    convert_cmd->add_option("--params", params_path, "parameter JSON")->required();
    convert_cmd->add_option("--to", to, "dp|lambda_psi|cp")
        ->check(CLI::IsMember({"dp", "lambda_psi", "cp"}))
        ->required();

    auto* cond_cmd = app.add_subcommand("conditional", "exact conditional law (1-based indices)");
    cond_cmd->add_option("--params", params_path, "parameter JSON")->required();
    cond_cmd->add_option("--given", given, "conditioning list, e.g. \"1=0.7,3=-0.2\"")->required();
    cond_cmd->add_flag("--approx", approx, "include the skew-normal approximation");

    auto* classify_cmd = app.add_subcommand("classify", "train or apply a discriminant model");
    classify_cmd->require_subcommand(1);
    auto* train_cmd = classify_cmd->add_subcommand("train", "fit group model, JSON to stdout");
    train_cmd->add_option("--data", data_path, "CSV file")->required();
    train_cmd->add_option("--label", label, "label column")->required();
    train_cmd->add_option("--features", features, "comma-separated feature columns");
    train_cmd->add_option("--priors", priors_arg, "comma-separated prior probabilities");
    auto* predict_cmd = classify_cmd->add_subcommand("predict", "allocate rows, CSV to stdout");
    predict_cmd->add_option("--model", model_path, "model JSON")->required();
    predict_cmd->add_option("--data", data_path, "CSV file")->required();

    auto* sim_cmd = app.add_subcommand("discrim-sim", "two-population geometry sweep");
    sim_cmd->add_option("--nrep", nrep, "Monte Carlo replicates per population");
    sim_cmd->add_option("--seed", seed, "RNG seed")->required();

    auto* healy_cmd = app.add_subcommand("healy", "goodness-of-fit plot data");
    healy_cmd->add_option("--params", params_path, "parameter JSON")->required();
    healy_cmd->add_option("--data", data_path, "CSV file")->required();
    healy_cmd->add_option("--variant", variant, "cdf|qq")->check(CLI::IsMember({"cdf", "qq"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (fit_uv_cmd->parsed()) return cmd_fit_uv(data_path, response, covariates, param, drop, out);
        if (fit_mv_cmd->parsed()) return cmd_fit_mv(data_path, responses, covariates, drop_mv, out);
        if (sample_cmd->parsed()) return cmd_sample(params_path, n, seed, streams, out);
        if (convert_cmd->parsed()) return cmd_convert(params_path, to, out);
        if (cond_cmd->parsed()) return cmd_conditional(params_path, given, approx, out);
        if (classify_cmd->parsed()) {
            if (train_cmd->parsed())
                return cmd_classify_train(data_path, label, features, priors_arg, out);
            return cmd_classify_predict(model_path, data_path, out);
        }
        if (sim_cmd->parsed()) return cmd_discrim_sim(seed, nrep, out);
        if (healy_cmd->parsed()) return cmd_healy(params_path, data_path, variant, out);
    } catch (const CliFailure& e) {
        err << "error: " << e.what() << "\n";
        return e.code;
    } catch (const CsvError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const JsonError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    }
    err << "error: no subcommand\n";
    return 2;
}

}  // namespace sn
