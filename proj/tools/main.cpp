// Command-line front end: fit, select, simulate, predict, benchmark.
//
// Exit codes: 0 ok, 2 usage or unreadable input, 3 validation or parse
// failure, 4 fit failure.

#include <iostream>

#include <CLI11.hpp>

#include <hddc/hddc.hpp>

#include "benchmarks.hpp"

namespace {

using hddc::EmConfig;
using hddc::Matrix;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitValidation = 3;
constexpr int kExitFitFailure = 4;

struct CommonOpts {
    std::uint64_t seed = 0;
    int restarts = 10;
    int label_col = -1;
    bool label_last = false;
    bool standardize = false;
    double min_weight = -1.0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "RNG seed (default 0)");
    cmd->add_option("--restarts", opts.restarts, "EM restarts (default 10)");
    cmd->add_option("--label-col", opts.label_col,
                    "0-based index of a class-label column to strip");
    cmd->add_flag("--label-last", opts.label_last,
                  "treat the last column as the class label");
    cmd->add_flag("--standardize", opts.standardize,
                  "z-score each column before fitting");
    cmd->add_option("--min-weight", opts.min_weight,
                    "minimum component weight before a restart is declared "
                    "degenerate (default 1e-6*n)");
}

EmConfig config_from(const CommonOpts& opts) {
    EmConfig cfg;
    cfg.seed = opts.seed;
    cfg.n_restarts = opts.restarts;
    cfg.min_component_weight = opts.min_weight;
    return cfg;
}

hddc::Dataset load_data(const std::string& path, const CommonOpts& opts) {
    int label_col = opts.label_col;
    if (opts.label_last) {
        // peek at the width first
        hddc::Dataset probe = hddc::read_csv(path);
        label_col = static_cast<int>(probe.x.cols()) - 1;
    }
    hddc::Dataset data = hddc::read_csv(path, label_col);
    if (opts.standardize) data.x = bench::standardized(data.x);
    return data;
}

hddc::DimPolicy parse_dim_policy(const std::string& text, double threshold) {
    if (text == "scree") return hddc::DimPolicy::scree(threshold);
    if (text == "bic-common") return hddc::DimPolicy::scree_common_via_bic();
    if (text.rfind("fixed-common:", 0) == 0)
        return hddc::DimPolicy::fixed_common(std::stoi(text.substr(13)));
    if (text.rfind("fixed:", 0) == 0) {
        std::vector<int> dims;
        std::string rest = text.substr(6);
        size_t pos = 0;
        while (pos != std::string::npos) {
            const size_t comma = rest.find(',', pos);
            dims.push_back(std::stoi(rest.substr(pos, comma - pos)));
            pos = comma == std::string::npos ? comma : comma + 1;
        }
        return hddc::DimPolicy::fixed_per_class(dims);
    }
    throw hddc::InvalidInputError(
        "bad --dim-policy '" + text +
        "' (expected scree, fixed:<d1,..,dk>, fixed-common:<d> or bic-common)");
}

std::vector<hddc::ModelKind> parse_model_list(const std::string& text) {
    using hddc::Family;
    if (text == "all") return hddc::enumerate_models();
    if (text == "hddc") {
        std::vector<hddc::ModelKind> out;
        for (const auto& m : hddc::enumerate_models())
            if (!m.is_baseline()) out.push_back(m);
        return out;
    }
    if (text == "free") return hddc::enumerate_models(Family::FreeOrientation);
    if (text == "baselines") return hddc::enumerate_models(Family::Baseline);
    std::vector<hddc::ModelKind> out;
    size_t pos = 0;
    while (pos != std::string::npos) {
        size_t comma = text.find(',', pos);
        // commas never occur inside model names
        std::string token = text.substr(
            pos, comma == std::string::npos ? comma : comma - pos);
        if (!token.empty()) out.push_back(hddc::parse_model(token));
        pos = comma == std::string::npos ? comma : comma + 1;
    }
    if (out.empty()) throw hddc::InvalidInputError("empty --models list");
    return out;
}

std::pair<int, int> parse_k_range(const std::string& text) {
    const size_t dots = text.find("..");
    if (dots == std::string::npos) {
        const int k = std::stoi(text);
        return {k, k};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
}

std::vector<double> parse_threshold_list(const std::string& text) {
    if (text.empty()) return hddc::default_threshold_grid();
    std::vector<double> out;
    size_t pos = 0;
    while (pos != std::string::npos) {
        const size_t comma = text.find(',', pos);
        out.push_back(std::stod(
            text.substr(pos, comma == std::string::npos ? comma : comma - pos)));
        pos = comma == std::string::npos ? comma : comma + 1;
    }
    return out;
}

std::string dims_text(const std::vector<int>& dims) {
    return hddc::detail::dims_string(dims);
}

int run_fit(const std::string& input, int k, const std::string& model_name,
            const std::string& policy_text, double threshold,
            const std::string& out_path, const CommonOpts& opts) {
    hddc::Dataset data = load_data(input, opts);
    const hddc::ModelKind model = hddc::parse_model(model_name);
    EmConfig cfg = config_from(opts);
    hddc::DimPolicy policy = parse_dim_policy(policy_text, threshold);
    hddc::FitReport report = hddc::fit_model(data.x, k, model, policy, cfg);

    std::cout << hddc::model_name(model) << ' ' << k << ' ' << report.loglik
              << ' ' << report.nu << ' ' << report.bic << ' '
              << dims_text(report.dims) << '\n';
    if (!out_path.empty()) hddc::save_model(out_path, report);
    return kExitOk;
}

int run_select(const std::string& input, const std::string& models_text,
               const std::string& k_range_text,
               const std::string& thresholds_text, const std::string& out_path,
               const CommonOpts& opts) {
    hddc::Dataset data = load_data(input, opts);
    hddc::SelectionGrid grid;
    grid.models = parse_model_list(models_text);
    std::tie(grid.k_min, grid.k_max) = parse_k_range(k_range_text);
    grid.thresholds = parse_threshold_list(thresholds_text);
    EmConfig cfg = config_from(opts);

    hddc::SelectionReport report = hddc::select(data.x, grid, cfg);
    const std::string tsv = report.to_tsv();
    if (out_path.empty()) {
        std::cout << tsv;
    } else {
        std::ofstream out(out_path);
        if (!out) throw hddc::IoError("cannot write " + out_path);
        out << tsv;
        const auto& w = report.best();
        std::cout << "winner: " << hddc::model_name(w.model) << " k=" << w.k
                  << " dims=" << dims_text(w.dims) << " bic=" << w.bic << '\n';
    }
    return kExitOk;
}

int run_simulate(const std::string& spec_path, const std::string& out_path) {
    auto spec = hddc::read_spec_file(spec_path);
    hddc::Dataset data = std::holds_alternative<hddc::SimSpec>(spec)
                             ? hddc::simulate(std::get<hddc::SimSpec>(spec))
                             : hddc::simulate_full_rank(
                                   std::get<hddc::FullRankSpec>(spec));
    hddc::write_csv(out_path, data);
    std::cout << "wrote " << data.x.rows() << " x " << data.x.cols()
              << " dataset with labels to " << out_path << '\n';
    return kExitOk;
}

int run_predict(const std::string& model_path, const std::string& input,
                const std::string& out_path, const CommonOpts& opts) {
    hddc::LoadedModel model = hddc::load_model(model_path);
    hddc::Dataset data = load_data(input, opts);

    const int p = std::holds_alternative<hddc::MixtureParams>(model.params)
                      ? model.mixture().p
                      : model.baseline().p;
    if (static_cast<int>(data.x.cols()) != p)
        throw hddc::InvalidInputError(
            "model expects p=" + std::to_string(p) + " but data has p=" +
            std::to_string(data.x.cols()));

    std::vector<int> assignments;
    Matrix posteriors;
    if (std::holds_alternative<hddc::MixtureParams>(model.params)) {
        std::tie(assignments, posteriors) = hddc::predict(model.mixture(), data.x);
    } else {
        std::tie(assignments, posteriors) =
            hddc::baseline_predict(model.baseline(), data.x);
    }

    std::ofstream out(out_path);
    if (!out) throw hddc::IoError("cannot write " + out_path);
    out << "assignment";
    for (Eigen::Index i = 0; i < posteriors.cols(); ++i)
        out << ",p" << i + 1;
    out << '\n';
    for (Eigen::Index j = 0; j < posteriors.rows(); ++j) {
        out << assignments[j];
        for (Eigen::Index i = 0; i < posteriors.cols(); ++i)
            out << ',' << hddc::detail::format_g17(posteriors(j, i));
        out << '\n';
    }
    std::cout << "wrote assignments for " << posteriors.rows() << " rows to "
              << out_path << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Subspace Gaussian-mixture clustering for high-dimensional data"};
    app.require_subcommand(1);

    CommonOpts fit_opts, select_opts, predict_opts;

    auto* fit_cmd = app.add_subcommand("fit", "fit one model to a CSV dataset");
    std::string fit_in, fit_model_name = "[a_i b_i Q_i d_i]";
    std::string fit_policy = "scree", fit_out;
    double fit_threshold = 0.2;
    int fit_k = 2;
    fit_cmd->add_option("input", fit_in, "input CSV")->required();
    fit_cmd->add_option("--k", fit_k, "number of components")->required();
    fit_cmd->add_option("--model", fit_model_name,
                        "model name, e.g. \"[a_i b_i Q_i d_i]\" or Full-GMM");
    fit_cmd->add_option("--dim-policy", fit_policy,
                        "scree | fixed:<d1,..,dk> | fixed-common:<d> | "
                        "bic-common (default scree)");
    fit_cmd->add_option("--threshold", fit_threshold,
                        "scree threshold in (0,1) (default 0.2)");
    fit_cmd->add_option("--out", fit_out, "write the fitted model file here");
    add_common(fit_cmd, fit_opts);

    auto* select_cmd =
        app.add_subcommand("select", "BIC search over models, k and thresholds");
    std::string sel_in, sel_models = "[a_i b_i Q_i d_i]", sel_krange = "1..4";
    std::string sel_thresholds, sel_out;
    select_cmd->add_option("input", sel_in, "input CSV")->required();
    select_cmd->add_option("--models", sel_models,
                           "comma-separated names, or all|hddc|free|baselines");
    select_cmd->add_option("--k-range", sel_krange, "e.g. 2..6 or a single k");
    select_cmd->add_option("--thresholds", sel_thresholds,
                           "comma-separated scree thresholds (default grid)");
    select_cmd->add_option("--out", sel_out, "write the report TSV here");
    add_common(select_cmd, select_opts);

    auto* sim_cmd =
        app.add_subcommand("simulate", "draw a dataset from a spec file");
    std::string sim_spec, sim_out = "simulated.csv";
    sim_cmd->add_option("spec", sim_spec, "simulation spec file")->required();
    sim_cmd->add_option("--out", sim_out, "output CSV (labels in last column)");

    auto* pred_cmd =
        app.add_subcommand("predict", "assign new points with a saved model");
    std::string pred_model, pred_in, pred_out = "predictions.csv";
    pred_cmd->add_option("model", pred_model, "model file")->required();
    pred_cmd->add_option("input", pred_in, "input CSV")->required();
    pred_cmd->add_option("--out", pred_out, "output CSV");
    add_common(pred_cmd, predict_opts);

    auto* bench_cmd = app.add_subcommand("benchmark", "run an experiment suite");
    bench::SuiteOptions bench_opts;
    std::string suite;
    bench_cmd
        ->add_option("suite", suite,
                     "model-selection | hyper-params | dimension-sweep | "
                     "full-rank | crabs")
        ->required();
    bench_cmd->add_option("--seed", bench_opts.seed, "RNG seed");
    bench_cmd->add_option("--replications", bench_opts.replications,
                          "replications per cell (default 10)");
    bench_cmd->add_option("--out", bench_opts.out_dir,
                          "output directory (default benchmark-out)");
    bench_cmd->add_option("--p", bench_opts.p, "override the data dimension");
    bench_cmd->add_option("--n", bench_opts.n, "override the sample count");
    bench_cmd->add_option("--data", bench_opts.crabs_csv,
                          "override the bundled crabs fixture path");
    bench_cmd->add_flag("--standardize", bench_opts.standardize,
                        "z-score columns (crabs suite)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (fit_cmd->parsed())
            return run_fit(fit_in, fit_k, fit_model_name, fit_policy,
                           fit_threshold, fit_out, fit_opts);
        if (select_cmd->parsed())
            return run_select(sel_in, sel_models, sel_krange, sel_thresholds,
                              sel_out, select_opts);
        if (sim_cmd->parsed()) return run_simulate(sim_spec, sim_out);
        if (pred_cmd->parsed())
            return run_predict(pred_model, pred_in, pred_out, predict_opts);
        if (bench_cmd->parsed()) {
            bench::run_suite(suite, bench_opts);
            std::cout << "suite " << suite << " written to "
                      << bench_opts.out_dir << '\n';
            return kExitOk;
        }
    } catch (const hddc::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const hddc::InvalidInputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const hddc::FitFailedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFitFailure;
    } catch (const hddc::SelectionFailedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
