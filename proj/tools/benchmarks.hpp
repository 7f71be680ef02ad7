#pragma once

// Benchmark suites backing the `hddc benchmark` subcommand. Each suite
// writes TSV tables and/or (x, method, y) plot-data files into an output
// directory.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <hddc/hddc.hpp>

namespace bench {

using hddc::EmConfig;
using hddc::Matrix;
using hddc::Vector;

struct SuiteOptions {
    std::string out_dir = "benchmark-out";
    std::uint64_t seed = 0;
    int replications = 10;
    int p = -1;      // suite-specific default when < 0
    long n = -1;     // suite-specific default when < 0
    std::string crabs_csv;  // fixture path
    bool standardize = false;
};

inline std::ofstream open_out(const SuiteOptions& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    std::ofstream out(opt.out_dir + "/" + name);
    if (!out) throw hddc::IoError("cannot write " + opt.out_dir + "/" + name);
    return out;
}

inline Matrix standardized(const Matrix& x) {
    Matrix out = x;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double mean = x.col(c).mean();
        const double sd =
            std::sqrt((x.col(c).array() - mean).square().sum() / (x.rows() - 1));
        out.col(c) = (x.col(c).array() - mean) / (sd > 0 ? sd : 1.0);
    }
    return out;
}

// Best-BIC fit of one HDDC model over a scree-threshold grid.
inline hddc::FitReport fit_best_threshold(const Matrix& x, int k,
                                          const hddc::ModelKind& model,
                                          const std::vector<double>& thresholds,
                                          const EmConfig& cfg) {
    hddc::SelectionGrid grid;
    grid.models = {model};
    grid.k_min = grid.k_max = k;
    grid.thresholds = thresholds;
    hddc::SelectionReport rep = hddc::select(x, grid, cfg);
    return rep.best_fit();
}

// ---------------------------------------------------------------------------
// suite: model-selection -- 6 free-orientation data designs x 6 fit models,
// mean BIC and mean recognition tables
// ---------------------------------------------------------------------------

inline hddc::SimSpec data_design(const std::string& model_name, int p, long n,
                                 std::uint64_t seed) {
    hddc::SimSpec spec = hddc::three_group_preset(p, n, seed);
    const hddc::ModelKind kind = hddc::parse_model(model_name);
    for (int i = 0; i < spec.k; ++i) {
        auto& c = spec.classes[i];
        if (kind.a_structure == hddc::AStructure::PerClassPerDim) {
            // descending per-dimension spectrum between a_i and (a_i + b)/2
            const double hi = c.a(0), lo = 0.5 * (c.a(0) + c.b);
            for (int j = 0; j < c.d; ++j)
                c.a(j) = hi - (hi - lo) * j / std::max(1, c.d - 1);
        }
        if (kind.a_structure == hddc::AStructure::Global)
            c.a.setConstant(100.0);
        c.b = kind.b_structure == hddc::BStructure::Global ? 15.0
                                                           : 5.0 + 5.0 * i;
    }
    return spec;
}

inline void suite_model_selection(const SuiteOptions& opt) {
    const int p = opt.p > 0 ? opt.p : 50;
    const long n = opt.n > 0 ? opt.n : 500;
    const std::vector<std::string> names = {
        "[a_ij b_i Q_i d_i]", "[a_ij bQ_i d_i]", "[a_i b_i Q_i d_i]",
        "[a_i bQ_i d_i]",     "[ab_i Q_i d_i]",  "[abQ_i d_i]"};
    const std::vector<double> thresholds = {0.05, 0.1, 0.2};

    std::map<std::string, std::map<std::string, double>> mean_bic, mean_rate;
    for (const auto& data_name : names) {
        for (int rep = 0; rep < opt.replications; ++rep) {
            hddc::SimSpec spec = data_design(
                data_name, p, n, hddc::detail::derive_seed(opt.seed, rep));
            hddc::Dataset data = hddc::simulate(spec);
            for (const auto& fit_name : names) {
                EmConfig cfg;
                cfg.seed = hddc::detail::derive_seed(opt.seed, 1000 + rep);
                cfg.n_restarts = 5;
                hddc::FitReport fit = fit_best_threshold(
                    data.x, 3, hddc::parse_model(fit_name), thresholds, cfg);
                mean_bic[data_name][fit_name] += fit.bic / opt.replications;
                mean_rate[data_name][fit_name] +=
                    hddc::recognition_rate(data.labels, fit.assignments).rate /
                    opt.replications;
            }
        }
        std::cerr << "model-selection: finished data design " << data_name
                  << "\n";
    }

    for (const auto& [file, table] :
         {std::pair{std::string("model_selection_bic.tsv"), &mean_bic},
          std::pair{std::string("model_selection_recognition.tsv"),
                    &mean_rate}}) {
        auto out = open_out(opt, file);
        out << "data_model";
        for (const auto& m : names) out << '\t' << m;
        out << '\n';
        for (const auto& dm : names) {
            out << dm;
            for (const auto& fm : names) out << '\t' << (*table).at(dm).at(fm);
            out << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// suite: hyper-params -- BIC over k with estimated dimensions
// ---------------------------------------------------------------------------

inline void suite_hyper_params(const SuiteOptions& opt) {
    const int p = opt.p > 0 ? opt.p : 50;
    const long n = opt.n > 0 ? opt.n : 1000;
    hddc::Dataset data = hddc::simulate(hddc::three_group_preset(p, n, opt.seed));

    hddc::SelectionGrid grid;
    grid.models = {hddc::parse_model("[a_i b_i Q_i d_i]")};
    grid.k_min = 2;
    grid.k_max = 6;
    EmConfig cfg;
    cfg.seed = opt.seed;
    cfg.n_restarts = 5;
    hddc::SelectionReport rep = hddc::select(data.x, grid, cfg);

    auto out = open_out(opt, "hyper_params.tsv");
    out << "k\tdims\tbic\n";
    for (int k = grid.k_min; k <= grid.k_max; ++k) {
        const hddc::SelectionCell* best = nullptr;
        for (const auto& c : rep.cells)
            if (c.k == k && c.ok && (!best || c.bic < best->bic)) best = &c;
        if (!best) continue;
        out << k << '\t' << hddc::detail::dims_string(best->dims) << '\t'
            << best->bic << '\n';
    }
    out << "# winner k=" << rep.best().k << '\n';
    auto raw = open_out(opt, "hyper_params_grid.tsv");
    raw << rep.to_tsv();
}

// ---------------------------------------------------------------------------
// suite: dimension-sweep -- recognition and BIC against the data dimension
// ---------------------------------------------------------------------------

inline void suite_dimension_sweep(const SuiteOptions& opt) {
    const long n = opt.n > 0 ? opt.n : 1000;
    const std::vector<int> ps =
        opt.p > 0 ? std::vector<int>{opt.p} : std::vector<int>{20, 40, 60, 80, 100};
    struct Method {
        std::string label;
        hddc::ModelKind model;
    };
    const std::vector<Method> methods = {
        {"HDDC [a_i b_i Q_i d_i]", hddc::parse_model("[a_i b_i Q_i d_i]")},
        {"Full-GMM", hddc::parse_model("Full-GMM")},
        {"Diag-GMM", hddc::parse_model("Diag-GMM")},
        {"Sphe-GMM", hddc::parse_model("Sphe-GMM")}};

    auto rate_out = open_out(opt, "dimension_sweep_recognition.tsv");
    auto bic_out = open_out(opt, "dimension_sweep_bic.tsv");
    rate_out << "x\tmethod\ty\n";
    bic_out << "x\tmethod\ty\n";
    for (int p : ps) {
        for (const auto& method : methods) {
            double rate = 0.0, bicv = 0.0;
            for (int rep = 0; rep < opt.replications; ++rep) {
                hddc::Dataset data = hddc::simulate(hddc::three_group_preset(
                    p, n, hddc::detail::derive_seed(opt.seed, rep)));
                EmConfig cfg;
                cfg.seed = hddc::detail::derive_seed(opt.seed, 500 + rep);
                cfg.n_restarts = 5;
                hddc::FitReport fit =
                    method.model.is_baseline()
                        ? hddc::fit_baseline(data.x, 3,
                                             method.model.baseline_kind, cfg)
                        : fit_best_threshold(data.x, 3, method.model,
                                             {0.1, 0.2}, cfg);
                rate += hddc::recognition_rate(data.labels, fit.assignments)
                            .rate /
                        opt.replications;
                bicv += fit.bic / opt.replications;
            }
            rate_out << p << '\t' << method.label << '\t' << rate << '\n';
            bic_out << p << '\t' << method.label << '\t' << bicv << '\n';
        }
        std::cerr << "dimension-sweep: finished p = " << p << "\n";
    }
}

// ---------------------------------------------------------------------------
// suite: full-rank -- stability against sample size on full-rank data
// ---------------------------------------------------------------------------

inline void suite_full_rank(const SuiteOptions& opt) {
    const int p = opt.p > 0 ? opt.p : 50;
    const std::vector<long> ns =
        opt.n > 0 ? std::vector<long>{opt.n}
                  : std::vector<long>{150, 300, 500, 1000, 1500, 2000};

    auto rate_out = open_out(opt, "full_rank_recognition.tsv");
    auto cond_out = open_out(opt, "full_rank_condition.tsv");
    rate_out << "x\tmethod\ty\n";
    cond_out << "x\tmethod\ty\n";

    const auto hddc_model = hddc::parse_model("[a_ij b_i Q_i d_i]");
    for (long n : ns) {
        double rate_h = 0, rate_f = 0, rate_d = 0, rate_s = 0;
        double cond_h = 0, cond_f = 0;
        for (int rep = 0; rep < opt.replications; ++rep) {
            hddc::FullRankSpec spec = hddc::full_rank_preset(
                p, n, 100.0, hddc::detail::derive_seed(opt.seed, rep));
            hddc::Dataset data = hddc::simulate_full_rank(spec);
            EmConfig cfg;
            cfg.seed = hddc::detail::derive_seed(opt.seed, 700 + rep);
            cfg.n_restarts = 5;

            hddc::FitReport fh =
                fit_best_threshold(data.x, 3, hddc_model, {0.1, 0.2}, cfg);
            hddc::FitReport ff =
                hddc::fit_baseline(data.x, 3, hddc::BaselineKind::Full, cfg);
            hddc::FitReport fd =
                hddc::fit_baseline(data.x, 3, hddc::BaselineKind::Diag, cfg);
            hddc::FitReport fs =
                hddc::fit_baseline(data.x, 3, hddc::BaselineKind::Sphe, cfg);

            rate_h += hddc::recognition_rate(data.labels, fh.assignments).rate;
            rate_f += hddc::recognition_rate(data.labels, ff.assignments).rate;
            rate_d += hddc::recognition_rate(data.labels, fd.assignments).rate;
            rate_s += hddc::recognition_rate(data.labels, fs.assignments).rate;

            // condition number of the covariance estimate matched to class 0
            auto match_h = hddc::recognition_rate(data.labels, fh.assignments);
            for (size_t c = 0; c < match_h.matching.size(); ++c)
                if (match_h.matching[c] == 0)
                    cond_h += hddc::condition_ratio(fh.mixture(),
                                                    static_cast<int>(c));
            auto match_f = hddc::recognition_rate(data.labels, ff.assignments);
            for (size_t c = 0; c < match_f.matching.size(); ++c)
                if (match_f.matching[c] == 0)
                    cond_f += hddc::empirical_condition_number(
                        ff.baseline().cov[c]);
        }
        const double r = opt.replications;
        rate_out << n << "\tHDDC [a_ij b_i Q_i d_i]\t" << rate_h / r << '\n';
        rate_out << n << "\tFull-GMM\t" << rate_f / r << '\n';
        rate_out << n << "\tDiag-GMM\t" << rate_d / r << '\n';
        rate_out << n << "\tSphe-GMM\t" << rate_s / r << '\n';
        cond_out << n << "\tHDDC [a_ij b_i Q_i d_i]\t" << cond_h / r << '\n';
        cond_out << n << "\tFull-GMM\t" << cond_f / r << '\n';
        std::cerr << "full-rank: finished n = " << n << "\n";
    }
}

// ---------------------------------------------------------------------------
// suite: crabs -- the bundled morphological-measurements benchmark
// ---------------------------------------------------------------------------

inline void suite_crabs(const SuiteOptions& opt) {
    const std::string path =
        opt.crabs_csv.empty() ? std::string(HDDC_DATA_DIR) + "/crabs.csv"
                              : opt.crabs_csv;
    hddc::Dataset data = hddc::read_csv(path, 5);
    Matrix x = opt.standardize ? standardized(data.x) : data.x;

    EmConfig cfg;
    cfg.seed = opt.seed;
    cfg.n_restarts = 20;

    auto out = open_out(opt, "crabs.tsv");
    out << "model\tvariables\trecognition\tdims\n";
    const std::string variables = opt.standardize ? "standardized" : "original";

    hddc::FitReport sphe =
        hddc::fit_baseline(x, 4, hddc::BaselineKind::Sphe, cfg);
    out << "Sphe-GMM\t" << variables << '\t'
        << hddc::recognition_rate(data.labels, sphe.assignments).rate << "\t-\n";

    hddc::FitReport hd = fit_best_threshold(
        x, 4, hddc::parse_model("[a_i b_i Q_i d_i]"),
        hddc::default_threshold_grid(), cfg);
    out << "HDDC [a_i b_i Q_i d_i]\t" << variables << '\t'
        << hddc::recognition_rate(data.labels, hd.assignments).rate << '\t'
        << hddc::detail::dims_string(hd.dims) << '\n';

    auto conf = open_out(opt, "crabs_confusion.tsv");
    conf << hddc::confusion_matrix(data.labels, hd.assignments).to_tsv();
}

inline void run_suite(const std::string& name, const SuiteOptions& opt) {
    if (name == "model-selection") suite_model_selection(opt);
    else if (name == "hyper-params") suite_hyper_params(opt);
    else if (name == "dimension-sweep") suite_dimension_sweep(opt);
    else if (name == "full-rank") suite_full_rank(opt);
    else if (name == "crabs") suite_crabs(opt);
    else
        throw hddc::InvalidInputError(
            "unknown suite '" + name +
            "' (expected model-selection, hyper-params, dimension-sweep, "
            "full-rank or crabs)");
}

}  // namespace bench
