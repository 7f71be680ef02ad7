#pragma once

#include <cstdio>
#include <sstream>

#include "hddc/baselines.hpp"
#include "hddc/parallel.hpp"

namespace hddc {

// Default scree-threshold grid, conservative to aggressive.
inline std::vector<double> default_threshold_grid() {
    return {0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.3};
}

struct SelectionGrid {
    std::vector<ModelKind> models;
    int k_min = 1;
    int k_max = 1;
    std::vector<double> thresholds = default_threshold_grid();
};

struct SelectionCell {
    ModelKind model;
    int k = 0;
    double threshold = std::numeric_limits<double>::quiet_NaN();  // NaN: n/a
    std::vector<int> dims;
    double loglik = std::numeric_limits<double>::quiet_NaN();
    long nu = 0;
    double bic = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    std::string error;
};

struct SelectionReport {
    std::vector<SelectionCell> cells;
    int winner = -1;  // index into cells
    std::vector<FitReport> fits;  // parallel to cells; empty report if failed

    const SelectionCell& best() const { return cells.at(winner); }
    const FitReport& best_fit() const { return fits.at(winner); }
    std::string to_tsv() const;
};

// Fits every (model, k, threshold) cell of the grid and ranks by BIC.
// Baseline models ignore the threshold axis and get one cell per k. Cells
// run concurrently (capped by HDDC_THREADS); the winner is the first cell
// in grid order attaining the minimal BIC, deterministic given cfg.seed.
inline SelectionReport select(const Matrix& data, const SelectionGrid& grid,
                              const EmConfig& cfg) {
    if (grid.models.empty()) throw InvalidInputError("select: no models");
    if (grid.k_min < 1 || grid.k_max < grid.k_min ||
        grid.k_max > data.rows())
        throw InvalidInputError("select: bad k range");
    if (grid.thresholds.empty())
        throw InvalidInputError("select: no thresholds");

    SelectionReport rep;
    for (const auto& model : grid.models) {
        for (int k = grid.k_min; k <= grid.k_max; ++k) {
            if (model.is_baseline()) {
                SelectionCell c;
                c.model = model;
                c.k = k;
                rep.cells.push_back(std::move(c));
            } else {
                for (double t : grid.thresholds) {
                    SelectionCell c;
                    c.model = model;
                    c.k = k;
                    c.threshold = t;
                    rep.cells.push_back(std::move(c));
                }
            }
        }
    }
    rep.fits.resize(rep.cells.size());

    parallel_for(static_cast<int>(rep.cells.size()), [&](int idx) {
        SelectionCell& c = rep.cells[idx];
        try {
            DimPolicy policy = c.model.is_baseline()
                                   ? DimPolicy{}
                                   : DimPolicy::scree(c.threshold);
            FitReport fit = fit_model(data, c.k, c.model, policy, cfg);
            c.dims = fit.dims;
            c.loglik = fit.loglik;
            c.nu = fit.nu;
            c.bic = fit.bic;
            c.ok = true;
            rep.fits[idx] = std::move(fit);
        } catch (const std::exception& e) {
            c.error = e.what();
        }
    });

    for (size_t i = 0; i < rep.cells.size(); ++i) {
        if (!rep.cells[i].ok) continue;
        if (rep.winner < 0 || rep.cells[i].bic < rep.cells[rep.winner].bic)
            rep.winner = static_cast<int>(i);
    }
    if (rep.winner < 0)
        throw SelectionFailedError("select: every grid cell failed to fit");
    return rep;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline std::string dims_string(const std::vector<int>& dims) {
    if (dims.empty()) return "-";
    std::string s;
    for (size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(dims[i]);
    }
    return s;
}

}  // namespace detail

inline std::string SelectionReport::to_tsv() const {
    std::ostringstream out;
    out << "model\tk\tt\tdims\tloglik\tnu\tbic\tstatus\n";
    for (const auto& c : cells) {
        out << model_name(c.model) << '\t' << c.k << '\t';
        if (std::isnan(c.threshold))
            out << '-';
        else
            out << detail::format_double(c.threshold);
        out << '\t' << detail::dims_string(c.dims) << '\t';
        if (c.ok) {
            out << detail::format_double(c.loglik) << '\t' << c.nu << '\t'
                << detail::format_double(c.bic) << '\t' << "ok";
        } else {
            out << "-\t-\t-\tfailed: " << c.error;
        }
        out << '\n';
    }
    if (winner >= 0) {
        const auto& w = cells[winner];
        out << "# winner\t" << model_name(w.model) << "\tk=" << w.k
            << "\tdims=" << detail::dims_string(w.dims)
            << "\tbic=" << detail::format_double(w.bic) << '\n';
    }
    return out.str();
}

}  // namespace hddc
