#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hddc/em.hpp"
#include "hddc/synthgen.hpp"

namespace hddc {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

inline bool parse_int(const std::string& s, long& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtol(t.c_str(), &end, 10);
    return end == t.c_str() + t.size();
}

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

// Comma-separated numeric data, optional header (auto-detected by a
// non-numeric first row). label_col >= 0 selects a column of integer class
// labels; the remaining columns form the data matrix. Ragged rows and
// non-numeric cells are rejected with line/column diagnostics.
inline Dataset read_csv(const std::string& path, int label_col = -1) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    int line_no = 0;
    int expected_cols = -1;
    bool first_content = true;

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> cells = detail::split(line, ',');

        if (first_content) {
            first_content = false;
            bool all_numeric = true;
            double tmp;
            for (const auto& c : cells)
                if (!detail::parse_double(c, tmp)) {
                    all_numeric = false;
                    break;
                }
            expected_cols = static_cast<int>(cells.size());
            if (label_col >= expected_cols)
                throw InvalidInputError("label column " +
                                        std::to_string(label_col) +
                                        " out of range for " +
                                        std::to_string(expected_cols) +
                                        " columns");
            if (!all_numeric) continue;  // header row
        }
        if (static_cast<int>(cells.size()) != expected_cols)
            throw InvalidInputError(
                "line " + std::to_string(line_no) + ": has " +
                std::to_string(cells.size()) + " columns, expected " +
                std::to_string(expected_cols));

        std::vector<double> row;
        row.reserve(expected_cols);
        for (int c = 0; c < expected_cols; ++c) {
            if (c == label_col) {
                long l;
                if (!detail::parse_int(cells[c], l))
                    throw InvalidInputError(
                        "line " + std::to_string(line_no) + " column " +
                        std::to_string(c + 1) + ": not an integer label: '" +
                        detail::trim(cells[c]) + "'");
                labels.push_back(static_cast<int>(l));
            } else {
                double v;
                if (!detail::parse_double(cells[c], v))
                    throw InvalidInputError(
                        "line " + std::to_string(line_no) + " column " +
                        std::to_string(c + 1) + ": not numeric: '" +
                        detail::trim(cells[c]) + "'");
                row.push_back(v);
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidInputError("no data rows in " + path);

    Dataset out;
    out.x.resize(rows.size(), rows[0].size());
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c) out.x(r, c) = rows[r][c];
    out.labels = std::move(labels);
    out.has_labels = label_col >= 0;
    return out;
}

// Writes values with round-trip precision; the label column, when present,
// goes last.
inline void write_csv(const std::string& path, const Dataset& data,
                      std::vector<std::string> header = {}) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    const Eigen::Index p = data.x.cols();
    if (header.empty()) {
        for (Eigen::Index c = 0; c < p; ++c)
            header.push_back("x" + std::to_string(c + 1));
        if (data.has_labels) header.push_back("label");
    }
    for (size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << '\n';
    for (Eigen::Index r = 0; r < data.x.rows(); ++r) {
        for (Eigen::Index c = 0; c < p; ++c)
            out << (c ? "," : "") << detail::format_g17(data.x(r, c));
        if (data.has_labels) out << ',' << data.labels[r];
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Simulation spec files: key = value lines, one [class] section per class
// ---------------------------------------------------------------------------

inline std::variant<SimSpec, FullRankSpec> read_spec_file(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spec file: " + path);

    std::string kind = "subspace";
    SimSpec sim;
    FullRankSpec full;
    long k_declared = -1;
    bool in_class = false;
    ClassSpec cur;
    std::string cur_a;
    std::string line;
    int line_no = 0;

    auto flush_class = [&]() {
        if (!in_class) return;
        if (cur_a.empty())
            throw InvalidInputError("class section missing 'a'");
        std::vector<std::string> parts = detail::split(cur_a, ',');
        if (static_cast<int>(parts.size()) == cur.d) {
            cur.a.resize(cur.d);
            for (int j = 0; j < cur.d; ++j) {
                double v;
                if (!detail::parse_double(parts[j], v))
                    throw InvalidInputError("bad value in 'a': " + parts[j]);
                cur.a(j) = v;
            }
        } else if (parts.size() == 1) {
            double v;
            if (!detail::parse_double(parts[0], v))
                throw InvalidInputError("bad value in 'a': " + parts[0]);
            cur.a = Vector::Constant(cur.d, v);
        } else {
            throw InvalidInputError("'a' needs 1 or d values");
        }
        sim.classes.push_back(cur);
        cur = ClassSpec{};
        cur_a.clear();
    };

    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line == "[class]") {
            flush_class();
            in_class = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInputError("spec line " + std::to_string(line_no) +
                                    ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        auto as_long = [&]() {
            long v;
            if (!detail::parse_int(value, v))
                throw InvalidInputError("spec line " + std::to_string(line_no) +
                                        ": bad integer '" + value + "'");
            return v;
        };
        auto as_double = [&]() {
            double v;
            if (!detail::parse_double(value, v))
                throw InvalidInputError("spec line " + std::to_string(line_no) +
                                        ": bad number '" + value + "'");
            return v;
        };

        if (in_class) {
            if (key == "pi") cur.pi = as_double();
            else if (key == "d") cur.d = static_cast<int>(as_long());
            else if (key == "a") cur_a = value;
            else if (key == "b") cur.b = as_double();
            else
                throw InvalidInputError("spec line " + std::to_string(line_no) +
                                        ": unknown class key '" + key + "'");
            continue;
        }
        if (key == "kind") kind = value;
        else if (key == "n") sim.n = full.n = as_long();
        else if (key == "p") sim.p = full.p = static_cast<int>(as_long());
        else if (key == "k") k_declared = as_long();
        else if (key == "seed")
            sim.seed = full.seed = static_cast<std::uint64_t>(as_long());
        else if (key == "mean_radius")
            sim.mean_radius = full.mean_radius = as_double();
        else if (key == "condition_number") full.condition_number = as_double();
        else if (key == "shared_orientation")
            sim.shared_orientation = (value == "true" || value == "1");
        else
            throw InvalidInputError("spec line " + std::to_string(line_no) +
                                    ": unknown key '" + key + "'");
    }
    flush_class();

    if (kind == "full_rank") {
        full.k = static_cast<int>(k_declared);
        if (full.k < 1)
            throw InvalidInputError("full_rank spec needs k >= 1");
        return full;
    }
    if (kind != "subspace")
        throw InvalidInputError("unknown spec kind '" + kind + "'");
    sim.k = static_cast<int>(sim.classes.size());
    if (k_declared >= 0 && k_declared != sim.k)
        throw InvalidInputError("declared k does not match class sections");
    return sim;
}

// ---------------------------------------------------------------------------
// Model files (versioned JSON, field order fixed, round-trip exact doubles)
// ---------------------------------------------------------------------------

constexpr int kModelFileVersion = 1;

struct LoadedModel {
    int format_version = kModelFileVersion;
    ModelKind model;
    std::variant<MixtureParams, BaselineParams> params;
    double loglik = std::numeric_limits<double>::quiet_NaN();
    double bic = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;

    const MixtureParams& mixture() const {
        return std::get<MixtureParams>(params);
    }
    const BaselineParams& baseline() const {
        return std::get<BaselineParams>(params);
    }
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson vector_json(const Vector& v) {
    ojson a = ojson::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline ojson matrix_cols_json(const Matrix& m) {
    ojson cols = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        cols.push_back(vector_json(m.col(j)));
    return cols;
}

inline Vector vector_from_json(const ojson& a) {
    Vector v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
    return v;
}

inline Matrix matrix_from_cols_json(const ojson& cols, int rows) {
    Matrix m(rows, cols.size());
    for (size_t j = 0; j < cols.size(); ++j)
        m.col(j) = vector_from_json(cols[j]);
    return m;
}

}  // namespace detail

inline void save_model(const std::string& path, const FitReport& report) {
    using detail::ojson;
    ojson doc;
    doc["format_version"] = kModelFileVersion;
    doc["model"] = model_name(report.model);

    ojson comps = ojson::array();
    if (std::holds_alternative<MixtureParams>(report.params)) {
        const MixtureParams& mp = report.mixture();
        doc["k"] = mp.k;
        doc["p"] = mp.p;
        for (const auto& c : mp.comps) {
            ojson jc;
            jc["pi"] = c.pi;
            jc["mu"] = detail::vector_json(c.mu);
            jc["d"] = c.d();
            jc["q"] = detail::matrix_cols_json(c.q_tilde);
            jc["a"] = detail::vector_json(c.a);
            jc["b"] = c.b;
            comps.push_back(std::move(jc));
        }
    } else {
        const BaselineParams& bp = report.baseline();
        doc["k"] = bp.k;
        doc["p"] = bp.p;
        for (int i = 0; i < bp.k; ++i) {
            ojson jc;
            jc["pi"] = bp.pi[i];
            jc["mu"] = detail::vector_json(bp.mu[i]);
            switch (bp.kind) {
                case BaselineKind::Full:
                    jc["cov"] = detail::matrix_cols_json(bp.cov[i]);
                    break;
                case BaselineKind::Diag:
                    jc["var"] = detail::vector_json(bp.diag_var[i]);
                    break;
                case BaselineKind::Sphe:
                    jc["var"] = bp.sphe_var[i];
                    break;
                case BaselineKind::Com:
                    break;
            }
            comps.push_back(std::move(jc));
        }
        if (bp.kind == BaselineKind::Com)
            doc["shared_cov"] = detail::matrix_cols_json(bp.cov[0]);
    }
    doc["components"] = std::move(comps);
    doc["metadata"] = {{"loglik", report.loglik},
                       {"bic", report.bic},
                       {"seed", report.seed}};

    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file: " + path);
    out << doc.dump(2) << '\n';
}

inline LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    detail::ojson doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw InvalidInputError(std::string("model file parse error: ") +
                                e.what());
    }
    LoadedModel out;
    try {
        out.format_version = doc.at("format_version").get<int>();
        if (out.format_version != kModelFileVersion)
            throw InvalidInputError("unsupported model file version");
        out.model = parse_model(doc.at("model").get<std::string>());
        const int k = doc.at("k").get<int>();
        const int p = doc.at("p").get<int>();
        const auto& comps = doc.at("components");
        if (static_cast<int>(comps.size()) != k)
            throw InvalidInputError("model file: component count mismatch");

        if (out.model.is_baseline()) {
            BaselineParams bp;
            bp.kind = out.model.baseline_kind;
            bp.k = k;
            bp.p = p;
            for (const auto& jc : comps) {
                bp.pi.push_back(jc.at("pi").get<double>());
                bp.mu.push_back(detail::vector_from_json(jc.at("mu")));
                switch (bp.kind) {
                    case BaselineKind::Full:
                        bp.cov.push_back(
                            detail::matrix_from_cols_json(jc.at("cov"), p));
                        break;
                    case BaselineKind::Diag:
                        bp.diag_var.push_back(
                            detail::vector_from_json(jc.at("var")));
                        break;
                    case BaselineKind::Sphe:
                        bp.sphe_var.push_back(jc.at("var").get<double>());
                        break;
                    case BaselineKind::Com:
                        break;
                }
            }
            if (bp.kind == BaselineKind::Com)
                bp.cov.push_back(
                    detail::matrix_from_cols_json(doc.at("shared_cov"), p));
            out.params = std::move(bp);
        } else {
            MixtureParams mp;
            mp.k = k;
            mp.p = p;
            for (const auto& jc : comps) {
                ComponentParams c;
                c.pi = jc.at("pi").get<double>();
                c.mu = detail::vector_from_json(jc.at("mu"));
                c.q_tilde = detail::matrix_from_cols_json(jc.at("q"), p);
                c.a = detail::vector_from_json(jc.at("a"));
                c.b = jc.at("b").get<double>();
                if (c.d() != jc.at("d").get<int>())
                    throw InvalidInputError("model file: d mismatch");
                mp.comps.push_back(std::move(c));
            }
            out.params = std::move(mp);
        }
        const auto& meta = doc.at("metadata");
        out.loglik = meta.at("loglik").get<double>();
        out.bic = meta.at("bic").get<double>();
        out.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const InvalidInputError&) {
        throw;
    } catch (const std::exception& e) {
        throw InvalidInputError(std::string("model file malformed: ") +
                                e.what());
    }
    return out;
}

}  // namespace hddc
