#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <vector>

#include "hddc/model.hpp"

namespace hddc {

struct ConfusionMatrix {
    Eigen::MatrixXi counts;      // k_true x k_pred
    std::vector<int> true_ids;   // original label per row
    std::vector<int> pred_ids;   // original label per column
    std::string to_tsv() const;
};

struct RecognitionResult {
    double rate = 0.0;
    // matching[c] = true-class column matched to predicted cluster c, or -1.
    std::vector<int> matching;
};

namespace detail {

inline std::vector<int> compress_labels(const std::vector<int>& labels,
                                        std::vector<int>& ids) {
    std::map<int, int> index;
    for (int l : labels) index.emplace(l, 0);
    ids.clear();
    for (auto& [label, idx] : index) {
        idx = static_cast<int>(ids.size());
        ids.push_back(label);
    }
    std::vector<int> out(labels.size());
    for (size_t j = 0; j < labels.size(); ++j) out[j] = index[labels[j]];
    return out;
}

// Exhaustive maximum over injective matchings from the smaller label side.
inline long match_exhaustive(const Eigen::MatrixXi& counts,
                             std::vector<int>& pred_to_true) {
    const int kt = static_cast<int>(counts.rows());
    const int kp = static_cast<int>(counts.cols());
    const bool inject_pred = kp <= kt;  // injection from the smaller side
    const int big = std::max(kt, kp), small = std::min(kt, kp);
    std::vector<int> perm(big);
    std::iota(perm.begin(), perm.end(), 0);
    long best = -1;
    std::vector<int> best_map(small, -1);
    do {
        long total = 0;
        for (int s = 0; s < small; ++s)
            total += inject_pred ? counts(perm[s], s) : counts(s, perm[s]);
        if (total > best) {
            best = total;
            for (int s = 0; s < small; ++s) best_map[s] = perm[s];
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    pred_to_true.assign(kp, -1);
    if (inject_pred) {
        for (int c = 0; c < kp; ++c) pred_to_true[c] = best_map[c];
    } else {
        for (int r = 0; r < kt; ++r) pred_to_true[best_map[r]] = r;
    }
    return best;
}

// O(n^3) optimal assignment (Jonker/Volgenant-style potentials) minimizing
// cost over a square matrix; used beyond the exhaustive regime.
inline std::vector<int> solve_assignment_min(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match_col(n + 1, 0);  // column -> row (1-based)
    std::vector<int> way(n + 1, 0);
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= n; ++i) {
        match_col[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = match_col[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match_col[j0] != 0);
        do {
            const int j1 = way[j0];
            match_col[j0] = match_col[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (match_col[j] > 0) row_to_col[match_col[j] - 1] = j - 1;
    return row_to_col;
}

// Assignment-algorithm path on the padded square count matrix.
inline long match_assignment(const Eigen::MatrixXi& counts,
                             std::vector<int>& pred_to_true) {
    const int kt = static_cast<int>(counts.rows());
    const int kp = static_cast<int>(counts.cols());
    const int n = std::max(kt, kp);
    const double max_count = counts.maxCoeff();
    Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(n, n, max_count);
    cost.topLeftCorner(kt, kp) =
        (max_count - counts.cast<double>().array()).matrix();
    std::vector<int> true_to_pred = detail::solve_assignment_min(cost);
    pred_to_true.assign(kp, -1);
    long total = 0;
    for (int r = 0; r < kt; ++r) {
        const int c = true_to_pred[r];
        if (c < kp) {
            pred_to_true[c] = r;
            total += counts(r, c);
        }
    }
    return total;
}

}  // namespace detail

inline ConfusionMatrix confusion_matrix(const std::vector<int>& true_labels,
                                        const std::vector<int>& pred_labels) {
    if (true_labels.size() != pred_labels.size())
        throw InvalidInputError("confusion_matrix: length mismatch");
    ConfusionMatrix cm;
    std::vector<int> t = detail::compress_labels(true_labels, cm.true_ids);
    std::vector<int> p = detail::compress_labels(pred_labels, cm.pred_ids);
    cm.counts = Eigen::MatrixXi::Zero(cm.true_ids.size(), cm.pred_ids.size());
    for (size_t j = 0; j < t.size(); ++j) ++cm.counts(t[j], p[j]);
    return cm;
}

inline std::string ConfusionMatrix::to_tsv() const {
    std::ostringstream out;
    out << "true\\pred";
    for (int id : pred_ids) out << '\t' << id;
    out << '\n';
    for (Eigen::Index r = 0; r < counts.rows(); ++r) {
        out << true_ids[r];
        for (Eigen::Index c = 0; c < counts.cols(); ++c)
            out << '\t' << counts(r, c);
        out << '\n';
    }
    return out.str();
}

// Clustering accuracy maximized over injective cluster-to-class matchings;
// exhaustive for min(k_true, k_pred) <= 8, optimal assignment beyond.
inline RecognitionResult recognition_rate(const std::vector<int>& true_labels,
                                          const std::vector<int>& pred_labels) {
    if (true_labels.size() != pred_labels.size())
        throw InvalidInputError("recognition_rate: length mismatch");
    if (true_labels.empty())
        throw InvalidInputError("recognition_rate: empty labels");
    ConfusionMatrix cm = confusion_matrix(true_labels, pred_labels);

    RecognitionResult res;
    std::vector<int> pred_to_true;
    const long matched =
        std::max(cm.counts.rows(), cm.counts.cols()) <= 8
            ? detail::match_exhaustive(cm.counts, pred_to_true)
            : detail::match_assignment(cm.counts, pred_to_true);
    res.rate = static_cast<double>(matched) /
               static_cast<double>(true_labels.size());
    // report the matching in terms of the original label alphabets
    res.matching.assign(pred_to_true.size(), -1);
    for (size_t c = 0; c < pred_to_true.size(); ++c)
        if (pred_to_true[c] >= 0)
            res.matching[c] = cm.true_ids[pred_to_true[c]];
    return res;
}

// a_i1 / b_i, the condition number of the component's modeled covariance.
inline double condition_ratio(const MixtureParams& params, int component) {
    if (component < 0 || component >= params.k)
        throw InvalidInputError("condition_ratio: component out of range");
    const auto& c = params.comps[component];
    return c.a(0) / c.b;
}

// Largest over smallest eigenvalue of a covariance matrix.
inline double empirical_condition_number(const Matrix& cov) {
    EigenPairs eig = eig_desc(cov);
    const double lo = eig.values(eig.values.size() - 1);
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return eig.values(0) / lo;
}

}  // namespace hddc
