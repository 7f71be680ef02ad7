#pragma once

#include <cmath>
#include <vector>

#include "hddc/linalg.hpp"

namespace hddc {

// How intrinsic dimensions are chosen during fitting.
struct DimPolicy {
    enum class Kind { FixedPerClass, FixedCommon, ScreeFree, ScreeCommonViaBic };

    Kind kind = Kind::ScreeFree;
    std::vector<int> fixed_dims;  // FixedPerClass
    int fixed_d = 1;              // FixedCommon
    double threshold = 0.2;       // ScreeFree
    int d_min = 1;
    int d_max = -1;  // -1: p - 1

    static DimPolicy fixed_per_class(std::vector<int> dims) {
        DimPolicy p;
        p.kind = Kind::FixedPerClass;
        p.fixed_dims = std::move(dims);
        return p;
    }
    static DimPolicy fixed_common(int d) {
        DimPolicy p;
        p.kind = Kind::FixedCommon;
        p.fixed_d = d;
        return p;
    }
    static DimPolicy scree(double threshold) {
        DimPolicy p;
        p.kind = Kind::ScreeFree;
        p.threshold = threshold;
        return p;
    }
    static DimPolicy scree_common_via_bic() {
        DimPolicy p;
        p.kind = Kind::ScreeCommonViaBic;
        return p;
    }
};

// Cattell scree test on a descending eigenvalue vector. Differences between
// consecutive eigenvalues are normalized by the largest difference; the
// returned dimension is the last index whose normalized difference reaches
// the threshold, clamped to [d_min, d_max]. A flat scree falls back to d_min.
inline int scree_dimension(const Vector& eigenvalues, double threshold,
                           int d_min = 1, int d_max = -1) {
    const int m = static_cast<int>(eigenvalues.size());
    if (m < 2) throw InvalidInputError("scree_dimension: need >= 2 eigenvalues");
    if (!(threshold > 0.0) || !(threshold < 1.0))
        throw InvalidInputError("scree_dimension: threshold outside (0,1)");
    if (d_max < 0) d_max = m - 1;
    if (d_min < 1 || d_min > d_max)
        throw InvalidInputError("scree_dimension: bad [d_min, d_max]");

    Vector diffs = eigenvalues.head(m - 1) - eigenvalues.tail(m - 1);
    const double max_diff = diffs.maxCoeff();
    int d = d_min;
    if (max_diff > 0.0) {
        for (int j = m - 1; j >= 1; --j) {
            if (diffs(j - 1) / max_diff >= threshold) {
                d = j;
                break;
            }
        }
    }
    return std::clamp(d, d_min, d_max);
}

// BIC(m) = -2 log L + nu log n; smaller is better.
inline double bic(double loglik, long nu, long n) {
    if (n < 1) throw InvalidInputError("bic: n < 1");
    return -2.0 * loglik + static_cast<double>(nu) * std::log(static_cast<double>(n));
}

}  // namespace hddc
