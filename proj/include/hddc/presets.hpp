#pragma once

#include "hddc/synthgen.hpp"

namespace hddc {

// Three subspace-Gaussian groups with intrinsic dimensions {2, 5, 10},
// proportions {0.4, 0.3, 0.3}, subspace variances {150, 100, 75} and common
// noise level 15; the standard benchmark design used across the suites.
inline SimSpec three_group_preset(int p, long n, std::uint64_t seed) {
    if (p < 11) throw InvalidInputError("three_group_preset: need p >= 11");
    SimSpec spec;
    spec.k = 3;
    spec.p = p;
    spec.n = n;
    spec.seed = seed;
    const double pis[3] = {0.4, 0.3, 0.3};
    const int dims[3] = {2, 5, 10};
    const double as[3] = {150.0, 100.0, 75.0};
    for (int i = 0; i < 3; ++i) {
        ClassSpec c;
        c.pi = pis[i];
        c.d = dims[i];
        c.a = Vector::Constant(dims[i], as[i]);
        c.b = 15.0;
        spec.classes.push_back(std::move(c));
    }
    return spec;
}

// Three full-rank Gaussian groups sharing a condition number.
inline FullRankSpec full_rank_preset(int p, long n, double condition_number,
                                     std::uint64_t seed) {
    FullRankSpec spec;
    spec.k = 3;
    spec.p = p;
    spec.n = n;
    spec.condition_number = condition_number;
    spec.seed = seed;
    return spec;
}

}  // namespace hddc
