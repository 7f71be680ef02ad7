#pragma once

#include <random>
#include <variant>

#include "hddc/em.hpp"

namespace hddc {

// Observations with optional ground-truth labels.
struct Dataset {
    Matrix x;
    std::vector<int> labels;
    bool has_labels = false;
};

struct ClassSpec {
    double pi = 0.0;
    int d = 1;
    Vector a;        // subspace eigenvalues; scalar specs replicate
    double b = 0.0;  // noise level
};

// Subspace-Gaussian simulation design. Class means are drawn on a sphere of
// radius mean_radius (default: sqrt of the mean noise level).
struct SimSpec {
    int k = 0;
    int p = 0;
    long n = 0;
    std::vector<ClassSpec> classes;
    bool shared_orientation = false;
    double mean_radius = -1.0;  // < 0: sqrt(mean b)
    std::uint64_t seed = 0;
};

// Full-rank Gaussian design: every class covariance has the exact eigenvalue
// ratio condition_number, interior eigenvalues log-uniform. Means are drawn
// on a sphere of radius mean_radius (default: sqrt(condition_number)).
struct FullRankSpec {
    int k = 0;
    int p = 0;
    long n = 0;
    double condition_number = 1.0;
    double mean_radius = -1.0;
    std::uint64_t seed = 0;
};

namespace detail {

inline Vector gaussian_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
}

// Haar-distributed p x d orthonormal frame: QR of a Gaussian matrix with the
// R diagonal forced positive.
inline Matrix random_orientation_rng(int p, int d, std::mt19937_64& rng) {
    if (d < 1 || d > p) throw InvalidInputError("random_orientation: d > p");
    Matrix g(p, d);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < p; ++i) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(p, d);
    Matrix r = q.transpose() * g;
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

inline int draw_class(const std::vector<double>& pi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double acc = 0.0;
    for (size_t i = 0; i < pi.size(); ++i) {
        acc += pi[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(pi.size()) - 1;
}

inline void check_sim_spec(const SimSpec& spec) {
    if (spec.k < 1 || static_cast<int>(spec.classes.size()) != spec.k)
        throw InvalidInputError("simulate: class specs do not match k");
    if (spec.p < 2 || spec.n < 1) throw InvalidInputError("simulate: bad n or p");
    double pi_sum = 0.0;
    for (const auto& c : spec.classes) {
        pi_sum += c.pi;
        if (c.pi < 0.0) throw InvalidInputError("simulate: negative proportion");
        if (c.d < 1 || c.d > spec.p - 1)
            throw InvalidInputError("simulate: d outside [1, p-1]");
        if (c.a.size() != c.d)
            throw InvalidInputError("simulate: a length != d");
        if (!(c.b > 0.0)) throw InvalidInputError("simulate: b must be positive");
        for (int j = 0; j < c.d; ++j) {
            if (!(c.a(j) > c.b))
                throw InvalidInputError("simulate: need a > b");
            if (j + 1 < c.d && c.a(j) < c.a(j + 1))
                throw InvalidInputError("simulate: a not descending");
        }
    }
    if (std::abs(pi_sum - 1.0) > 1e-9)
        throw InvalidInputError("simulate: proportions do not sum to 1");
}

}  // namespace detail

inline Matrix random_orientation(int p, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return detail::random_orientation_rng(p, d, rng);
}

// Simulation output plus the generating quantities, for oracle checks.
struct SimDraw {
    Dataset data;
    std::vector<Matrix> orientations;
    std::vector<Vector> means;
};

// Draw from the subspace-Gaussian design. Sampling uses the spectral factor
// (q_tilde, sqrt a, sqrt b) directly; no dense p x p covariance is formed.
inline SimDraw simulate_draw(const SimSpec& spec) {
    detail::check_sim_spec(spec);
    std::mt19937_64 rng(spec.seed);

    std::vector<Matrix> orient(spec.k);
    Matrix shared;
    if (spec.shared_orientation) {
        int d_max = 0;
        for (const auto& c : spec.classes) d_max = std::max(d_max, c.d);
        shared = detail::random_orientation_rng(spec.p, d_max, rng);
    }
    for (int i = 0; i < spec.k; ++i)
        orient[i] = spec.shared_orientation
                        ? Matrix(shared.leftCols(spec.classes[i].d))
                        : detail::random_orientation_rng(spec.p,
                                                         spec.classes[i].d, rng);

    double b_mean = 0.0;
    std::vector<double> pi(spec.k);
    for (int i = 0; i < spec.k; ++i) {
        b_mean += spec.classes[i].b / spec.k;
        pi[i] = spec.classes[i].pi;
    }
    const double radius =
        spec.mean_radius >= 0.0 ? spec.mean_radius : std::sqrt(b_mean);

    std::vector<Vector> means(spec.k);
    for (int i = 0; i < spec.k; ++i) {
        Vector dir = detail::gaussian_vector(spec.p, rng);
        const double norm = dir.norm();
        means[i] = norm > 0.0 ? Vector(radius * dir / norm)
                              : Vector(Vector::Zero(spec.p));
    }

    SimDraw out;
    out.data.x.resize(spec.n, spec.p);
    out.data.labels.resize(spec.n);
    out.data.has_labels = true;
    for (long j = 0; j < spec.n; ++j) {
        const int c = detail::draw_class(pi, rng);
        const auto& cls = spec.classes[c];
        Vector eta = detail::gaussian_vector(cls.d, rng);
        Vector zeta = detail::gaussian_vector(spec.p, rng);
        Vector noise = zeta - orient[c] * (orient[c].transpose() * zeta);
        out.data.x.row(j) =
            (means[c] +
             orient[c] * (cls.a.array().sqrt() * eta.array()).matrix() +
             std::sqrt(cls.b) * noise)
                .transpose();
        out.data.labels[j] = c;
    }
    out.orientations = std::move(orient);
    out.means = std::move(means);
    return out;
}

inline Dataset simulate(const SimSpec& spec) {
    return simulate_draw(spec).data;
}

struct FullRankDraw {
    Dataset data;
    std::vector<Matrix> factors;  // class covariance = factor * factor^t
    std::vector<Vector> means;
};

inline FullRankDraw simulate_full_rank_draw(const FullRankSpec& spec) {
    if (spec.k < 1 || spec.p < 2 || spec.n < 1)
        throw InvalidInputError("simulate_full_rank: bad k, p or n");
    if (!(spec.condition_number >= 1.0))
        throw InvalidInputError("simulate_full_rank: condition number < 1");
    std::mt19937_64 rng(spec.seed);

    const double radius = spec.mean_radius >= 0.0
                              ? spec.mean_radius
                              : std::sqrt(spec.condition_number);

    std::vector<Matrix> factor(spec.k);
    std::vector<Vector> means(spec.k);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < spec.k; ++i) {
        Vector eig(spec.p);
        eig(0) = spec.condition_number;
        eig(spec.p - 1) = 1.0;
        for (int j = 1; j < spec.p - 1; ++j)
            eig(j) = std::exp(unit(rng) * std::log(spec.condition_number));
        std::sort(eig.data() + 1, eig.data() + spec.p - 1,
                  std::greater<double>());
        Matrix q = detail::random_orientation_rng(spec.p, spec.p, rng);
        factor[i] = q * eig.array().sqrt().matrix().asDiagonal();

        Vector dir = detail::gaussian_vector(spec.p, rng);
        const double norm = dir.norm();
        means[i] = norm > 0.0 ? Vector(radius * dir / norm)
                              : Vector(Vector::Zero(spec.p));
    }

    std::vector<double> pi(spec.k, 1.0 / spec.k);
    FullRankDraw out;
    out.data.x.resize(spec.n, spec.p);
    out.data.labels.resize(spec.n);
    out.data.has_labels = true;
    for (long j = 0; j < spec.n; ++j) {
        const int c = detail::draw_class(pi, rng);
        Vector zeta = detail::gaussian_vector(spec.p, rng);
        out.data.x.row(j) = (means[c] + factor[c] * zeta).transpose();
        out.data.labels[j] = c;
    }
    out.factors = std::move(factor);
    out.means = std::move(means);
    return out;
}

inline Dataset simulate_full_rank(const FullRankSpec& spec) {
    return simulate_full_rank_draw(spec).data;
}

// The exact class covariance a simulation spec encodes, for test oracles.
inline Matrix sim_class_covariance(const SimSpec& spec, int cls,
                                   const Matrix& orientation) {
    const auto& c = spec.classes.at(cls);
    const int p = spec.p;
    return orientation * c.a.asDiagonal() * orientation.transpose() +
           c.b * (Matrix::Identity(p, p) -
                  orientation * orientation.transpose());
}

}  // namespace hddc
