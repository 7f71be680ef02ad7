#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "hddc/dimension.hpp"
#include "hddc/model.hpp"

namespace hddc {

// n x k posterior membership probabilities; rows sum to 1.
using Responsibilities = Matrix;

enum class InitKind { RandomPartition, KMeansSeeded };

struct EmConfig {
    int max_iters = 500;
    double rel_tol = 1e-7;  // on relative log-likelihood change
    int inner_max_iters = 100;
    double inner_tol = 1e-8;
    double min_component_weight = -1.0;  // < 0: 1e-6 * n
    double b_floor = 1e-10;
    std::uint64_t seed = 0;
    int n_restarts = 10;
    InitKind init_kind = InitKind::RandomPartition;
    double ridge_scale = 1e-6;  // reference-mixture covariance ridge
    int gram_threshold = -1;    // Gram path when ceil(sum w) < this; < 0: p

    double effective_min_weight(Eigen::Index n) const {
        return min_component_weight >= 0.0 ? min_component_weight : 1e-6 * n;
    }
};

struct FitReport {
    ModelKind model;
    std::variant<MixtureParams, BaselineParams> params;
    std::vector<double> loglik_trace;
    int n_iters = 0;
    bool converged = false;
    bool inner_converged = true;  // common-orientation fixed point
    double loglik = std::numeric_limits<double>::quiet_NaN();
    long nu = 0;
    double bic = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> dims;
    std::vector<int> assignments;
    Responsibilities responsibilities;
    int restart_index = -1;
    std::uint64_t seed = 0;

    const MixtureParams& mixture() const {
        return std::get<MixtureParams>(params);
    }
    const BaselineParams& baseline() const {
        return std::get<BaselineParams>(params);
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, int stream) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cost function and E step
// ---------------------------------------------------------------------------

// K_i(x) = -2 log(pi_i phi(x; mu_i, Sigma_i)) - p log(2 pi), evaluated from
// the retained orientation columns only; no p x p inverse is ever formed.
inline Matrix cost_matrix(const MixtureParams& params, const Matrix& data) {
    const Eigen::Index n = data.rows(), p = data.cols();
    if (p != params.p) throw InvalidInputError("cost_matrix: dimension mismatch");
    Matrix cost(n, params.k);
    for (int i = 0; i < params.k; ++i) {
        const auto& c = params.comps[i];
        Matrix centered = data.rowwise() - c.mu.transpose();
        Matrix z = centered * c.q_tilde;  // n x d
        Vector in_subspace =
            z.array().square().matrix() * c.a.cwiseInverse();
        Vector residual = (centered.rowwise().squaredNorm() -
                           z.rowwise().squaredNorm())
                              .cwiseMax(0.0);
        const double log_det = c.a.array().log().sum() +
                               (p - c.d()) * std::log(c.b);
        cost.col(i) = in_subspace + residual / c.b +
                      Vector::Constant(n, log_det - 2.0 * std::log(c.pi));
        if (!cost.col(i).allFinite())
            throw NumericalError("cost_matrix: non-finite cost for component " +
                                 std::to_string(i));
    }
    return cost;
}

inline double cost_K(const MixtureParams& params, int component,
                     const Vector& x) {
    if (component < 0 || component >= params.k)
        throw InvalidInputError("cost_K: component index out of range");
    Matrix row = cost_matrix(params, x.transpose());
    return row(0, component);
}

struct EStepResult {
    Responsibilities t;
    double loglik = 0.0;
};

namespace detail {

// Posteriors and observed-data log-likelihood from a cost matrix. Costs are
// shifted by the row minimum before exponentiation.
inline EStepResult posteriors_from_cost(const Matrix& cost, Eigen::Index p) {
    const Eigen::Index n = cost.rows();
    EStepResult out;
    out.t.resize(n, cost.cols());
    double loglik = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double kmin = cost.row(j).minCoeff();
        Eigen::ArrayXd u = (-(cost.row(j).array() - kmin) / 2.0).exp();
        const double total = u.sum();
        out.t.row(j) = (u / total).matrix();
        loglik += -kmin / 2.0 + std::log(total);
    }
    constexpr double log_2pi = 1.8378770664093454836;
    out.loglik = loglik - 0.5 * static_cast<double>(n * p) * log_2pi;
    return out;
}

}  // namespace detail

inline EStepResult e_step(const MixtureParams& params, const Matrix& data) {
    return detail::posteriors_from_cost(cost_matrix(params, data), data.cols());
}

inline double log_likelihood(const MixtureParams& params, const Matrix& data) {
    return e_step(params, data).loglik;
}

// Expected complete-data log-likelihood sum_ij t_ij log(pi_i phi_i(x_j)),
// evaluated through the inverse-free cost matrix.
inline double expected_complete_loglik(const MixtureParams& params,
                                       const Matrix& data,
                                       const Responsibilities& resp) {
    Matrix cost = cost_matrix(params, data);
    constexpr double log_2pi = 1.8378770664093454836;
    return -0.5 * ((resp.array() * cost.array()).sum() +
                   static_cast<double>(data.rows() * data.cols()) * log_2pi);
}

// Hard assignments (argmin of K, ties to the lowest index) plus posteriors.
inline std::pair<std::vector<int>, Responsibilities> predict(
    const MixtureParams& params, const Matrix& data) {
    Matrix cost = cost_matrix(params, data);
    EStepResult es = detail::posteriors_from_cost(cost, data.cols());
    std::vector<int> assign(data.rows());
    for (Eigen::Index j = 0; j < data.rows(); ++j) {
        int best = 0;
        for (int i = 1; i < params.k; ++i)
            if (cost(j, i) < cost(j, best)) best = i;
        assign[j] = best;
    }
    return {std::move(assign), std::move(es.t)};
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

namespace detail {

inline Responsibilities hard_partition(const std::vector<int>& labels, int k) {
    Responsibilities t = Matrix::Zero(labels.size(), k);
    for (size_t j = 0; j < labels.size(); ++j) t(j, labels[j]) = 1.0;
    return t;
}

// Reassign random points until every class is non-empty.
inline void enforce_nonempty(std::vector<int>& labels, int k,
                             std::mt19937_64& rng) {
    const int n = static_cast<int>(labels.size());
    std::vector<int> counts(k, 0);
    for (int l : labels) ++counts[l];
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int e = 0; e < k; ++e) {
        while (counts[e] == 0) {
            const int j = pick(rng);
            if (counts[labels[j]] >= 2) {
                --counts[labels[j]];
                labels[j] = e;
                ++counts[e];
            }
        }
    }
}

inline std::vector<int> kmeans_partition(const Matrix& data, int k,
                                         std::mt19937_64& rng) {
    const Eigen::Index n = data.rows();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, static_cast<int>(n) - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    Matrix centers(k, data.cols());
    for (int i = 0; i < k; ++i) centers.row(i) = data.row(idx[i]);

    std::vector<int> labels(n, 0);
    for (int iter = 0; iter < 20; ++iter) {
        for (Eigen::Index j = 0; j < n; ++j) {
            int best = 0;
            double best_d = (data.row(j) - centers.row(0)).squaredNorm();
            for (int i = 1; i < k; ++i) {
                const double d = (data.row(j) - centers.row(i)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            labels[j] = best;
        }
        Matrix next = Matrix::Zero(k, data.cols());
        std::vector<int> counts(k, 0);
        for (Eigen::Index j = 0; j < n; ++j) {
            next.row(labels[j]) += data.row(j);
            ++counts[labels[j]];
        }
        for (int i = 0; i < k; ++i) {
            if (counts[i] > 0) {
                centers.row(i) = next.row(i) / counts[i];
            } else {
                // reseed an empty cluster to the point farthest from its center
                Eigen::Index far = 0;
                double far_d = -1.0;
                for (Eigen::Index j = 0; j < n; ++j) {
                    const double d =
                        (data.row(j) - centers.row(labels[j])).squaredNorm();
                    if (d > far_d) {
                        far_d = d;
                        far = j;
                    }
                }
                centers.row(i) = data.row(far);
            }
        }
    }
    return labels;
}

}  // namespace detail

// Hard initial partition with every component non-empty; deterministic
// given cfg.seed.
inline Responsibilities init_responsibilities(const Matrix& data, int k,
                                              const EmConfig& cfg) {
    const Eigen::Index n = data.rows();
    if (k < 1 || n < k) throw InvalidInputError("init_responsibilities: n < k");
    std::mt19937_64 rng(cfg.seed);
    std::vector<int> labels(n);
    if (cfg.init_kind == InitKind::RandomPartition) {
        std::uniform_int_distribution<int> pick(0, k - 1);
        for (Eigen::Index j = 0; j < n; ++j) labels[j] = pick(rng);
    } else {
        labels = detail::kmeans_partition(data, k, rng);
    }
    detail::enforce_nonempty(labels, k, rng);
    return detail::hard_partition(labels, k);
}

// ---------------------------------------------------------------------------
// M step
// ---------------------------------------------------------------------------

namespace detail {

struct ClassMoments {
    double n_i = 0.0;
    Vector mu;
    double trace = 0.0;  // Tr(W_i)
    Vector lambda;       // length p, descending, zero-padded past the rank
    Matrix vectors;      // leading eigenvectors of W_i (p x m_avail)
    Matrix w;            // dense scatter, only when requested
    bool has_dense = false;
};

// Per-class weighted moments and scatter spectra. The Gram path is taken for
// a class when its effective sample count is below the threshold and fewer
// centered rows than dimensions contribute; min_vectors forces the direct
// path when more eigenvectors are needed than the Gram solve can deliver.
inline std::vector<ClassMoments> compute_moments(const Matrix& data,
                                                 const Responsibilities& resp,
                                                 const EmConfig& cfg,
                                                 bool need_dense,
                                                 int min_vectors) {
    const Eigen::Index n = data.rows(), p = data.cols();
    const int k = static_cast<int>(resp.cols());
    if (resp.rows() != n) throw InvalidInputError("m_step: resp rows != n");
    const double min_w = cfg.effective_min_weight(n);
    const int gram_below = cfg.gram_threshold >= 0 ? cfg.gram_threshold
                                                   : static_cast<int>(p);

    std::vector<ClassMoments> out(k);
    for (int i = 0; i < k; ++i) {
        ClassMoments& m = out[i];
        Vector w = resp.col(i);
        m.n_i = w.sum();
        if (!(m.n_i > 0.0) || m.n_i < min_w)
            throw DegenerateClusterError("component " + std::to_string(i) +
                                         " weight " + std::to_string(m.n_i) +
                                         " below minimum");
        m.mu = data.transpose() * w / m.n_i;
        Matrix centered = data.rowwise() - m.mu.transpose();
        m.trace = (centered.rowwise().squaredNorm().array() * w.array()).sum() /
                  m.n_i;

        const Eigen::Index n_eff = (w.array() > 0.0).count();
        const bool gram_ok = !need_dense && n_eff < p &&
                             std::ceil(m.n_i) < gram_below &&
                             static_cast<Eigen::Index>(min_vectors) <= n_eff;
        if (gram_ok) {
            CenteredDesign design = make_centered_design(data, w, m.mu);
            const int m_avail = static_cast<int>(std::min(n_eff, p));
            EigenPairs pairs = gram_top_eig(design, m_avail);
            m.lambda = Vector::Zero(p);
            m.lambda.head(m_avail) = pairs.values;
            m.vectors = std::move(pairs.vectors);
        } else {
            m.w = weighted_scatter(data, w, m.mu);
            m.has_dense = true;
            EigenPairs pairs = eig_desc(m.w);
            m.lambda = std::move(pairs.values);
            m.vectors = std::move(pairs.vectors);
        }
    }
    return out;
}

inline Matrix pooled_scatter(const std::vector<ClassMoments>& moms, double n) {
    Matrix w = Matrix::Zero(moms[0].w.rows(), moms[0].w.cols());
    for (const auto& m : moms) w += (m.n_i / n) * m.w;
    return w;
}

// Clamp the noise level up to the floor and the subspace eigenvalues up to
// the noise level; estimation may invert the order on degenerate data.
inline void clamp_component(ComponentParams& c, double b_floor) {
    c.b = std::max(c.b, b_floor);
    c.a = c.a.cwiseMax(c.b);
}

inline MixtureParams m_step_free(const std::vector<ClassMoments>& moms,
                                 const ModelKind& model,
                                 const std::vector<int>& dims,
                                 const EmConfig& cfg, double n, int p) {
    const int k = static_cast<int>(moms.size());
    MixtureParams params;
    params.k = k;
    params.p = p;
    params.comps.resize(k);

    std::vector<double> pi(k), top_sum(k);
    for (int i = 0; i < k; ++i) {
        pi[i] = moms[i].n_i / n;
        top_sum[i] = moms[i].lambda.head(dims[i]).sum();
    }
    double xi = 0.0, top_mix = 0.0, trace_mix = 0.0;
    for (int i = 0; i < k; ++i) {
        xi += pi[i] * dims[i];
        top_mix += pi[i] * top_sum[i];
        trace_mix += pi[i] * moms[i].trace;
    }
    const double b_global = (trace_mix - top_mix) / (p - xi);

    Vector a_shared;  // a_j: pi-weighted mean of per-class spectra
    if (model.a_structure == AStructure::PerDimShared) {
        a_shared = Vector::Zero(dims[0]);
        for (int i = 0; i < k; ++i)
            a_shared += pi[i] * moms[i].lambda.head(dims[0]);
    }

    double b_max = 0.0;
    for (int i = 0; i < k; ++i) {
        ComponentParams& c = params.comps[i];
        c.pi = pi[i];
        c.mu = moms[i].mu;
        c.q_tilde = moms[i].vectors.leftCols(dims[i]);
        c.b = model.b_structure == BStructure::PerClass
                  ? (moms[i].trace - top_sum[i]) / (p - dims[i])
                  : b_global;
        c.b = std::max(c.b, cfg.b_floor);
        b_max = std::max(b_max, c.b);
    }
    // Shared a structures are clamped against the largest b so the sharing
    // constraint survives clamping.
    for (int i = 0; i < k; ++i) {
        ComponentParams& c = params.comps[i];
        const int d = dims[i];
        switch (model.a_structure) {
            case AStructure::PerClassPerDim:
                c.a = moms[i].lambda.head(d).cwiseMax(c.b);
                break;
            case AStructure::PerClass:
                c.a = Vector::Constant(d, std::max(top_sum[i] / d, c.b));
                break;
            case AStructure::Global:
                c.a = Vector::Constant(d, std::max(top_mix / xi, b_max));
                break;
            case AStructure::PerDimShared:
                c.a = a_shared.cwiseMax(b_max);
                break;
        }
    }
    return params;
}

inline MixtureParams m_step_common_orientation(
    const std::vector<ClassMoments>& moms, const ModelKind& model,
    const std::vector<int>& dims, const EmConfig& cfg, double n, int p,
    bool* inner_converged, const MixtureParams* warm_start) {
    const int k = static_cast<int>(moms.size());
    const int d = dims[0];
    Matrix w_pool = pooled_scatter(moms, n);
    const double trace_pool = w_pool.trace();

    // The alternating updates are block-coordinate ascent on the expected
    // complete-data log-likelihood; continuing from the previous EM
    // iterate's orientation keeps the whole M step an ascent step. The
    // first iteration starts from the pooled scatter's leading eigenvectors.
    const bool warm = warm_start && warm_start->k == k && warm_start->p == p &&
                      !warm_start->comps.empty() &&
                      warm_start->comps[0].q_tilde.cols() == d;
    Matrix q = warm ? warm_start->comps[0].q_tilde
                    : Matrix(eig_desc(w_pool).vectors.leftCols(d));
    Vector a_cur(k), b_cur(k), a_prev, b_prev;
    bool stable = false;

    for (int it = 0; it < cfg.inner_max_iters; ++it) {
        Vector proj(k);
        for (int i = 0; i < k; ++i)
            proj(i) = (q.transpose() * moms[i].w * q).trace();
        double proj_pool = 0.0;
        for (int i = 0; i < k; ++i) proj_pool += (moms[i].n_i / n) * proj(i);

        const double a_pool = proj_pool / d;
        const double b_pool = (trace_pool - proj_pool) / (p - d);
        for (int i = 0; i < k; ++i) {
            b_cur(i) = model.b_structure == BStructure::PerClass
                           ? (moms[i].trace - proj(i)) / (p - d)
                           : b_pool;
            b_cur(i) = std::max(b_cur(i), cfg.b_floor);
        }
        const double b_max = b_cur.maxCoeff();
        for (int i = 0; i < k; ++i) {
            a_cur(i) = model.a_structure == AStructure::PerClass
                           ? std::max(proj(i) / d, b_cur(i))
                           : std::max(a_pool, b_max);
        }
        if (it > 0) {
            const double change =
                std::max((a_cur - a_prev).cwiseAbs().maxCoeff(),
                         (b_cur - b_prev).cwiseAbs().maxCoeff());
            if (change < cfg.inner_tol) {
                stable = true;
                break;
            }
        }
        a_prev = a_cur;
        b_prev = b_cur;

        Matrix m = Matrix::Zero(p, p);
        for (int i = 0; i < k; ++i)
            m += moms[i].n_i * (1.0 / b_cur(i) - 1.0 / a_cur(i)) * moms[i].w;
        q = eig_desc(m).vectors.leftCols(d);
    }
    if (inner_converged) *inner_converged = stable;

    MixtureParams params;
    params.k = k;
    params.p = p;
    params.comps.resize(k);
    for (int i = 0; i < k; ++i) {
        ComponentParams& c = params.comps[i];
        c.pi = moms[i].n_i / n;
        c.mu = moms[i].mu;
        c.q_tilde = q;
        c.a = Vector::Constant(d, a_cur(i));
        c.b = b_cur(i);
    }
    return params;
}

inline MixtureParams m_step_common_covariance(
    const std::vector<ClassMoments>& moms, const ModelKind& model,
    const std::vector<int>& dims, const EmConfig& cfg, double n, int p) {
    const int k = static_cast<int>(moms.size());
    const int d = dims[0];
    Matrix w_pool = pooled_scatter(moms, n);
    EigenPairs eig = eig_desc(w_pool);

    Vector a = model.a_structure == AStructure::PerDimShared
                   ? Vector(eig.values.head(d))
                   : Vector(Vector::Constant(d, eig.values.head(d).mean()));
    double b = (w_pool.trace() - eig.values.head(d).sum()) / (p - d);

    MixtureParams params;
    params.k = k;
    params.p = p;
    params.comps.resize(k);
    for (int i = 0; i < k; ++i) {
        ComponentParams& c = params.comps[i];
        c.pi = moms[i].n_i / n;
        c.mu = moms[i].mu;
        c.q_tilde = eig.vectors.leftCols(d);
        c.a = a;
        c.b = b;
        clamp_component(c, cfg.b_floor);
    }
    // re-share after clamping so the common structure stays exact
    for (int i = 1; i < k; ++i) {
        params.comps[i].a = params.comps[0].a;
        params.comps[i].b = params.comps[0].b;
    }
    return params;
}

inline MixtureParams m_step_from_moments(const std::vector<ClassMoments>& moms,
                                         const ModelKind& model,
                                         const std::vector<int>& dims,
                                         const EmConfig& cfg, double n, int p,
                                         bool* inner_converged = nullptr,
                                         const MixtureParams* warm_start = nullptr) {
    if (inner_converged) *inner_converged = true;
    switch (model.family) {
        case Family::FreeOrientation:
            return m_step_free(moms, model, dims, cfg, n, p);
        case Family::CommonOrientation:
            return m_step_common_orientation(moms, model, dims, cfg, n, p,
                                             inner_converged, warm_start);
        case Family::CommonCovariance:
            return m_step_common_covariance(moms, model, dims, cfg, n, p);
        case Family::Baseline:
            throw InvalidInputError("m_step: baseline models use fit_baseline");
    }
    throw InvalidInputError("m_step: unknown family");
}

inline void validate_dims(const ModelKind& model, const std::vector<int>& dims,
                          int k, int p) {
    if (static_cast<int>(dims.size()) != k)
        throw InvalidInputError("dims size != k");
    for (int d : dims)
        if (d < 1 || d > p - 1)
            throw InvalidInputError("intrinsic dimension outside [1, p-1]");
    if (model.common_d())
        for (int d : dims)
            if (d != dims[0])
                throw InvalidInputError("common-d model with unequal dims");
}

// Rank-aware cap for scree-chosen dimensions.
inline int dim_cap(const ClassMoments& m, const DimPolicy& policy, int p) {
    int cap = policy.d_max > 0 ? std::min(policy.d_max, p - 1) : p - 1;
    cap = std::min(cap, static_cast<int>(std::ceil(m.n_i)) - 1);
    cap = std::min(cap, static_cast<int>(m.vectors.cols()));
    return std::max(cap, policy.d_min);
}

inline std::vector<int> resolve_dims(const std::vector<ClassMoments>& moms,
                                     const ModelKind& model,
                                     const DimPolicy& policy, double n, int p) {
    const int k = static_cast<int>(moms.size());
    switch (policy.kind) {
        case DimPolicy::Kind::FixedPerClass: {
            validate_dims(model, policy.fixed_dims, k, p);
            return policy.fixed_dims;
        }
        case DimPolicy::Kind::FixedCommon: {
            std::vector<int> dims(k, policy.fixed_d);
            validate_dims(model, dims, k, p);
            return dims;
        }
        case DimPolicy::Kind::ScreeFree: {
            if (!model.common_d()) {
                std::vector<int> dims(k);
                for (int i = 0; i < k; ++i)
                    dims[i] = scree_dimension(moms[i].lambda, policy.threshold,
                                              policy.d_min,
                                              dim_cap(moms[i], policy, p));
                return dims;
            }
            // Common d from a pooled spectrum: eigenvalues of W when the
            // dense scatters exist, otherwise the pi-weighted mean of the
            // per-class spectra.
            Vector pooled;
            if (moms[0].has_dense) {
                pooled = eig_desc(pooled_scatter(moms, n)).values;
            } else {
                pooled = Vector::Zero(p);
                for (const auto& m : moms) pooled += (m.n_i / n) * m.lambda;
            }
            int cap = p - 1;
            for (const auto& m : moms) cap = std::min(cap, dim_cap(m, policy, p));
            const int d = scree_dimension(pooled, policy.threshold,
                                          policy.d_min, std::max(cap, policy.d_min));
            return std::vector<int>(k, d);
        }
        case DimPolicy::Kind::ScreeCommonViaBic:
            throw InvalidInputError(
                "resolve_dims: ScreeCommonViaBic is handled by fit()");
    }
    throw InvalidInputError("resolve_dims: unknown policy");
}

inline bool needs_dense(const ModelKind& model) {
    return model.shared_orientation();
}

inline int min_vectors_for(const DimPolicy& policy) {
    switch (policy.kind) {
        case DimPolicy::Kind::FixedPerClass: {
            int m = 0;
            for (int d : policy.fixed_dims) m = std::max(m, d);
            return m;
        }
        case DimPolicy::Kind::FixedCommon:
            return policy.fixed_d;
        default:
            return 0;
    }
}

}  // namespace detail

// Closed-form / fixed-point maximization step for a fixed dimension spec.
inline MixtureParams m_step(const Responsibilities& resp, const Matrix& data,
                            const ModelKind& model, const std::vector<int>& dims,
                            const EmConfig& cfg) {
    const int k = static_cast<int>(resp.cols());
    const int p = static_cast<int>(data.cols());
    detail::validate_dims(model, dims, k, p);
    int min_vec = 0;
    for (int d : dims) min_vec = std::max(min_vec, d);
    auto moms = detail::compute_moments(data, resp, cfg,
                                        detail::needs_dense(model), min_vec);
    return detail::m_step_from_moments(moms, model, dims, cfg, data.rows(), p);
}

// ---------------------------------------------------------------------------
// Full EM
// ---------------------------------------------------------------------------

namespace detail {

struct EmRun {
    MixtureParams params;
    Responsibilities t;
    std::vector<double> trace;
    bool converged = false;
    bool inner_converged = true;
    std::vector<int> dims;
};

inline EmRun run_em_once(const Matrix& data, int k, const ModelKind& model,
                         const DimPolicy& policy, const EmConfig& cfg) {
    EmRun run;
    run.t = init_responsibilities(data, k, cfg);
    const int p = static_cast<int>(data.cols());
    const bool dense = needs_dense(model);
    const int min_vec = min_vectors_for(policy);
    double prev = std::numeric_limits<double>::quiet_NaN();
    bool have_params = false;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        auto moms = compute_moments(data, run.t, cfg, dense, min_vec);
        std::vector<int> dims = resolve_dims(moms, model, policy, data.rows(), p);
        bool inner_ok = true;
        MixtureParams candidate =
            m_step_from_moments(moms, model, dims, cfg, data.rows(), p,
                                &inner_ok, have_params ? &run.params : nullptr);
        // Generalized M step: when the a >= b clamps engage, the closed-form
        // update is no longer the constrained maximizer and could lower the
        // expected complete-data log-likelihood; keep the previous iterate in
        // that case so the observed log-likelihood never decreases. Applies
        // only while the dimension spec is unchanged; a scree-driven dim
        // switch is a model change, where no monotonicity is promised.
        if (have_params && dims == run.dims &&
            expected_complete_loglik(candidate, data, run.t) <
                expected_complete_loglik(run.params, data, run.t)) {
            candidate = run.params;
        }
        run.params = std::move(candidate);
        run.dims = std::move(dims);
        have_params = true;
        run.inner_converged = run.inner_converged && inner_ok;
        EStepResult es = e_step(run.params, data);
        run.t = std::move(es.t);
        run.trace.push_back(es.loglik);
        if (std::isfinite(prev) &&
            std::abs(es.loglik - prev) <= cfg.rel_tol * (1.0 + std::abs(es.loglik))) {
            run.converged = true;
            break;
        }
        prev = es.loglik;
    }
    return run;
}

inline std::vector<int> hard_assignments(const Responsibilities& t) {
    std::vector<int> assign(t.rows());
    for (Eigen::Index j = 0; j < t.rows(); ++j) {
        int best = 0;
        for (Eigen::Index i = 1; i < t.cols(); ++i)
            if (t(j, i) > t(j, best)) best = static_cast<int>(i);
        assign[j] = best;
    }
    return assign;
}

}  // namespace detail

// Best-of-n_restarts EM fit for any HDDC model; deterministic given cfg.seed.
inline FitReport fit(const Matrix& data, int k, const ModelKind& model,
                     const DimPolicy& dim_policy, const EmConfig& cfg) {
    const Eigen::Index n = data.rows();
    const int p = static_cast<int>(data.cols());
    if (model.is_baseline())
        throw InvalidInputError("fit: baseline models use fit_baseline");
    if (k < 1 || n < k) throw InvalidInputError("fit: need n >= k >= 1");
    if (p < 2) throw InvalidInputError("fit: need p >= 2");
    if (!data.allFinite()) throw InvalidInputError("fit: non-finite data");

    if (dim_policy.kind == DimPolicy::Kind::ScreeCommonViaBic) {
        if (!model.common_d())
            throw InvalidInputError(
                "fit: ScreeCommonViaBic applies to common-d models only");
        const int d_hi = dim_policy.d_max > 0 ? std::min(dim_policy.d_max, p - 1)
                                              : p - 1;
        FitReport best;
        bool have = false;
        std::string last_error = "no candidate dimension";
        for (int d = dim_policy.d_min; d <= d_hi; ++d) {
            try {
                FitReport r =
                    fit(data, k, model, DimPolicy::fixed_common(d), cfg);
                if (!have || r.bic < best.bic) {
                    best = std::move(r);
                    have = true;
                }
            } catch (const FitFailedError& e) {
                last_error = e.what();
            }
        }
        if (!have) throw FitFailedError(last_error);
        return best;
    }

    detail::EmRun best;
    int best_restart = -1;
    double best_ll = -std::numeric_limits<double>::infinity();
    std::string last_error = "all restarts degenerate";
    for (int r = 0; r < cfg.n_restarts; ++r) {
        EmConfig sub = cfg;
        sub.seed = detail::derive_seed(cfg.seed, r);
        try {
            detail::EmRun run = detail::run_em_once(data, k, model, dim_policy, sub);
            if (!run.trace.empty() && run.trace.back() > best_ll) {
                best_ll = run.trace.back();
                best = std::move(run);
                best_restart = r;
            }
        } catch (const DegenerateClusterError& e) {
            last_error = e.what();
        } catch (const NumericalError& e) {
            last_error = e.what();
        }
    }
    if (best_restart < 0) throw FitFailedError(last_error);

    FitReport report;
    report.model = model;
    report.params = best.params;
    report.loglik_trace = best.trace;
    report.n_iters = static_cast<int>(best.trace.size());
    report.converged = best.converged;
    report.inner_converged = best.inner_converged;
    report.loglik = best.trace.back();
    report.dims = best.dims;
    report.nu = param_count(model, {k, p, best.dims});
    report.bic = bic(report.loglik, report.nu, n);
    report.assignments = detail::hard_assignments(best.t);
    report.responsibilities = std::move(best.t);
    report.restart_index = best_restart;
    report.seed = cfg.seed;
    return report;
}

}  // namespace hddc
