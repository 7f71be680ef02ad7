#pragma once

#include "hddc/em.hpp"

namespace hddc {

inline long baseline_param_count(BaselineKind kind, int k, int p) {
    return param_count(baseline_model(kind), {k, p, {}});
}

namespace detail {

inline double ridge_for(const Matrix& cov, double ridge_scale) {
    return ridge_scale * cov.trace() / cov.rows();
}

}  // namespace detail

// Classical M step per covariance structure. Full and Com covariances get a
// ridge before any inversion; Diag and Sphe variances are floored at b_floor.
inline BaselineParams baseline_m_step(const Responsibilities& resp,
                                      const Matrix& data, BaselineKind kind,
                                      const EmConfig& cfg) {
    const Eigen::Index n = data.rows(), p = data.cols();
    const int k = static_cast<int>(resp.cols());
    if (resp.rows() != n)
        throw InvalidInputError("baseline_m_step: resp rows != n");
    const double min_w = cfg.effective_min_weight(n);

    BaselineParams bp;
    bp.kind = kind;
    bp.k = k;
    bp.p = static_cast<int>(p);
    bp.pi.resize(k);
    bp.mu.resize(k);

    Matrix pooled = Matrix::Zero(p, p);
    for (int i = 0; i < k; ++i) {
        Vector w = resp.col(i);
        const double n_i = w.sum();
        if (!(n_i > 0.0) || n_i < min_w)
            throw DegenerateClusterError("component " + std::to_string(i) +
                                         " weight below minimum");
        bp.pi[i] = n_i / n;
        bp.mu[i] = data.transpose() * w / n_i;
        Matrix centered = data.rowwise() - bp.mu[i].transpose();

        switch (kind) {
            case BaselineKind::Full: {
                Matrix cov = weighted_scatter(data, w, bp.mu[i]);
                cov.diagonal().array() += detail::ridge_for(cov, cfg.ridge_scale);
                bp.cov.push_back(std::move(cov));
                break;
            }
            case BaselineKind::Com:
                pooled += bp.pi[i] * weighted_scatter(data, w, bp.mu[i]);
                break;
            case BaselineKind::Diag: {
                Vector var = (centered.array().square().colwise() * w.array())
                                 .colwise()
                                 .sum()
                                 .transpose() /
                             n_i;
                bp.diag_var.push_back(var.cwiseMax(cfg.b_floor));
                break;
            }
            case BaselineKind::Sphe: {
                const double total =
                    (centered.rowwise().squaredNorm().array() * w.array()).sum() /
                    n_i;
                bp.sphe_var.push_back(std::max(total / p, cfg.b_floor));
                break;
            }
        }
    }
    if (kind == BaselineKind::Com) {
        pooled.diagonal().array() += detail::ridge_for(pooled, cfg.ridge_scale);
        bp.cov.push_back(std::move(pooled));
    }
    return bp;
}

// n x k matrix of log(pi_i phi(x_j; mu_i, Sigma_i)).
inline Matrix baseline_log_density(const BaselineParams& bp, const Matrix& data) {
    const Eigen::Index n = data.rows(), p = data.cols();
    if (static_cast<int>(p) != bp.p)
        throw InvalidInputError("baseline_log_density: dimension mismatch");
    constexpr double log_2pi = 1.8378770664093454836;
    Matrix out(n, bp.k);

    Eigen::LLT<Matrix> shared_llt;
    double shared_logdet = 0.0;
    if (bp.kind == BaselineKind::Com) {
        shared_llt.compute(bp.cov[0]);
        if (shared_llt.info() != Eigen::Success)
            throw DegenerateClusterError("shared covariance not positive definite");
        shared_logdet =
            2.0 * shared_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }

    for (int i = 0; i < bp.k; ++i) {
        Matrix centered = data.rowwise() - bp.mu[i].transpose();
        Vector maha(n);
        double logdet = 0.0;
        switch (bp.kind) {
            case BaselineKind::Full: {
                Eigen::LLT<Matrix> llt(bp.cov[i]);
                if (llt.info() != Eigen::Success)
                    throw DegenerateClusterError(
                        "covariance of component " + std::to_string(i) +
                        " not positive definite");
                Matrix y = llt.matrixL().solve(centered.transpose());
                maha = y.colwise().squaredNorm().transpose();
                logdet =
                    2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
                break;
            }
            case BaselineKind::Com: {
                Matrix y = shared_llt.matrixL().solve(centered.transpose());
                maha = y.colwise().squaredNorm().transpose();
                logdet = shared_logdet;
                break;
            }
            case BaselineKind::Diag: {
                maha = (centered.array().square().rowwise() /
                        bp.diag_var[i].transpose().array())
                           .rowwise()
                           .sum();
                logdet = bp.diag_var[i].array().log().sum();
                break;
            }
            case BaselineKind::Sphe: {
                maha = centered.rowwise().squaredNorm() / bp.sphe_var[i];
                logdet = p * std::log(bp.sphe_var[i]);
                break;
            }
        }
        out.col(i) = Vector::Constant(n, std::log(bp.pi[i]) -
                                             0.5 * (logdet + p * log_2pi)) -
                     0.5 * maha;
        if (!out.col(i).allFinite())
            throw NumericalError("baseline_log_density: non-finite density for "
                                 "component " +
                                 std::to_string(i));
    }
    return out;
}

inline EStepResult baseline_e_step(const BaselineParams& bp, const Matrix& data) {
    Matrix logd = baseline_log_density(bp, data);
    EStepResult out;
    out.t.resize(logd.rows(), logd.cols());
    double loglik = 0.0;
    for (Eigen::Index j = 0; j < logd.rows(); ++j) {
        const double m = logd.row(j).maxCoeff();
        Eigen::ArrayXd u = (logd.row(j).array() - m).exp();
        const double total = u.sum();
        out.t.row(j) = (u / total).matrix();
        loglik += m + std::log(total);
    }
    out.loglik = loglik;
    return out;
}

inline double baseline_log_likelihood(const BaselineParams& bp,
                                      const Matrix& data) {
    return baseline_e_step(bp, data).loglik;
}

inline std::pair<std::vector<int>, Responsibilities> baseline_predict(
    const BaselineParams& bp, const Matrix& data) {
    Matrix logd = baseline_log_density(bp, data);
    EStepResult es = baseline_e_step(bp, data);
    std::vector<int> assign(data.rows());
    for (Eigen::Index j = 0; j < data.rows(); ++j) {
        int best = 0;
        for (int i = 1; i < bp.k; ++i)
            if (logd(j, i) > logd(j, best)) best = i;
        assign[j] = best;
    }
    return {std::move(assign), std::move(es.t)};
}

// Standard EM for a reference mixture; shares the restart shell, the
// initializer and the report shape with fit() so harness code is uniform.
inline FitReport fit_baseline(const Matrix& data, int k, BaselineKind kind,
                              const EmConfig& cfg) {
    const Eigen::Index n = data.rows();
    if (k < 1 || n < k) throw InvalidInputError("fit_baseline: need n >= k >= 1");
    if (!data.allFinite())
        throw InvalidInputError("fit_baseline: non-finite data");

    struct Run {
        BaselineParams params;
        Responsibilities t;
        std::vector<double> trace;
        bool converged = false;
    };

    Run best;
    int best_restart = -1;
    double best_ll = -std::numeric_limits<double>::infinity();
    std::string last_error = "all restarts degenerate";
    for (int r = 0; r < cfg.n_restarts; ++r) {
        EmConfig sub = cfg;
        sub.seed = detail::derive_seed(cfg.seed, r);
        try {
            Run run;
            run.t = init_responsibilities(data, k, sub);
            double prev = std::numeric_limits<double>::quiet_NaN();
            for (int iter = 0; iter < cfg.max_iters; ++iter) {
                run.params = baseline_m_step(run.t, data, kind, sub);
                EStepResult es = baseline_e_step(run.params, data);
                run.t = std::move(es.t);
                run.trace.push_back(es.loglik);
                if (std::isfinite(prev) &&
                    std::abs(es.loglik - prev) <=
                        cfg.rel_tol * (1.0 + std::abs(es.loglik))) {
                    run.converged = true;
                    break;
                }
                prev = es.loglik;
            }
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
    report.model = baseline_model(kind);
    report.params = best.params;
    report.loglik_trace = best.trace;
    report.n_iters = static_cast<int>(best.trace.size());
    report.converged = best.converged;
    report.loglik = best.trace.back();
    report.nu = baseline_param_count(kind, k, static_cast<int>(data.cols()));
    report.bic = bic(report.loglik, report.nu, n);
    report.assignments = detail::hard_assignments(best.t);
    report.responsibilities = std::move(best.t);
    report.restart_index = best_restart;
    report.seed = cfg.seed;
    return report;
}

// Uniform entry point over the whole catalog.
inline FitReport fit_model(const Matrix& data, int k, const ModelKind& model,
                           const DimPolicy& policy, const EmConfig& cfg) {
    if (model.is_baseline())
        return fit_baseline(data, k, model.baseline_kind, cfg);
    return fit(data, k, model, policy, cfg);
}

}  // namespace hddc
