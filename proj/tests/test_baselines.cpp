#include <gtest/gtest.h>

#include <hddc/baselines.hpp>
#include <hddc/metrics.hpp>
#include <hddc/presets.hpp>
#include <hddc/synthgen.hpp>

#include "support/oracles.hpp"

using hddc::BaselineKind;
using hddc::EmConfig;
using hddc::Matrix;
using hddc::Vector;

TEST(BaselineCount, TableValues) {
    EXPECT_EQ(hddc::baseline_param_count(BaselineKind::Full, 4, 100), 20603);
    EXPECT_EQ(hddc::baseline_param_count(BaselineKind::Com, 4, 100), 5453);
    EXPECT_EQ(hddc::baseline_param_count(BaselineKind::Diag, 4, 100), 803);
    EXPECT_EQ(hddc::baseline_param_count(BaselineKind::Sphe, 4, 100), 407);
    EXPECT_EQ(hddc::baseline_param_count(BaselineKind::Sphe, 1, 1), 2);
}

TEST(BaselineFit, SphericalBlobsRecoveredExactly) {
    std::mt19937_64 rng(71);
    const int n = 50;
    Matrix data(2 * n, 3);
    data.topRows(n) = oracle::random_data(rng, n, 3);
    data.bottomRows(n) = oracle::random_data(rng, n, 3);
    data.bottomRows(n).col(1).array() += 15.0;
    std::vector<int> truth(2 * n, 0);
    std::fill(truth.begin() + n, truth.end(), 1);

    EmConfig cfg;
    cfg.seed = 4;
    cfg.n_restarts = 5;
    auto report = hddc::fit_baseline(data, 2, BaselineKind::Sphe, cfg);
    EXPECT_EQ(hddc::recognition_rate(truth, report.assignments).rate, 1.0);
}

TEST(BaselineFit, FullOnFewerPointsThanDimsStaysFinite) {
    std::mt19937_64 rng(72);
    Matrix data = oracle::random_data(rng, 12, 20);
    EmConfig cfg;
    cfg.seed = 1;
    cfg.n_restarts = 2;
    cfg.max_iters = 15;
    auto report = hddc::fit_baseline(data, 2, BaselineKind::Full, cfg);
    EXPECT_TRUE(std::isfinite(report.loglik));
}

TEST(BaselineMStep, NestingOrderOnSharedResponsibilities) {
    std::mt19937_64 rng(73);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 70, p = 4;
        Matrix data = oracle::random_data(rng, n, p, 2.0);
        data.col(0) *= 2.5;
        Matrix resp = oracle::random_responsibilities(rng, n, 2);
        EmConfig cfg;
        cfg.ridge_scale = 1e-9;  // keep the optimum essentially exact

        auto full = hddc::baseline_m_step(resp, data, BaselineKind::Full, cfg);
        auto diag = hddc::baseline_m_step(resp, data, BaselineKind::Diag, cfg);
        auto sphe = hddc::baseline_m_step(resp, data, BaselineKind::Sphe, cfg);
        const double qf = oracle::expected_complete_loglik(full, data, resp);
        const double qd = oracle::expected_complete_loglik(diag, data, resp);
        const double qs = oracle::expected_complete_loglik(sphe, data, resp);
        EXPECT_GE(qf, qd - 1e-8 * (1.0 + std::abs(qd)));
        EXPECT_GE(qd, qs - 1e-8 * (1.0 + std::abs(qs)));
    }
}

TEST(BaselineFit, DiagBeatsSpheOnAnisotropicAxisAlignedBlobs) {
    std::mt19937_64 rng(74);
    const int n = 80;
    Matrix data = oracle::random_data(rng, n, 3);
    data.col(0) *= 6.0;  // anisotropic, axis-aligned
    data.col(2) *= 0.5;
    Matrix resp = oracle::random_responsibilities(rng, n, 2);
    EmConfig cfg;
    auto diag = hddc::baseline_m_step(resp, data, BaselineKind::Diag, cfg);
    auto sphe = hddc::baseline_m_step(resp, data, BaselineKind::Sphe, cfg);
    EXPECT_GE(hddc::baseline_log_likelihood(diag, data),
              hddc::baseline_log_likelihood(sphe, data));
}

TEST(BaselinePredict, PosteriorRowsSumToOne) {
    std::mt19937_64 rng(75);
    Matrix data = oracle::random_data(rng, 40, 3);
    data.topRows(20).array() += 4.0;
    EmConfig cfg;
    cfg.seed = 8;
    cfg.n_restarts = 3;
    auto report = hddc::fit_baseline(data, 2, BaselineKind::Diag, cfg);
    auto [assign, post] = hddc::baseline_predict(report.baseline(), data);
    EXPECT_LE((post.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
    EXPECT_EQ(assign, report.assignments);
}

TEST(BaselineFit, SameSeedSamePartitionAsHddc) {
    // both fitters derive restart partitions identically, so comparisons
    // isolate the model
    std::mt19937_64 rng(76);
    Matrix data = oracle::random_data(rng, 50, 4);
    EmConfig cfg;
    cfg.seed = 21;
    auto t_lib = hddc::init_responsibilities(data, 3, cfg);
    auto t_again = hddc::init_responsibilities(data, 3, cfg);
    EXPECT_TRUE(t_lib == t_again);
}

TEST(BaselineFit, ReportShapeMatchesHddcFits) {
    std::mt19937_64 rng(77);
    Matrix data = oracle::random_data(rng, 60, 4);
    data.topRows(30).array() += 5.0;
    EmConfig cfg;
    cfg.seed = 2;
    cfg.n_restarts = 2;
    auto report = hddc::fit_baseline(data, 2, BaselineKind::Sphe, cfg);
    EXPECT_EQ(report.model, hddc::baseline_model(BaselineKind::Sphe));
    EXPECT_EQ(report.nu, hddc::baseline_param_count(BaselineKind::Sphe, 2, 4));
    EXPECT_EQ(report.responsibilities.rows(), data.rows());
    EXPECT_EQ(static_cast<int>(report.assignments.size()), 60);
    EXPECT_FALSE(report.loglik_trace.empty());
    EXPECT_NEAR(report.bic, hddc::bic(report.loglik, report.nu, 60), 1e-12);
}

TEST(BaselineFit, MonotoneTraces) {
    std::mt19937_64 rng(78);
    for (auto kind : {BaselineKind::Full, BaselineKind::Com, BaselineKind::Diag,
                      BaselineKind::Sphe}) {
        for (int rep = 0; rep < 3; ++rep) {
            Matrix data = oracle::random_data(rng, 70, 4, 2.0);
            data.topRows(35).col(0).array() += 3.0;
            EmConfig cfg;
            cfg.seed = rep;
            cfg.n_restarts = 1;
            auto report = hddc::fit_baseline(data, 2, kind, cfg);
            for (size_t i = 1; i < report.loglik_trace.size(); ++i)
                EXPECT_GE(report.loglik_trace[i],
                          report.loglik_trace[i - 1] - 1e-6)
                    << hddc::model_name(hddc::baseline_model(kind));
        }
    }
}

TEST(FitModel, DispatchesOverTheWholeCatalog) {
    hddc::SimSpec spec = hddc::three_group_preset(12, 150, 3);
    hddc::Dataset data = hddc::simulate(spec);
    EmConfig cfg;
    cfg.seed = 6;
    cfg.n_restarts = 1;
    cfg.max_iters = 25;
    for (const auto& model : hddc::enumerate_models()) {
        auto report = hddc::fit_model(data.x, 2, model,
                                      hddc::DimPolicy::scree(0.2), cfg);
        EXPECT_TRUE(std::isfinite(report.loglik)) << hddc::model_name(model);
        EXPECT_GT(report.nu, 0) << hddc::model_name(model);
    }
}
