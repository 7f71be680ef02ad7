#include <gtest/gtest.h>

#include <hddc/linalg.hpp>

#include "support/oracles.hpp"

using hddc::Matrix;
using hddc::Vector;

namespace {

Matrix random_symmetric(std::mt19937_64& rng, int p, double scale = 1.0) {
    Matrix a = oracle::random_data(rng, p, p, scale);
    return 0.5 * (a + a.transpose());
}

}  // namespace

TEST(WeightedScatter, TwoPointCase) {
    Matrix data(2, 2);
    data << 0, 0, 2, 0;
    Vector w = Vector::Ones(2);
    Vector mean(2);
    mean << 1, 0;
    Matrix s = hddc::weighted_scatter(data, w, mean);
    Matrix expected(2, 2);
    expected << 1, 0, 0, 0;
    EXPECT_NEAR((s - expected).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(WeightedScatter, SingleAtomIsZero) {
    std::mt19937_64 rng(1);
    Matrix data = oracle::random_data(rng, 5, 3);
    Vector w = Vector::Zero(5);
    w(2) = 3.0;
    Matrix s = hddc::weighted_scatter(data, w, data.row(2).transpose());
    EXPECT_EQ(s.cwiseAbs().maxCoeff(), 0.0);
}

TEST(WeightedScatter, MatchesNaiveTwoPass) {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix data = oracle::random_data(rng, 5, 3, 2.0);
        Vector w = Vector::Ones(5);
        Vector mean = data.colwise().mean();
        Matrix s = hddc::weighted_scatter(data, w, mean);
        Matrix naive = oracle::naive_weighted_cov(data, w, mean);
        EXPECT_NEAR((s - naive).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    }
}

TEST(WeightedScatter, ExactlySymmetric) {
    std::mt19937_64 rng(3);
    Matrix data = oracle::random_data(rng, 40, 7, 3.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector w = Vector::NullaryExpr(40, [&](Eigen::Index) { return unit(rng); });
    Vector mean = data.colwise().mean();
    Matrix s = hddc::weighted_scatter(data, w, mean);
    EXPECT_EQ((s - s.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(WeightedScatter, ZeroWeightThrows) {
    Matrix data = Matrix::Zero(3, 2);
    Vector w = Vector::Zero(3);
    EXPECT_THROW(hddc::weighted_scatter(data, w, Vector::Zero(2)),
                 hddc::DegenerateClusterError);
}

TEST(WeightedScatter, NegativeWeightThrows) {
    Matrix data = Matrix::Zero(3, 2);
    Vector w(3);
    w << 1, -1, 1;
    EXPECT_THROW(hddc::weighted_scatter(data, w, Vector::Zero(2)),
                 hddc::InvalidInputError);
}

TEST(EigDesc, DiagonalValuesDescending) {
    Vector d(3);
    d << 1, 2, 3;
    hddc::EigenPairs eig = hddc::eig_desc(Matrix(d.asDiagonal()));
    Vector expected(3);
    expected << 3, 2, 1;
    EXPECT_NEAR((eig.values - expected).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    // axis-aligned vectors, canonical signs
    Matrix expected_v(3, 3);
    expected_v << 0, 0, 1, 0, 1, 0, 1, 0, 0;
    EXPECT_NEAR((eig.vectors - expected_v).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(EigDesc, IdentitySpectrum) {
    hddc::EigenPairs eig = hddc::eig_desc(Matrix::Identity(4, 4));
    EXPECT_NEAR((eig.values.array() - 1.0).abs().maxCoeff(), 0.0, 1e-12);
    Matrix gram = eig.vectors.transpose() * eig.vectors;
    EXPECT_NEAR((gram - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.0,
                1e-10);
}

TEST(EigDesc, MatchesLongDoubleQlOracle) {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        Matrix s = random_symmetric(rng, 6, 2.0);
        hddc::EigenPairs eig = hddc::eig_desc(s);
        Vector expected = oracle::qr_eigenvalues(s);
        EXPECT_NEAR((eig.values - expected).cwiseAbs().maxCoeff(), 0.0, 1e-8);
    }
}

TEST(EigDesc, ReconstructionAndProperties) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        const int p = 3 + static_cast<int>(rng() % 10);
        Matrix s = random_symmetric(rng, p, 3.0);
        hddc::EigenPairs eig = hddc::eig_desc(s);
        // descending
        for (int j = 0; j + 1 < p; ++j)
            EXPECT_GE(eig.values(j), eig.values(j + 1));
        // orthonormal to 1e-10
        Matrix gram = eig.vectors.transpose() * eig.vectors;
        EXPECT_LE((gram - Matrix::Identity(p, p)).cwiseAbs().maxCoeff(), 1e-10);
        // reconstruction
        Matrix rec = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
        const double scale = 1.0 + s.cwiseAbs().maxCoeff();
        EXPECT_LE((rec - s).cwiseAbs().maxCoeff(), 1e-8 * scale);
        // eigenvalue sum equals trace
        EXPECT_LE(std::abs(eig.values.sum() - s.trace()),
                  1e-8 * (1.0 + std::abs(s.trace())));
        // sign convention: largest-magnitude entry positive
        for (int j = 0; j < p; ++j) {
            Eigen::Index imax;
            eig.vectors.col(j).cwiseAbs().maxCoeff(&imax);
            EXPECT_GT(eig.vectors(imax, j), 0.0);
        }
    }
}

TEST(EigDesc, NonFiniteThrows) {
    Matrix s = Matrix::Identity(3, 3);
    s(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(hddc::eig_desc(s), hddc::InvalidInputError);
}

TEST(EigDesc, DeterministicWithinBuild) {
    std::mt19937_64 rng(6);
    Matrix s = random_symmetric(rng, 8);
    hddc::EigenPairs a = hddc::eig_desc(s);
    hddc::EigenPairs b = hddc::eig_desc(s);
    EXPECT_TRUE(a.values == b.values);
    EXPECT_TRUE(a.vectors == b.vectors);
}

TEST(TopEig, DiagonalSlice) {
    Vector d(4);
    d << 5, 4, 3, 2;
    hddc::EigenPairs eig = hddc::top_eig(Matrix(d.asDiagonal()), 2);
    EXPECT_EQ(eig.values.size(), 2);
    EXPECT_NEAR(eig.values(0), 5.0, 1e-12);
    EXPECT_NEAR(eig.values(1), 4.0, 1e-12);
}

TEST(TopEig, FullRequestMatchesEigDesc) {
    std::mt19937_64 rng(7);
    Matrix s = random_symmetric(rng, 5);
    hddc::EigenPairs full = hddc::eig_desc(s);
    hddc::EigenPairs top = hddc::top_eig(s, 5);
    EXPECT_TRUE(full.values == top.values);
    EXPECT_TRUE(full.vectors == top.vectors);
}

TEST(TopEig, LargePsdSliceMatches) {
    std::mt19937_64 rng(8);
    Matrix a = oracle::random_data(rng, 50, 50);
    Matrix s = a * a.transpose() / 50.0;
    hddc::EigenPairs top = hddc::top_eig(s, 5);
    hddc::EigenPairs full = hddc::eig_desc(s);
    EXPECT_NEAR((top.values - full.values.head(5)).cwiseAbs().maxCoeff(), 0.0,
                1e-8);
}

TEST(TopEig, OutOfRangeThrows) {
    Matrix s = Matrix::Identity(3, 3);
    EXPECT_THROW(hddc::top_eig(s, 4), hddc::InvalidInputError);
    EXPECT_THROW(hddc::top_eig(s, 0), hddc::InvalidInputError);
}

TEST(GramTopEig, RankBoundAfterCentering) {
    std::mt19937_64 rng(9);
    Matrix data = oracle::random_data(rng, 3, 10);
    Vector w = Vector::Ones(3);
    Vector mean = data.colwise().mean();
    hddc::CenteredDesign d = hddc::make_centered_design(data, w, mean);
    hddc::EigenPairs eig = hddc::gram_top_eig(d, 3);
    EXPECT_GE(eig.zero_padded, 1);  // centering kills one direction
    EXPECT_EQ(eig.values(2), 0.0);
}

TEST(GramTopEig, SinglePointZeroSpectrum) {
    Matrix data(1, 6);
    data << 1, 2, 3, 4, 5, 6;
    Vector w = Vector::Ones(1);
    hddc::CenteredDesign d =
        hddc::make_centered_design(data, w, data.row(0).transpose());
    hddc::EigenPairs eig = hddc::gram_top_eig(d, 1);
    EXPECT_EQ(eig.zero_padded, 1);
    EXPECT_EQ(eig.values(0), 0.0);
    EXPECT_NEAR(eig.vectors.col(0).norm(), 1.0, 1e-12);
}

TEST(GramTopEig, MatchesDirectPathHighDim) {
    std::mt19937_64 rng(10);
    Matrix data = oracle::random_data(rng, 13, 1024, 2.0);
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    Vector w = Vector::NullaryExpr(13, [&](Eigen::Index) { return unit(rng); });
    Vector mean = (data.transpose() * w) / w.sum();

    hddc::CenteredDesign design = hddc::make_centered_design(data, w, mean);
    hddc::EigenPairs gram = hddc::gram_top_eig(design, 12);

    Matrix s = hddc::weighted_scatter(data, w, mean);
    hddc::EigenPairs direct = hddc::eig_desc(s);

    const double scale = direct.values(0);
    EXPECT_LE((gram.values - direct.values.head(12)).cwiseAbs().maxCoeff(),
              1e-8 * scale);
    // eigenvectors agree up to sign; signs are canonical on both paths
    for (int j = 0; j < 12 - gram.zero_padded; ++j)
        EXPECT_LE((gram.vectors.col(j) - direct.vectors.col(j))
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-6);
}

TEST(GramTopEig, RandomInstancesAgreeWithDirect) {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 15; ++rep) {
        const int n = 4 + static_cast<int>(rng() % 10);
        const int p = n + 1 + static_cast<int>(rng() % 30);
        Matrix data = oracle::random_data(rng, n, p);
        std::uniform_real_distribution<double> unit(0.05, 1.0);
        Vector w = Vector::NullaryExpr(n, [&](Eigen::Index) { return unit(rng); });
        Vector mean = (data.transpose() * w) / w.sum();

        hddc::EigenPairs gram =
            hddc::gram_top_eig(hddc::make_centered_design(data, w, mean), n);
        hddc::EigenPairs direct =
            hddc::eig_desc(hddc::weighted_scatter(data, w, mean));

        const double scale = std::max(direct.values(0), 1e-30);
        EXPECT_LE((gram.values - direct.values.head(n)).cwiseAbs().maxCoeff(),
                  1e-8 * scale);
        Matrix gramgram = gram.vectors.transpose() * gram.vectors;
        EXPECT_LE((gramgram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(),
                  1e-10);
    }
}

TEST(GramTopEig, CompletedColumnsStayOrthonormal) {
    Matrix data(2, 8);
    data.setZero();
    data(0, 0) = 1.0;
    data(1, 0) = -1.0;  // rank-1 after centering at 0
    Vector w = Vector::Ones(2);
    hddc::CenteredDesign d =
        hddc::make_centered_design(data, w, Vector::Zero(8));
    hddc::EigenPairs eig = hddc::gram_top_eig(d, 2);
    EXPECT_EQ(eig.zero_padded, 1);
    Matrix gram = eig.vectors.transpose() * eig.vectors;
    EXPECT_LE((gram - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-10);
}
