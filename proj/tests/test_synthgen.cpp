#include <gtest/gtest.h>

#include <hddc/linalg.hpp>
#include <hddc/presets.hpp>
#include <hddc/synthgen.hpp>

#include "support/oracles.hpp"

using hddc::Matrix;
using hddc::Vector;

TEST(RandomOrientation, SquareCaseIsOrthogonal) {
    Matrix q = hddc::random_orientation(6, 6, 17);
    EXPECT_NEAR(std::abs(q.determinant()), 1.0, 1e-8);
    Matrix gram = q.transpose() * q;
    EXPECT_LE((gram - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RandomOrientation, DeterministicGivenSeed) {
    Matrix a = hddc::random_orientation(10, 3, 5);
    Matrix b = hddc::random_orientation(10, 3, 5);
    EXPECT_TRUE(a == b);
    Matrix c = hddc::random_orientation(10, 3, 6);
    EXPECT_FALSE(a == c);
}

TEST(RandomOrientation, ColumnsOrthonormalForRandomShapes) {
    std::mt19937_64 rng(81);
    for (int rep = 0; rep < 20; ++rep) {
        const int p = 2 + static_cast<int>(rng() % 30);
        const int d = 1 + static_cast<int>(rng() % p);
        Matrix q = hddc::random_orientation(p, d, rng());
        Matrix gram = q.transpose() * q;
        EXPECT_LE((gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Simulate, DegenerateProportionsPutAllInOneClass) {
    hddc::SimSpec spec;
    spec.k = 2;
    spec.p = 4;
    spec.n = 50;
    spec.seed = 1;
    for (int i = 0; i < 2; ++i) {
        hddc::ClassSpec c;
        c.pi = i == 0 ? 1.0 : 0.0;
        c.d = 1;
        c.a = Vector::Constant(1, 4.0);
        c.b = 1.0;
        spec.classes.push_back(c);
    }
    hddc::Dataset data = hddc::simulate(spec);
    for (int l : data.labels) EXPECT_EQ(l, 0);
}

TEST(Simulate, SampleScatterMatchesSpectrum) {
    hddc::SimSpec spec;
    spec.k = 1;
    spec.p = 3;
    spec.n = 10000;
    spec.seed = 42;
    hddc::ClassSpec c;
    c.pi = 1.0;
    c.d = 1;
    c.a = Vector::Constant(1, 4.0);
    c.b = 1.0;
    spec.classes.push_back(c);

    hddc::Dataset data = hddc::simulate(spec);
    Vector mean = data.x.colwise().mean();
    Matrix s = hddc::weighted_scatter(data.x, Vector::Ones(spec.n), mean);
    Vector values = hddc::eig_desc(s).values;
    EXPECT_NEAR(values(0), 4.0, 0.2);
    EXPECT_NEAR(values(1), 1.0, 0.05);
    EXPECT_NEAR(values(2), 1.0, 0.05);
}

TEST(Simulate, GeneratedCovarianceMatchesSpecifiedOne) {
    hddc::SimSpec spec = hddc::three_group_preset(12, 100000, 9);
    spec.classes.resize(1);
    spec.classes[0].pi = 1.0;
    spec.k = 1;
    hddc::SimDraw draw = hddc::simulate_draw(spec);
    Matrix expected =
        hddc::sim_class_covariance(spec, 0, draw.orientations[0]);
    Vector mean = draw.data.x.colwise().mean();
    Matrix s =
        hddc::weighted_scatter(draw.data.x, Vector::Ones(spec.n), mean);
    const double rel =
        (s - expected).cwiseAbs().maxCoeff() / expected.cwiseAbs().maxCoeff();
    EXPECT_LE(rel, 0.05);
}

TEST(Simulate, ClassCountsWithinBinomialBand) {
    hddc::SimSpec spec = hddc::three_group_preset(12, 2000, 13);
    hddc::Dataset data = hddc::simulate(spec);
    std::vector<int> counts(3, 0);
    for (int l : data.labels) ++counts[l];
    const double pis[3] = {0.4, 0.3, 0.3};
    for (int i = 0; i < 3; ++i) {
        const double expect = spec.n * pis[i];
        const double band = 4.0 * std::sqrt(spec.n * pis[i] * (1 - pis[i]));
        EXPECT_NEAR(counts[i], expect, band);
    }
}

TEST(Simulate, DeterministicGivenSeed) {
    hddc::SimSpec spec = hddc::three_group_preset(15, 100, 7);
    hddc::Dataset a = hddc::simulate(spec);
    hddc::Dataset b = hddc::simulate(spec);
    EXPECT_TRUE(a.x == b.x);
    EXPECT_EQ(a.labels, b.labels);
}

TEST(Simulate, RejectsInvalidSpecs) {
    hddc::SimSpec spec = hddc::three_group_preset(15, 100, 7);
    spec.classes[0].pi = 0.5;  // proportions no longer sum to 1
    EXPECT_THROW(hddc::simulate(spec), hddc::InvalidInputError);
    spec = hddc::three_group_preset(15, 100, 7);
    spec.classes[1].b = 200.0;  // violates a > b
    EXPECT_THROW(hddc::simulate(spec), hddc::InvalidInputError);
}

TEST(FullRank, UnitConditionNumberIsSpherical) {
    hddc::FullRankSpec spec = hddc::full_rank_preset(5, 4000, 1.0, 3);
    spec.k = 1;
    spec.mean_radius = 0.0;
    hddc::Dataset data = hddc::simulate_full_rank(spec);
    Vector mean = data.x.colwise().mean();
    Matrix s = hddc::weighted_scatter(data.x, Vector::Ones(spec.n), mean);
    Vector values = hddc::eig_desc(s).values;
    EXPECT_LT(values(0) / values(4), 1.25);  // sampling noise only
}

TEST(FullRank, GeneratingSpectrumRatioIsExact) {
    hddc::FullRankSpec spec = hddc::full_rank_preset(20, 5, 100.0, 11);
    hddc::FullRankDraw draw = hddc::simulate_full_rank_draw(spec);
    for (int i = 0; i < spec.k; ++i) {
        Matrix cov = draw.factors[i] * draw.factors[i].transpose();
        Vector values = hddc::eig_desc(cov).values;
        EXPECT_NEAR(values(0) / values(19), 100.0, 1e-8);
    }
}

TEST(FullRank, DistinctSeedsGiveDistinctDraws) {
    hddc::FullRankSpec a = hddc::full_rank_preset(6, 20, 100.0, 1);
    hddc::FullRankSpec b = hddc::full_rank_preset(6, 20, 100.0, 2);
    EXPECT_FALSE(hddc::simulate_full_rank(a).x == hddc::simulate_full_rank(b).x);
    EXPECT_TRUE(hddc::simulate_full_rank(a).x == hddc::simulate_full_rank(a).x);
}

TEST(FullRank, RejectsBadCondition) {
    hddc::FullRankSpec spec = hddc::full_rank_preset(6, 20, 0.5, 1);
    EXPECT_THROW(hddc::simulate_full_rank(spec), hddc::InvalidInputError);
}
