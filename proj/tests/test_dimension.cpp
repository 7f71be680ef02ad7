#include <gtest/gtest.h>

#include <hddc/dimension.hpp>

#include <random>

using hddc::Vector;

TEST(Scree, TwoEigenvalueBreak) {
    Vector ev(5);
    ev << 150, 148, 5, 4.5, 4;
    // normalized differences: (0.014, 1.0, 0.0035, 0.0035)
    EXPECT_EQ(hddc::scree_dimension(ev, 0.2), 2);
}

TEST(Scree, SingleDominantBreak) {
    Vector ev(4);
    ev << 10, 1, 1, 1;
    for (double t : {0.01, 0.3, 0.9}) EXPECT_EQ(hddc::scree_dimension(ev, t), 1);
}

TEST(Scree, FlatScreeFallsBackToDMin) {
    Vector ev(4);
    ev << 3, 3, 3, 3;
    EXPECT_EQ(hddc::scree_dimension(ev, 0.1), 1);
    EXPECT_EQ(hddc::scree_dimension(ev, 0.1, 2), 2);
}

TEST(Scree, ScaleInvariant) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const int m = 3 + static_cast<int>(rng() % 10);
        std::vector<double> vals(m);
        for (double& v : vals) v = unit(rng);
        std::sort(vals.begin(), vals.end(), std::greater<double>());
        Vector ev = Eigen::Map<Vector>(vals.data(), m);
        const double t = 0.05 + 0.9 * unit(rng);
        const int d = hddc::scree_dimension(ev, t);
        EXPECT_EQ(hddc::scree_dimension(7.25 * ev, t), d);
        EXPECT_GE(d, 1);
        EXPECT_LE(d, m - 1);
    }
}

TEST(Scree, ClampsToRange) {
    Vector ev(6);
    ev << 100, 90, 80, 70, 2, 1;
    EXPECT_EQ(hddc::scree_dimension(ev, 0.5), 4);
    EXPECT_EQ(hddc::scree_dimension(ev, 0.5, 1, 2), 2);
    EXPECT_EQ(hddc::scree_dimension(ev, 0.99, 3, 5), 4);
}

TEST(Scree, RejectsBadInputs) {
    Vector one(1);
    one << 3;
    EXPECT_THROW(hddc::scree_dimension(one, 0.2), hddc::InvalidInputError);
    Vector ev(3);
    ev << 3, 2, 1;
    EXPECT_THROW(hddc::scree_dimension(ev, 0.0), hddc::InvalidInputError);
    EXPECT_THROW(hddc::scree_dimension(ev, 1.0), hddc::InvalidInputError);
}

TEST(Bic, DirectFormula) {
    EXPECT_NEAR(hddc::bic(-50.0, 10, 100), 100.0 + 10.0 * std::log(100.0),
                1e-12);
    EXPECT_NEAR(hddc::bic(-50.0, 10, 100), 146.0517019, 1e-6);
}

TEST(Bic, ZeroPenaltyEdge) {
    EXPECT_EQ(hddc::bic(-7.5, 0, 42), 15.0);
}

TEST(Bic, LowerNuWinsAtEqualLoglik) {
    for (long n : {2L, 10L, 1000L}) {
        EXPECT_LT(hddc::bic(-100.0, 3, n), hddc::bic(-100.0, 4, n));
    }
}
