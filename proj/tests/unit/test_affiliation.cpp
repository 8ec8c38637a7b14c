#include <gtest/gtest.h>

#include <random>

#include "fcm/evalkit/metrics.hpp"
#include "oracles/oracles.hpp"

namespace fe = fcm::eval;
using B = fe::BinaryVector;

TEST(Affiliation, ExactMatchIsOne) {
    B gt{0, 0, 1, 1, 0, 0, 0, 1, 0, 0};
    auto a = fe::affiliation(gt, gt);
    EXPECT_NEAR(*a.precision, 1.0, 1e-12);
    EXPECT_NEAR(*a.recall, 1.0, 1e-12);
}

TEST(Affiliation, PredictionInsideEventHasFullPrecision) {
    B gt(20, 0), pred(20, 0);
    for (int t = 5; t < 15; ++t) gt[t] = 1;
    pred[8] = pred[9] = 1;
    auto a = fe::affiliation(pred, gt);
    EXPECT_NEAR(*a.precision, 1.0, 1e-12);
    EXPECT_LT(*a.recall, 1.0);
}

TEST(Affiliation, EmptyCases) {
    B gt{0, 1, 1, 0, 0, 0};
    auto a = fe::affiliation(B(6, 0), gt);
    EXPECT_FALSE(a.precision);
    ASSERT_TRUE(a.recall);
    EXPECT_NEAR(*a.recall, oracle::affiliation(B(6, 0), gt).recall, 1e-2);
    auto none = fe::affiliation(gt, B(6, 0));
    EXPECT_FALSE(none.precision);
    EXPECT_FALSE(none.recall);
}

TEST(Affiliation, HandComputedSingleEvent) {
    // Event [4,6) on [0,10); prediction [0,1). Distance from the prediction to
    // the event runs 4..3 with mean 3.5; the zone has distances up to 4 on
    // the left and 4 on the right, so precision survival is
    // |{y : d(y) >= x}| / 10 averaged over x in [3,4]: (2(4 - x)) / 10,
    // mean 2 * 0.5 / 10 = 0.1.
    B gt(10, 0), pred(10, 0);
    gt[4] = gt[5] = 1;
    pred[0] = 1;
    auto a = fe::affiliation(pred, gt);
    EXPECT_NEAR(*a.precision, 0.1, 1e-12);
}

TEST(Affiliation, MatchesNumericalOracle) {
    std::mt19937_64 rng(5);
    int compared = 0;
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 20 + rng() % 30;
        auto gt = oracle::random_bits(rng, n, 0.12);
        auto pred = oracle::random_bits(rng, n, 0.2);
        auto ours = fe::affiliation(pred, gt);
        auto ref = oracle::affiliation(pred, gt);
        if (fe::segments(gt).empty()) {
            EXPECT_FALSE(ours.recall);
            continue;
        }
        ASSERT_EQ(ours.precision.has_value(), ref.has_precision) << trial;
        if (ours.precision) EXPECT_NEAR(*ours.precision, ref.precision, 1e-2) << trial;
        EXPECT_NEAR(*ours.recall, ref.recall, 1e-2) << trial;
        EXPECT_GE(*ours.recall, 0.0);
        EXPECT_LE(*ours.recall, 1.0);
        ++compared;
    }
    EXPECT_GT(compared, 100);
}
