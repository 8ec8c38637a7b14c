#include <gtest/gtest.h>

#include <random>

#include "fcm/evalkit/metrics.hpp"
#include "oracles/oracles.hpp"

namespace fe = fcm::eval;
using B = fe::BinaryVector;

TEST(ShiftGroundTruth, SegmentExample) {
    B raw(12, 0);
    for (int t = 6; t <= 9; ++t) raw[t] = 1;
    auto gt = fe::shift_ground_truth(raw, 3);
    EXPECT_EQ(gt.labels, (B{0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 0, 0}));  // point 9 keeps its label but is excluded
    EXPECT_EQ(gt.excluded, (B{0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0}));
}

TEST(ShiftGroundTruth, NoAnomaliesAndClippedPrecursor) {
    auto none = fe::shift_ground_truth(B(8, 0), 3);
    EXPECT_EQ(none.labels, B(8, 0));
    EXPECT_EQ(none.excluded, B(8, 0));
    B early{0, 1, 0, 0, 0, 0};
    auto gt = fe::shift_ground_truth(early, 3);
    EXPECT_EQ(gt.labels, (B{1, 1, 0, 0, 0, 0}));
}

TEST(ShiftGroundTruth, PrecursorOverlappingEarlierTailStaysLabeled) {
    // Segment [0..9] with L = 3 has masked tail 3..9; the next onset at 11
    // puts its precursor on 8..10, which must stay counted.
    B raw(16, 0);
    for (int t = 0; t <= 9; ++t) raw[t] = 1;
    raw[11] = 1;
    auto gt = fe::shift_ground_truth(raw, 3);
    for (int t = 3; t <= 7; ++t) EXPECT_EQ(gt.excluded[t], 1) << t;
    for (int t = 8; t <= 11; ++t) {
        EXPECT_EQ(gt.excluded[t], 0) << t;
        EXPECT_EQ(gt.labels[t], 1) << t;
    }
}

TEST(ShiftGroundTruth, InvariantsOnRandomLabels) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t L = 1 + rng() % 6;
        auto raw = oracle::random_bits(rng, 40 + rng() % 40, 0.12);
        auto gt = fe::shift_ground_truth(raw, L);
        for (auto seg : fe::segments(raw)) {
            for (std::size_t t = seg.first >= L ? seg.first - L : 0; t < seg.first; ++t) {
                EXPECT_EQ(gt.labels[t], 1);
                EXPECT_EQ(gt.excluded[t], 0);
            }
            for (std::size_t t = seg.first; t <= std::min(seg.last, seg.first + L - 1); ++t)
                EXPECT_EQ(gt.excluded[t], 0);
        }
        for (std::size_t t = 0; t < raw.size(); ++t)
            if (raw[t] && !gt.excluded[t]) EXPECT_EQ(gt.labels[t], 1);
    }
}

TEST(Segments, Runs) {
    auto s = fe::segments(B{1, 1, 0, 1, 0, 0, 1});
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].first, 0u);
    EXPECT_EQ(s[0].last, 1u);
    EXPECT_EQ(s[2].first, 6u);
    EXPECT_EQ(s[2].last, 6u);
    EXPECT_TRUE(fe::segments(B{0, 0}).empty());
}

TEST(PointAdjust, Example) {
    B gt{0, 1, 1, 0, 1}, pred{0, 0, 1, 0, 0};
    auto adj = fe::point_adjust(pred, gt);
    EXPECT_EQ(adj, (B{0, 1, 1, 0, 0}));
    auto c = fe::prf1(adj, gt);
    EXPECT_DOUBLE_EQ(c.precision, 1.0);
    EXPECT_DOUBLE_EQ(c.recall, 2.0 / 3);
    EXPECT_NEAR(c.f1, 0.8, 1e-15);
    EXPECT_EQ(fe::point_adjust(B(5, 0), gt), B(5, 0));
}

TEST(PointAdjust, MaskedHitDoesNotCount) {
    B gt{1, 1, 1, 0}, pred{1, 0, 0, 0}, mask{1, 0, 0, 0};
    EXPECT_EQ(fe::point_adjust(pred, gt, mask), pred);
}

TEST(PointAdjust, MatchesOracleIdempotentMonotone) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 50;
        auto gt = oracle::random_bits(rng, n, 0.15);
        auto pred = oracle::random_bits(rng, n, 0.2);
        B mask = trial % 2 ? oracle::random_bits(rng, n, 0.1) : B{};
        auto adj = fe::point_adjust(pred, gt, mask);
        ASSERT_EQ(adj, oracle::point_adjust(pred, gt, mask)) << trial;
        EXPECT_EQ(fe::point_adjust(adj, gt, mask), adj);
        // one more alarm never lowers anything after adjustment
        B more = pred;
        const std::size_t k = rng() % n;
        more[k] = 1;
        auto adj2 = fe::point_adjust(more, gt, mask);
        for (std::size_t t = 0; t < n; ++t) EXPECT_GE(adj2[t], adj[t]);
        auto c1 = fe::prf1(adj, gt, mask), c2 = fe::prf1(adj2, gt, mask);
        EXPECT_GE(c2.recall, c1.recall);
        if (gt[k] && !(mask.size() && mask[k])) EXPECT_GE(c2.f1 + 1e-15, c1.f1);
    }
}

TEST(Prf1, Conventions) {
    B gt{1, 1, 0, 0, 1, 0};
    auto perfect = fe::prf1(gt, gt);
    EXPECT_EQ(perfect.accuracy, 1.0);
    EXPECT_EQ(perfect.f1, 1.0);
    auto none = fe::prf1(B(6, 0), gt);
    EXPECT_EQ(none.precision, 0.0);
    EXPECT_EQ(none.recall, 0.0);
    EXPECT_EQ(none.f1, 0.0);
    // TP 2, FP 1, FN 1
    auto c = fe::prf1(B{1, 1, 1, 0, 0, 0}, gt);
    EXPECT_DOUBLE_EQ(c.precision, 2.0 / 3);
    EXPECT_DOUBLE_EQ(c.recall, 2.0 / 3);
    EXPECT_NEAR(c.f1, 2.0 / 3, 1e-15);
    EXPECT_DOUBLE_EQ(c.accuracy, 4.0 / 6);
    // masked points are ignored entirely
    auto m = fe::prf1(B{1, 1, 1, 0, 0, 0}, gt, B{0, 0, 1, 0, 1, 0});
    EXPECT_EQ(m.f1, 1.0);
    EXPECT_EQ(m.accuracy, 1.0);
}
