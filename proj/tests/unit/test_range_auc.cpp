#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fcm/error.hpp"
#include "fcm/evalkit/metrics.hpp"
#include "oracles/oracles.hpp"

namespace fe = fcm::eval;
using B = fe::BinaryVector;

namespace {
B labels_with_both(std::mt19937_64& rng, std::size_t n) {
    for (;;) {
        auto b = oracle::random_bits(rng, n, 0.1);
        const auto pos = std::count(b.begin(), b.end(), 1);
        if (pos > 0 && pos < static_cast<long>(n)) return b;
    }
}
}  // namespace

TEST(RangeAuc, PerfectSeparationAtZeroBuffer) {
    B gt{0, 0, 1, 1, 0, 0, 0, 1, 0, 0};
    std::vector<double> s(gt.begin(), gt.end());
    auto r = fe::range_auc(s, gt, 0);
    EXPECT_NEAR(r.roc, 1.0, 1e-9);
    EXPECT_NEAR(r.pr, 1.0, 1e-9);
    auto v = fe::vus(s, gt, 0);
    EXPECT_NEAR(v.roc, 1.0, 1e-9);
}

TEST(RangeAuc, ConstantScoresGiveHalf) {
    B gt{0, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0};
    std::vector<double> s(gt.size(), 0.25);
    EXPECT_NEAR(fe::range_auc(s, gt, 0).roc, 0.5, 1e-6);
}

TEST(RangeAuc, ConstantLabelsRejected) {
    std::vector<double> s{0.1, 0.2, 0.3};
    EXPECT_THROW(fe::range_auc(s, B{0, 0, 0}, 2), fcm::ConfigError);
    EXPECT_THROW(fe::range_auc(s, B{1, 1, 1}, 2), fcm::ConfigError);
}

TEST(RangeAuc, SoftLabelsMatchOracle) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto gt = oracle::random_bits(rng, 60, 0.1);
        const std::size_t w = rng() % 12;
        auto ours = fe::extend_positive_range(gt, w);
        auto ref = oracle::soft_labels(gt, w);
        for (std::size_t t = 0; t < gt.size(); ++t) EXPECT_NEAR(ours[t], ref[t], 1e-15);
    }
}

TEST(RangeAuc, MatchesEnumerationOracle) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 30 + rng() % 50;
        auto gt = labels_with_both(rng, n);
        std::vector<double> s(n);
        for (std::size_t t = 0; t < n; ++t) s[t] = double(rng() % 12) + 0.5 * gt[t];  // ties on purpose
        const std::size_t w = rng() % 10;
        auto ours = fe::range_auc(s, gt, w);
        auto ref = oracle::range_auc(s, gt, w);
        EXPECT_NEAR(ours.roc, ref.roc, 1e-9) << trial;
        EXPECT_NEAR(ours.pr, ref.pr, 1e-9) << trial;
        EXPECT_GE(ours.roc, 0.0);
        EXPECT_LE(ours.roc, 1.0);
        EXPECT_LE(ours.pr, 1.0 + 1e-12);
    }
}

TEST(RangeAuc, InvariantUnderMonotoneTransform) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 30; ++trial) {
        auto gt = labels_with_both(rng, 80);
        std::vector<double> s(80), e(80);
        for (std::size_t t = 0; t < 80; ++t) e[t] = std::exp(s[t] = g(rng));
        auto a = fe::vus(s, gt, 4), b = fe::vus(e, gt, 4);
        EXPECT_EQ(a.roc, b.roc);
        EXPECT_EQ(a.pr, b.pr);
    }
}

TEST(Vus, MeanOfWidthsAndSingleSlice) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    auto gt = labels_with_both(rng, 120);
    std::vector<double> s(120);
    for (std::size_t t = 0; t < 120; ++t) s[t] = g(rng) + gt[t];
    auto v0 = fe::vus(s, gt, 0);
    auto r0 = fe::range_auc(s, gt, 0);
    EXPECT_EQ(v0.roc, r0.roc);
    EXPECT_EQ(v0.pr, r0.pr);
    auto v2 = fe::vus(s, gt, 2);
    const double roc = (r0.roc + fe::range_auc(s, gt, 1).roc + fe::range_auc(s, gt, 2).roc) / 3;
    EXPECT_NEAR(v2.roc, roc, 1e-15);
}

TEST(Vus, ParallelMatchesSerialBitForBit) {
    std::mt19937_64 rng(22);
    std::normal_distribution<double> g;
    auto gt = labels_with_both(rng, 3000);
    std::vector<double> s(3000);
    for (std::size_t t = 0; t < s.size(); ++t) s[t] = g(rng) + 0.7 * gt[t];
    auto a = fe::vus(s, gt, 25), b = fe::serial::vus(s, gt, 25);
    EXPECT_EQ(a.roc, b.roc);
    EXPECT_EQ(a.pr, b.pr);
}
