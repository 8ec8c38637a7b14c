#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fcm/dataio/synth.hpp"
#include "fcm/error.hpp"
#include "support/temp_dir.hpp"

namespace fd = fcm::data;

namespace {
fd::SynthConfig small(std::size_t T_test = 1000) {
    fd::SynthConfig c;
    c.D = 3;
    c.T_train = 800;
    c.T_test = T_test;
    c.seed = 11;
    return c;
}
}  // namespace

TEST(Synth, NoAnomaliesMeansNoLabels) {
    auto out = fd::synth_generate(small());
    ASSERT_TRUE(out.test.labels);
    for (auto v : *out.test.labels) EXPECT_EQ(v, 0);
    for (auto v : *out.train.labels) EXPECT_EQ(v, 0);
    EXPECT_EQ(out.train.length(), 800u);
    EXPECT_EQ(out.test.length(), 1000u);
}

TEST(Synth, GroupAnomalyLabels) {
    auto c = small();
    c.anomalies.push_back({fd::AnomalyType::Group, 500, 20, 2.0, 0.6, {}});
    auto out = fd::synth_generate(c);
    for (std::size_t t = 0; t < 1000; ++t) EXPECT_EQ((*out.test.labels)[t], t >= 500 && t < 520 ? 1 : 0) << t;
}

TEST(Synth, SameSeedIsBitIdentical) {
    auto c = fd::make_synth_config(3, 600, 900, 3, 40, 2.0, 0.3, 5);
    auto a = fd::synth_generate(c);
    auto b = fd::synth_generate(c);
    EXPECT_EQ(a.train.values, b.train.values);
    EXPECT_EQ(a.test.values, b.test.values);
    EXPECT_EQ(*a.test.labels, *b.test.labels);
    c.seed = 6;
    EXPECT_NE(fd::synth_generate(c).test.values, a.test.values);
}

TEST(Synth, PrecursorOnlyChangesTheRegionBeforeOnset) {
    for (auto style : {fd::PrecursorStyle::Drift, fd::PrecursorStyle::Ripple})
        for (double mixing : {0.0, 0.3}) {
            auto base = small();
            base.mixing = mixing;
            base.precursor_style = style;
            base.anomalies.push_back({fd::AnomalyType::Shapelet, 600, 30, 2.0, 0.0, {1}});
            auto with = base;
            with.anomalies[0].precursor_magnitude = 0.6;
            auto a = fd::synth_generate(base), b = fd::synth_generate(with);
            // drift bends the base signal, so mixing carries it into the other channels
            const bool spreads = style == fd::PrecursorStyle::Drift && mixing > 0;
            for (std::size_t c = 0; c < 3; ++c)
                for (std::size_t t = 0; t < 1000; ++t) {
                    const bool in_precursor = (c == 1 || spreads) && t >= 550 && t < 600;
                    if (!in_precursor) EXPECT_EQ(a.test.values(c, t), b.test.values(c, t)) << c << "," << t;
                }
            double diff = 0;
            for (std::size_t t = 550; t < 600; ++t) diff += std::abs(a.test.values(1, t) - b.test.values(1, t));
            EXPECT_GT(diff, 1.0);
            EXPECT_EQ(*a.test.labels, *b.test.labels);
        }
}

TEST(Synth, MakeConfigCyclesTypes) {
    auto c = fd::make_synth_config(3, 2000, 10000, 12, 50, 2.0, 0.3, 0);
    ASSERT_EQ(c.anomalies.size(), 12u);
    std::set<fd::AnomalyType> types;
    for (std::size_t k = 0; k < 12; ++k) {
        types.insert(c.anomalies[k].type);
        EXPECT_NEAR(c.anomalies[k].precursor_magnitude, 0.3 * c.anomalies[k].magnitude, 1e-12);
        if (k) EXPECT_GT(c.anomalies[k].onset, c.anomalies[k - 1].onset + c.anomalies[k - 1].duration + 50);
    }
    EXPECT_EQ(types.size(), 3u);
    auto out = fd::synth_generate(c);
    std::size_t positives = 0;
    for (auto v : *out.test.labels) positives += v;
    std::size_t expected = 0;
    for (const auto& a : c.anomalies) expected += a.duration;
    EXPECT_EQ(positives, expected);
}

TEST(Synth, InvalidConfigs) {
    auto c = small();
    c.anomalies.push_back({fd::AnomalyType::Group, 10, 5, 2.0, 0.1, {}});  // onset < precursor length
    EXPECT_THROW(fd::synth_generate(c), fcm::ConfigError);
    c = small();
    c.anomalies.push_back({fd::AnomalyType::Group, 990, 20, 2.0, 0.1, {}});  // runs past the end
    EXPECT_THROW(fd::synth_generate(c), fcm::ConfigError);
    c = small();
    c.anomalies.push_back({fd::AnomalyType::Group, 300, 20, 2.0, 0.1, {}});
    c.anomalies.push_back({fd::AnomalyType::Trend, 330, 20, 2.0, 0.1, {}});  // precursor overlaps previous
    EXPECT_THROW(fd::synth_generate(c), fcm::ConfigError);
    c = small();
    c.anomalies.push_back({fd::AnomalyType::Shapelet, 300, 20, 2.0, 0.1, {7}});
    EXPECT_THROW(fd::synth_generate(c), fcm::ConfigError);
}

TEST(Synth, JsonRoundTripAndUnknownKeys) {
    auto c = fd::make_synth_config(2, 500, 800, 2, 30, 1.5, 0.2, 9);
    c.validate_and_fill();
    auto j = fd::synth_config_to_json(c);
    auto back = fd::synth_config_from_json(j);
    EXPECT_EQ(fd::synth_config_to_json(back), j);
    std::set<std::string> types;
    const auto three = fd::synth_config_to_json(fd::make_synth_config(3, 500, 3000, 3, 30, 2, 0.3, 0));
    for (const auto& a : three["anomalies"])
        types.insert(a["type"].get<std::string>());
    EXPECT_EQ(types, (std::set<std::string>{"group", "shapelet", "trend"}));
    j["bogus"] = 1;
    EXPECT_THROW(fd::synth_config_from_json(j), fcm::ConfigError);
    TempDir dir;
    EXPECT_THROW(fd::load_synth_config(dir.write("bad.json", "{not json")), fcm::ConfigError);
}
