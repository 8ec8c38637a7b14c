#include <gtest/gtest.h>

#include <cmath>

#include "fcm/dataio/synth.hpp"
#include "fcm/error.hpp"
#include "fcm/trainer/trainer.hpp"

namespace fd = fcm::data;
namespace ft = fcm::train;
using fcm::net::Ablation;
using fcm::net::FcmModel;
using fcm::nd::Tape;
using fcm::nd::Tensor;

namespace {
fcm::net::ModelConfig tiny(Ablation mode = Ablation::Full, std::size_t L = 8) {
    fcm::net::ModelConfig c;
    c.D = 2;
    c.L = L;
    c.d_model = 8;
    c.heads = 2;
    c.d_k = c.d_v = 4;
    c.bottleneck = 3;
    c.d_ff = 16;
    c.mode = mode;
    return c;
}

fd::MultivariateSeries sine(std::size_t T) {
    Tensor<double> v({2, T});
    for (std::size_t t = 0; t < T; ++t) {
        v(0, t) = std::sin(0.3 * double(t));
        v(1, t) = std::cos(0.17 * double(t));
    }
    return fd::MultivariateSeries(v);
}
}  // namespace

TEST(Staging, JointTermOnlyAfterAccessPoint) {
    Tape<double> t(nullptr, false);
    fcm::net::LossVars l;
    l.fore = t.constant(Tensor<double>::scalar(1.0));
    l.det = t.constant(Tensor<double>::scalar(2.0));
    l.joint = t.constant(Tensor<double>::scalar(4.0));
    EXPECT_EQ(t.value(ft::staged_total(t, 0, 5, l)).item(), 3.0);
    EXPECT_EQ(t.value(ft::staged_total(t, 5, 5, l)).item(), 3.0);
    EXPECT_EQ(t.value(ft::staged_total(t, 6, 5, l)).item(), 7.0);
    EXPECT_FALSE(ft::joint_loss_active(5, 5));
    EXPECT_TRUE(ft::joint_loss_active(6, 5));
    EXPECT_TRUE(ft::joint_loss_active(0, -1));
    fcm::net::LossVars only;
    only.fore = l.fore;
    EXPECT_EQ(t.value(ft::staged_total(t, 100, 0, only)).item(), 1.0);
}

TEST(Trainer, OneStepPerBatch) {
    auto s = sine(24);  // trainable windows at 0 and 7 with S = 7
    auto plan = fd::plan_windows(s.length(), 8, 7);
    ASSERT_EQ(plan.trainable_count, 2u);
    FcmModel<double> m(tiny(), 1);
    ft::TrainConfig c;
    c.epochs = 1;
    c.batch_size = 1;
    c.lr = 1e-3;
    auto log = ft::train(m, s, plan, c);
    EXPECT_EQ(log.records.size(), 2u);
    EXPECT_TRUE(m.trained());

    FcmModel<double> m2(tiny(), 1);
    c.batch_size = 4;
    c.epochs = 3;
    EXPECT_EQ(ft::train(m2, s, plan, c).records.size(), 3u);
}

TEST(Trainer, ForecastLossDecreases) {
    auto s = sine(400);
    auto plan = fd::plan_windows(s.length(), 8, 4);
    FcmModel<double> m(tiny(Ablation::BareFore), 2);
    ft::TrainConfig c;
    c.epochs = 1;
    c.batch_size = 2;
    c.lr = 3e-3;
    c.ablation = Ablation::BareFore;
    auto log = ft::train(m, s, plan, c);
    ASSERT_GE(log.records.size(), 40u);
    double head = 0, tail = 0;
    for (std::size_t i = 0; i < 10; ++i) {
        head += *log.records[i].l_fore;
        tail += *log.records[log.records.size() - 1 - i].l_fore;
    }
    EXPECT_LT(tail, 0.5 * head);
    for (const auto& r : log.records) {
        EXPECT_FALSE(r.l_det);
        EXPECT_FALSE(r.l_c);
    }
}

TEST(Trainer, JointGradientsStayZeroUntilAccessPoint) {
    auto s = sine(200);
    auto plan = fd::plan_windows(s.length(), 8, 4);
    FcmModel<double> m(tiny(), 3);
    ft::TrainConfig c;
    c.epochs = 1;
    c.batch_size = 4;
    c.lr = 1e-3;
    c.access_point = 5;
    std::size_t seen = 0;
    auto observer = [&](const ft::IterationInfo& info, const fcm::nd::ParamStore<double>& p) {
        double g = 0;
        for (auto n : {"joint.w", "dec.w1", "dec.w2"})
            for (double v : p.at(n).grad.data()) g += std::abs(v);
        EXPECT_EQ(info.joint_active, info.iteration > 5) << info.iteration;
        if (info.iteration <= 5) EXPECT_EQ(g, 0.0) << info.iteration;
        else EXPECT_GT(g, 0.0) << info.iteration;
        ++seen;
    };
    auto log = ft::train<double>(m, s, plan, c, observer);
    EXPECT_GT(seen, 6u);
    for (const auto& r : log.records) {
        EXPECT_TRUE(r.l_fore && r.l_det);
        if (r.iteration > 5) EXPECT_TRUE(r.l_c);
    }
}

TEST(Trainer, SameSeedSameWeights) {
    auto s = sine(120);
    auto plan = fd::plan_windows(s.length(), 8, 4);
    ft::TrainConfig c;
    c.epochs = 2;
    c.lr = 1e-3;
    c.seed = 9;
    FcmModel<double> a(tiny(), 5), b(tiny(), 5);
    ft::train(a, s, plan, c);
    ft::train(b, s, plan, c);
    for (const auto& n : a.params().names())
        for (std::size_t i = 0; i < a.params().at(n).value.numel(); ++i)
            ASSERT_EQ(a.params().at(n).value[i], b.params().at(n).value[i]) << n;
}

TEST(Trainer, RejectsBadInputs) {
    FcmModel<double> m(tiny(), 1);
    ft::TrainConfig c;
    auto s = sine(12);
    EXPECT_THROW(ft::train(m, s, fd::plan_windows(12, 8, 4), c), fcm::ConfigError);  // no full target
    c.batch_size = 0;
    auto ok = sine(64);
    EXPECT_THROW(ft::train(m, ok, fd::plan_windows(64, 8, 4), c), fcm::ConfigError);
    c.batch_size = 2;
    c.ablation = Ablation::BareAP;  // model was built for the full mode
    EXPECT_THROW(ft::train(m, ok, fd::plan_windows(64, 8, 4), c), fcm::ConfigError);
}
