#include <gtest/gtest.h>

#include <random>

#include "fcm/error.hpp"
#include "fcm/ndcore/ops.hpp"
#include "fcm/ndcore/tensor.hpp"

using fcm::nd::Tensor;

TEST(Tensor, ShapeAndIndexing) {
    Tensor<double> t({2, 3});
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.cols(), 3u);
    t(1, 2) = 5;
    EXPECT_EQ(t[5], 5);
    Tensor<double> c({2, 2, 2});
    c(1, 0, 1) = 7;
    EXPECT_EQ(c[5], 7);
}

TEST(Tensor, RejectsBadShapes) {
    EXPECT_THROW(Tensor<double>(fcm::nd::Shape{}), fcm::ShapeError);
    EXPECT_THROW(Tensor<double>({2, 0}), fcm::ShapeError);
    EXPECT_THROW(Tensor<double>({1, 1, 1, 1}), fcm::ShapeError);
    EXPECT_THROW(Tensor<double>({2, 2}, std::vector<double>{1, 2, 3}), fcm::ShapeError);
    EXPECT_THROW(Tensor<double>({3}).rows(), fcm::ShapeError);
}

TEST(Tensor, TransposeAndCast) {
    auto a = Tensor<double>::from_rows({{1, 2, 3}, {4, 5, 6}});
    auto t = fcm::nd::transpose(a);
    EXPECT_EQ(t.rows(), 3u);
    EXPECT_EQ(t(2, 1), 6);
    auto f = a.cast<float>();
    EXPECT_EQ(f(1, 0), 4.0f);
}

TEST(Ops, MatmulIdentityAndHandCase) {
    auto eye = Tensor<double>::from_rows({{1, 0}, {0, 1}});
    auto m = Tensor<double>::from_rows({{1, 2}, {3, 4}});
    EXPECT_EQ(fcm::nd::matmul(eye, m), m);
    auto p = fcm::nd::matmul(m, Tensor<double>::from_rows({{5, 6}, {7, 8}}));
    EXPECT_EQ(p, (Tensor<double>::from_rows({{19, 22}, {43, 50}})));
}

TEST(Ops, MatmulShapeMismatch) {
    EXPECT_THROW(fcm::nd::matmul(Tensor<double>({2, 3}), Tensor<double>({2, 3})), fcm::ShapeError);
}

TEST(Ops, SoftmaxCases) {
    auto s = fcm::nd::softmax_rows(Tensor<double>::from_rows({{0, 0}}));
    EXPECT_DOUBLE_EQ(s(0, 0), 0.5);
    auto big = fcm::nd::softmax_rows(Tensor<double>::from_rows({{1000, 1000, 1000}}));
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(big(0, j), 1.0 / 3, 1e-15);
    auto l3 = fcm::nd::softmax_rows(Tensor<double>::from_rows({{0, std::log(3.0)}}));
    EXPECT_NEAR(l3(0, 0), 0.25, 1e-15);
    EXPECT_NEAR(l3(0, 1), 0.75, 1e-15);
    EXPECT_THROW(fcm::nd::softmax_rows(Tensor<double>::from_rows({{0, std::nan("")}})), fcm::NumericError);
}

TEST(Ops, MseCases) {
    auto a = Tensor<double>::from_rows({{0, 2}});
    EXPECT_EQ(fcm::nd::mse_loss(a, a), 0.0);
    EXPECT_DOUBLE_EQ(fcm::nd::mse_loss(a, Tensor<double>::from_rows({{0, 0}})), 2.0);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Tensor<double> x({4, 5}), y({4, 5});
    double ref = 0;
    for (std::size_t i = 0; i < 20; ++i) {
        x[i] = g(rng);
        y[i] = g(rng);
        ref += (x[i] - y[i]) * (x[i] - y[i]);
    }
    EXPECT_NEAR(fcm::nd::mse_loss(x, y), ref / 20, 1e-12);
    EXPECT_THROW(fcm::nd::mse_loss(x, Tensor<double>({5, 4})), fcm::ShapeError);
}
