#include <gtest/gtest.h>

#include <fstream>

#include "fcm/error.hpp"
#include "fcm/fcmnet/checkpoint.hpp"
#include "support/temp_dir.hpp"

using fcm::net::FcmModel;
using fcm::net::ModelConfig;

namespace {
ModelConfig cfg(fcm::net::Ablation mode = fcm::net::Ablation::Full) {
    ModelConfig c;
    c.D = 3;
    c.L = 6;
    c.d_model = 8;
    c.heads = 2;
    c.d_k = c.d_v = 4;
    c.bottleneck = 3;
    c.d_ff = 12;
    c.mode = mode;
    return c;
}

template <typename T>
void expect_identical(const FcmModel<T>& a, const FcmModel<T>& b) {
    ASSERT_EQ(a.params().names(), b.params().names());
    for (const auto& n : a.params().names()) {
        const auto& x = a.params().at(n).value;
        const auto& y = b.params().at(n).value;
        ASSERT_EQ(x.shape(), y.shape()) << n;
        for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(x[i], y[i]) << n << "[" << i << "]";
    }
}
}  // namespace

TEST(Checkpoint, RoundTripIsBitExactBothPrecisions) {
    TempDir dir;
    for (auto mode : {fcm::net::Ablation::Full, fcm::net::Ablation::WoAtt, fcm::net::Ablation::BareAP}) {
        FcmModel<double> m(cfg(mode), 3);
        m.mark_trained();
        fcm::net::CheckpointExtras extras{{"norm.mean", {0.5, -1.25, 3.0}}, {"windows.stride", {2}}};
        fcm::net::save_checkpoint(dir / "m64.ckpt", m, extras);
        fcm::net::CheckpointExtras back;
        auto loaded = fcm::net::load_checkpoint<double>(dir / "m64.ckpt", &back);
        expect_identical(m, loaded);
        EXPECT_TRUE(loaded.trained());
        EXPECT_EQ(back, extras);
        EXPECT_EQ(loaded.config().mode, mode);

        auto c32 = cfg(mode);
        c32.precision = fcm::net::Precision::F32;
        FcmModel<float> f(c32, 4);
        fcm::net::save_checkpoint(dir / "m32.ckpt", f);
        auto lf = fcm::net::load_checkpoint<float>(dir / "m32.ckpt");
        expect_identical(f, lf);
        EXPECT_FALSE(lf.trained());
        EXPECT_EQ(fcm::net::read_checkpoint_header(dir / "m32.ckpt").config.precision, fcm::net::Precision::F32);
    }
}

TEST(Checkpoint, SavedTwiceGivesSameBytes) {
    TempDir dir;
    FcmModel<double> m(cfg(), 8);
    fcm::net::save_checkpoint(dir / "a.ckpt", m);
    fcm::net::save_checkpoint(dir / "b.ckpt", m);
    EXPECT_EQ(slurp(dir / "a.ckpt"), slurp(dir / "b.ckpt"));
}

TEST(Checkpoint, PrecisionMismatchIsDataError) {
    TempDir dir;
    FcmModel<double> m(cfg(), 1);
    fcm::net::save_checkpoint(dir / "m.ckpt", m);
    EXPECT_THROW(fcm::net::load_checkpoint<float>(dir / "m.ckpt"), fcm::DataError);
}

TEST(Checkpoint, CorruptionIsDetected) {
    TempDir dir;
    FcmModel<double> m(cfg(), 1);
    fcm::net::save_checkpoint(dir / "m.ckpt", m);
    const std::string bytes = slurp(dir / "m.ckpt");

    std::string flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x10;
    std::ofstream(dir / "flip.ckpt", std::ios::binary) << flipped;
    EXPECT_THROW(fcm::net::load_checkpoint<double>(dir / "flip.ckpt"), fcm::DataError);

    std::ofstream(dir / "short.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() - 9);
    EXPECT_THROW(fcm::net::load_checkpoint<double>(dir / "short.ckpt"), fcm::DataError);

    std::string magic = bytes;
    magic[0] = 'X';
    std::ofstream(dir / "magic.ckpt", std::ios::binary) << magic;
    EXPECT_THROW(fcm::net::load_checkpoint<double>(dir / "magic.ckpt"), fcm::DataError);

    EXPECT_THROW(fcm::net::load_checkpoint<double>(dir / "missing.ckpt"), fcm::DataError);
}
