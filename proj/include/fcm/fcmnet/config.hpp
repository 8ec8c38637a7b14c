#pragma once

#include <cstddef>
#include <string>

namespace fcm::net {

/// Which parts of the network exist and which losses/score are used.
enum class Ablation {
    Full,      // shared encoder, forecast + observation + joint reconstruction
    BareFore,  // forecast path only; scored on the forecast itself
    BareAP,    // observation reconstruction only (time tokens)
    WoAtt,     // full model with separate encoders for the two token paths
    WoLc,      // forecast + observation reconstruction, no joint path
};

std::string to_string(Ablation a);
Ablation ablation_from_string(const std::string& s);

/// Axis along which the observation and its forecast are joined before the
/// joint embedding.
enum class ConcatAxis {
    Time,     // 2L positions of D values
    Feature,  // L positions of 2D values
};

std::string to_string(ConcatAxis a);
ConcatAxis concat_axis_from_string(const std::string& s);

enum class Precision { F32, F64 };

std::string to_string(Precision p);
Precision precision_from_string(const std::string& s);

struct ModelConfig {
    std::size_t D = 3;
    std::size_t L = 50;
    std::size_t d_model = 64;
    std::size_t heads = 4;
    std::size_t d_k = 16;
    std::size_t d_v = 16;
    std::size_t bottleneck = 16;
    /// Re-derive the bottleneck from D in set_channels.
    bool auto_bottleneck = false;
    std::size_t d_ff = 128;
    std::size_t n_layers = 1;
    ConcatAxis concat = ConcatAxis::Time;
    Ablation mode = Ablation::Full;
    Precision precision = Precision::F32;

    /// Throws ConfigError when d_model ≠ heads·d_k, d_v ≠ d_k, b ≥ d_model, or
    /// any width is zero.
    void validate() const;

    /// Sets D; with auto_bottleneck the width becomes min(d_model/4, max(1, D-1))
    /// so it stays below the rank of a time-concat joint embedding.
    void set_channels(std::size_t channels);

    bool has_variate_path() const { return mode != Ablation::BareAP; }
    bool has_time_path() const { return mode != Ablation::BareFore; }
    bool has_joint_path() const { return mode == Ablation::Full || mode == Ablation::WoAtt; }
    bool shared_encoder() const { return mode != Ablation::WoAtt; }
};

/// Paper-scale profile: L = 100, d_model = 512, h = 8.
ModelConfig paper_profile(std::size_t D);
/// Desk-scale profile: L = 50, d_model = 64, h = 4, channel-derived bottleneck.
ModelConfig desk_profile(std::size_t D);

}  // namespace fcm::net
