#include "fcm/fcmnet/config.hpp"

#include <algorithm>

#include "fcm/error.hpp"

namespace fcm::net {

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::Full: return "full";
        case Ablation::BareFore: return "bare_fore";
        case Ablation::BareAP: return "bare_ap";
        case Ablation::WoAtt: return "wo_att";
        case Ablation::WoLc: return "wo_Lc";
    }
    return "?";
}

Ablation ablation_from_string(const std::string& s) {
    if (s == "full") return Ablation::Full;
    if (s == "bare_fore") return Ablation::BareFore;
    if (s == "bare_ap") return Ablation::BareAP;
    if (s == "wo_att") return Ablation::WoAtt;
    if (s == "wo_Lc" || s == "wo_lc") return Ablation::WoLc;
    throw ConfigError("unknown ablation mode '" + s + "' (expected full, bare_fore, bare_ap, wo_att, wo_Lc)");
}

std::string to_string(ConcatAxis a) { return a == ConcatAxis::Time ? "time" : "feature"; }

ConcatAxis concat_axis_from_string(const std::string& s) {
    if (s == "time") return ConcatAxis::Time;
    if (s == "feature") return ConcatAxis::Feature;
    throw ConfigError("unknown concat axis '" + s + "' (expected time or feature)");
}

std::string to_string(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

Precision precision_from_string(const std::string& s) {
    if (s == "f32" || s == "32") return Precision::F32;
    if (s == "f64" || s == "64") return Precision::F64;
    throw ConfigError("unknown precision '" + s + "' (expected f32 or f64)");
}

void ModelConfig::validate() const {
    if (D == 0 || L == 0 || d_model == 0 || heads == 0 || d_k == 0 || d_ff == 0 || n_layers == 0 ||
        bottleneck == 0)
        throw ConfigError("model: all widths must be positive");
    if (d_model != heads * d_k)
        throw ConfigError("model: d_model (" + std::to_string(d_model) + ") must equal heads*d_k (" +
                          std::to_string(heads * d_k) + ")");
    if (d_v != d_k) throw ConfigError("model: d_v must equal d_k");
    if (bottleneck > d_model) throw ConfigError("model: bottleneck width must not exceed d_model");
}

void ModelConfig::set_channels(std::size_t channels) {
    D = channels;
    if (auto_bottleneck) bottleneck = std::min(d_model / 4, std::max<std::size_t>(1, D - 1));
}

ModelConfig paper_profile(std::size_t D) {
    ModelConfig c;
    c.D = D;
    c.L = 100;
    c.d_model = 512;
    c.heads = 8;
    c.d_k = c.d_v = 64;
    c.bottleneck = 128;
    c.d_ff = 512;
    return c;
}

ModelConfig desk_profile(std::size_t D) {
    ModelConfig c;
    c.auto_bottleneck = true;
    c.set_channels(D);
    return c;
}

}  // namespace fcm::net
