#include "fcm/fcmnet/model.hpp"

#include <cmath>
#include <random>

#include "fcm/error.hpp"

namespace fcm::net {

std::string to_string(ScoreGranularity g) { return g == ScoreGranularity::PerPoint ? "point" : "window"; }

ScoreGranularity score_granularity_from_string(const std::string& s) {
    if (s == "point") return ScoreGranularity::PerPoint;
    if (s == "window") return ScoreGranularity::PerWindow;
    throw ConfigError("unknown score granularity '" + s + "' (expected point or window)");
}

namespace {

void add_encoder_layout(std::vector<std::pair<std::string, nd::Shape>>& out, const std::string& prefix,
                        const ModelConfig& c) {
    for (std::size_t l = 0; l < c.n_layers; ++l) {
        const std::string p = prefix + ".l" + std::to_string(l) + ".";
        out.push_back({p + "wq", {c.d_model, c.heads * c.d_k}});
        out.push_back({p + "wk", {c.d_model, c.heads * c.d_k}});
        out.push_back({p + "wv", {c.d_model, c.heads * c.d_v}});
        out.push_back({p + "wo", {c.heads * c.d_v, c.d_model}});
        out.push_back({p + "bo", {1, c.d_model}});
        out.push_back({p + "ln1.g", {1, c.d_model}});
        out.push_back({p + "ln1.b", {1, c.d_model}});
        out.push_back({p + "ff1.w", {c.d_model, c.d_ff}});
        out.push_back({p + "ff1.b", {1, c.d_ff}});
        out.push_back({p + "ff2.w", {c.d_ff, c.d_model}});
        out.push_back({p + "ff2.b", {1, c.d_model}});
        out.push_back({p + "ln2.g", {1, c.d_model}});
        out.push_back({p + "ln2.b", {1, c.d_model}});
    }
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

template <typename T>
std::vector<std::pair<std::string, nd::Shape>> FcmModel<T>::parameter_layout(const ModelConfig& c) {
    std::vector<std::pair<std::string, nd::Shape>> out;
    if (c.has_variate_path()) {
        out.push_back({"embed_var.w", {c.L, c.d_model}});
        out.push_back({"embed_var.b", {1, c.d_model}});
    }
    if (c.has_time_path()) {
        out.push_back({"embed_time.w", {c.D, c.d_model}});
        out.push_back({"embed_time.b", {1, c.d_model}});
    }
    if (c.shared_encoder()) {
        add_encoder_layout(out, "enc", c);
    } else {
        add_encoder_layout(out, "enc_var", c);
        add_encoder_layout(out, "enc_time", c);
    }
    if (c.has_variate_path()) {
        out.push_back({"head_fore.w", {c.d_model, c.L}});
        out.push_back({"head_fore.b", {1, c.L}});
    }
    if (c.has_time_path()) {
        out.push_back({"head_det.w", {c.d_model, c.D}});
        out.push_back({"head_det.b", {1, c.D}});
    }
    if (c.has_joint_path()) {
        const std::size_t in = c.concat == ConcatAxis::Time ? c.D : 2 * c.D;
        out.push_back({"joint.w", {in, c.d_model}});
        out.push_back({"joint.b", {1, c.d_model}});
        out.push_back({"dec.w1", {c.d_model, c.bottleneck}});
        out.push_back({"dec.b1", {1, c.bottleneck}});
        out.push_back({"dec.w2", {c.bottleneck, c.d_model}});
        out.push_back({"dec.b2", {1, c.d_model}});
    }
    return out;
}

template <typename T>
FcmModel<T>::FcmModel(ModelConfig cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    std::mt19937_64 rng(seed);
    for (const auto& [name, shape] : parameter_layout(cfg_)) {
        Tensor<T> init(shape);
        if (ends_with(name, ".g")) {
            init.fill(T{1});
        } else if (!ends_with(name, ".b") && !ends_with(name, "bo") && !ends_with(name, ".b1") &&
                   !ends_with(name, ".b2")) {
            const double limit = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
            std::uniform_real_distribution<double> dist(-limit, limit);
            for (auto& x : init.data()) x = static_cast<T>(dist(rng));
        }
        params_.add(name, std::move(init));
    }
}

template <typename T>
FcmModel<T>::FcmModel(ModelConfig cfg, nd::ParamStore<T> params) : cfg_(cfg), params_(std::move(params)) {
    cfg_.validate();
    const auto layout = parameter_layout(cfg_);
    if (layout.size() != params_.size())
        throw ConfigError("parameter set does not match the model configuration (" +
                          std::to_string(params_.size()) + " tensors, expected " + std::to_string(layout.size()) +
                          ")");
    for (const auto& [name, shape] : layout) {
        if (!params_.contains(name)) throw ConfigError("missing parameter '" + name + "'");
        if (params_.at(name).value.shape() != shape)
            throw ConfigError("parameter '" + name + "' has shape " + nd::shape_str(params_.at(name).value.shape()) +
                              ", expected " + nd::shape_str(shape));
    }
}

template <typename T>
void FcmModel<T>::check_obs(const Tensor<T>& obs) const {
    if (obs.rank() != 2 || obs.rows() != cfg_.D || obs.cols() != cfg_.L)
        throw ShapeError("observation window must be " + std::to_string(cfg_.D) + "x" + std::to_string(cfg_.L) +
                         ", got " + nd::shape_str(obs.shape()));
}

template <typename T>
std::string FcmModel<T>::encoder_prefix(TokenPath path) const {
    if (cfg_.shared_encoder()) return "enc";
    return path == TokenPath::Variate ? "enc_var" : "enc_time";
}

template <typename T>
Var FcmModel<T>::embed_variate(nd::Tape<T>& tape, Var x_obs) const {
    const auto& x = tape.value(x_obs);
    if (x.rank() != 2 || x.cols() != cfg_.L) throw ShapeError("embed_variate: expected D×L input");
    return tape.linear(x_obs, tape.param("embed_var.w"), tape.param("embed_var.b"));
}

template <typename T>
Var FcmModel<T>::embed_time(nd::Tape<T>& tape, Var x_obs) const {
    const auto& x = tape.value(x_obs);
    if (x.rank() != 2 || x.rows() != cfg_.D) throw ShapeError("embed_time: expected D×L input");
    return tape.linear(tape.transpose(x_obs), tape.param("embed_time.w"), tape.param("embed_time.b"));
}

template <typename T>
Var FcmModel<T>::encoder_layer(nd::Tape<T>& tape, Var x, const std::string& p, Var* maps) const {
    Var q = tape.matmul(x, tape.param(p + "wq"));
    Var k = tape.matmul(x, tape.param(p + "wk"));
    Var v = tape.matmul(x, tape.param(p + "wv"));
    Var heads = tape.multihead_attention(q, k, v, cfg_.heads);
    if (maps) *maps = heads;
    Var attn = tape.linear(heads, tape.param(p + "wo"), tape.param(p + "bo"));
    Var y = tape.layer_norm(tape.add(x, attn), tape.param(p + "ln1.g"), tape.param(p + "ln1.b"));
    Var ff = tape.linear(tape.gelu(tape.linear(y, tape.param(p + "ff1.w"), tape.param(p + "ff1.b"))),
                         tape.param(p + "ff2.w"), tape.param(p + "ff2.b"));
    return tape.layer_norm(tape.add(y, ff), tape.param(p + "ln2.g"), tape.param(p + "ln2.b"));
}

template <typename T>
AttendResult FcmModel<T>::attend(nd::Tape<T>& tape, Var tokens, TokenPath path) const {
    const auto& x = tape.value(tokens);
    if (x.rank() != 2 || x.cols() != cfg_.d_model) throw ShapeError("attend: tokens must be N×d_model");
    const std::string prefix = encoder_prefix(path);
    AttendResult res;
    Var h = tokens;
    for (std::size_t l = 0; l < cfg_.n_layers; ++l) {
        Var maps;
        h = encoder_layer(tape, h, prefix + ".l" + std::to_string(l) + ".", &maps);
        if (l == 0) res.maps = maps;
    }
    res.out = h;
    return res;
}

template <typename T>
Var FcmModel<T>::forecast(nd::Tape<T>& tape, Var x_obs, Var* maps) const {
    if (!cfg_.has_variate_path()) throw ConfigError("forecast: mode " + to_string(cfg_.mode) + " has no forecaster");
    AttendResult enc = attend(tape, embed_variate(tape, x_obs), TokenPath::Variate);
    if (maps) *maps = enc.maps;
    return tape.linear(enc.out, tape.param("head_fore.w"), tape.param("head_fore.b"));
}

template <typename T>
Var FcmModel<T>::reconstruct_obs(nd::Tape<T>& tape, Var x_obs, Var* maps) const {
    if (!cfg_.has_time_path())
        throw ConfigError("reconstruct_obs: mode " + to_string(cfg_.mode) + " has no observation decoder");
    AttendResult enc = attend(tape, embed_time(tape, x_obs), TokenPath::Time);
    if (maps) *maps = enc.maps;
    return tape.transpose(tape.linear(enc.out, tape.param("head_det.w"), tape.param("head_det.b")));
}

template <typename T>
Var FcmModel<T>::joint_embed(nd::Tape<T>& tape, Var x_obs, Var x_fore) const {
    if (!cfg_.has_joint_path()) throw ConfigError("joint_embed: mode " + to_string(cfg_.mode) + " has no joint path");
    const auto& a = tape.value(x_obs);
    const auto& b = tape.value(x_fore);
    if (!a.same_shape(b) || a.rank() != 2 || a.rows() != cfg_.D || a.cols() != cfg_.L)
        throw ShapeError("joint_embed: observation and forecast must both be D×L");
    Var tokens = cfg_.concat == ConcatAxis::Time
                     ? tape.concat_rows(tape.transpose(x_obs), tape.transpose(x_fore))   // 2L×D
                     : tape.concat_cols(tape.transpose(x_obs), tape.transpose(x_fore));  // L×2D
    return tape.linear(tokens, tape.param("joint.w"), tape.param("joint.b"));
}

template <typename T>
Var FcmModel<T>::decode_joint(nd::Tape<T>& tape, Var joint) const {
    if (!cfg_.has_joint_path()) throw ConfigError("decode_joint: mode " + to_string(cfg_.mode) + " has no decoder");
    const auto& c = tape.value(joint);
    if (c.rank() != 2 || c.cols() != cfg_.d_model) throw ShapeError("decode_joint: expected rows of width d_model");
    Var hidden = tape.tanh(tape.linear(joint, tape.param("dec.w1"), tape.param("dec.b1")));
    return tape.linear(hidden, tape.param("dec.w2"), tape.param("dec.b2"));
}

template <typename T>
LossVars FcmModel<T>::compute_losses(nd::Tape<T>& tape, const Tensor<T>& obs, const Tensor<T>* target,
                                     bool include_joint) const {
    check_obs(obs);
    LossVars out;
    Var x = tape.constant(obs);
    std::optional<Var> fore;
    if (cfg_.has_variate_path()) {
        if (!target) throw ConfigError("compute_losses: forecasting loss needs the target window");
        if (!target->same_shape(obs)) throw ShapeError("compute_losses: target must be D×L");
        fore = forecast(tape, x);
        out.fore = tape.mse(*fore, tape.constant(*target));
    }
    if (cfg_.has_time_path()) out.det = tape.mse(reconstruct_obs(tape, x), x);
    if (include_joint && cfg_.has_joint_path()) {
        Var c = joint_embed(tape, x, *fore);
        Var c_hat = decode_joint(tape, c);
        out.joint = tape.mse(c_hat, tape.detach(c));
    }
    return out;
}

template <typename T>
ForwardOutputs<T> FcmModel<T>::forward(const Tensor<T>& obs) const {
    return forward_impl(obs, false);
}

template <typename T>
ForwardOutputs<T> FcmModel<T>::forward_impl(const Tensor<T>& obs, bool scoring_only) const {
    check_obs(obs);
    auto& store = const_cast<nd::ParamStore<T>&>(params_);
    nd::Tape<T> tape(&store, false);
    ForwardOutputs<T> out;
    Var x = tape.constant(obs);
    if (cfg_.has_variate_path()) {
        Var maps;
        Var f = forecast(tape, x, &maps);
        out.forecast = tape.value(f);
        out.variate_attention = tape.attention_maps(maps);
        if (cfg_.has_joint_path()) {
            Var c = joint_embed(tape, x, f);
            out.joint = tape.value(c);
            out.joint_decoded = tape.value(decode_joint(tape, c));
        }
    }
    if (cfg_.has_time_path() && !(scoring_only && cfg_.has_joint_path())) {
        Var maps;
        out.reconstruction = tape.value(reconstruct_obs(tape, x, &maps));
        out.time_attention = tape.attention_maps(maps);
    }
    return out;
}

template <typename T>
std::vector<T> FcmModel<T>::scores_from_outputs(const Tensor<T>& obs, const ForwardOutputs<T>& out,
                                                std::size_t target_length, ScoreGranularity granularity) const {
    const std::size_t L = cfg_.L, D = cfg_.D;
    if (target_length > L) throw ConfigError("window_scores: target length exceeds L");
    std::vector<T> full(L, T{0});
    if (cfg_.has_joint_path()) {
        // Joint reconstruction error of the rows that encode the target window.
        const Tensor<T>& c = *out.joint;
        const Tensor<T>& ch = *out.joint_decoded;
        const std::size_t offset = cfg_.concat == ConcatAxis::Time ? L : 0;
        for (std::size_t j = 0; j < L; ++j) {
            T s = 0;
            for (std::size_t k = 0; k < cfg_.d_model; ++k) {
                const T d = ch(offset + j, k) - c(offset + j, k);
                s += d * d;
            }
            full[j] = s / static_cast<T>(cfg_.d_model);
        }
    } else if (cfg_.has_time_path()) {
        // Observation reconstruction error at step j stands in for target step j.
        const Tensor<T>& r = *out.reconstruction;
        for (std::size_t j = 0; j < L; ++j) {
            T s = 0;
            for (std::size_t d = 0; d < D; ++d) s += (r(d, j) - obs(d, j)) * (r(d, j) - obs(d, j));
            full[j] = s / static_cast<T>(D);
        }
    } else {
        // Forecast-only: squared excursion of the standardized forecast.
        const Tensor<T>& f = *out.forecast;
        for (std::size_t j = 0; j < L; ++j) {
            T s = 0;
            for (std::size_t d = 0; d < D; ++d) s += f(d, j) * f(d, j);
            full[j] = s / static_cast<T>(D);
        }
    }
    full.resize(target_length);
    if (granularity == ScoreGranularity::PerWindow && target_length > 0) {
        T mean = 0;
        for (T v : full) mean += v;
        mean /= static_cast<T>(target_length);
        std::fill(full.begin(), full.end(), mean);
    }
    return full;
}

template <typename T>
std::vector<T> FcmModel<T>::window_scores(const Tensor<T>& obs, std::size_t target_length,
                                          ScoreGranularity granularity) const {
    if (!trained_) throw ConfigError("window_scores: model parameters are untrained");
    return scores_from_outputs(obs, forward_impl(obs, true), target_length, granularity);
}

template <typename T>
T FcmModel<T>::window_score(const Tensor<T>& obs) const {
    auto s = window_scores(obs, cfg_.L, ScoreGranularity::PerWindow);
    return s.front();
}

template class FcmModel<float>;
template class FcmModel<double>;

}  // namespace fcm::net
