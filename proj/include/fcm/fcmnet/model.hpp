#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fcm/fcmnet/config.hpp"
#include "fcm/ndcore/param_store.hpp"
#include "fcm/ndcore/tape.hpp"

namespace fcm::net {

using nd::Tensor;
using nd::Var;

/// Values produced by one forward pass over an observation window.
template <typename T>
struct ForwardOutputs {
    std::optional<Tensor<T>> forecast;        // D×L
    std::optional<Tensor<T>> reconstruction;  // D×L
    std::optional<Tensor<T>> joint;           // C: 2L×d_model (time concat) or L×d_model
    std::optional<Tensor<T>> joint_decoded;   // Ĉ, same shape as C
    std::optional<Tensor<T>> variate_attention;  // heads×D×D (first encoder layer)
    std::optional<Tensor<T>> time_attention;     // heads×L×L (first encoder layer)
};

/// Tape handles of the per-window losses. Absent entries are not part of the
/// current mode (or, for the joint loss, not requested).
struct LossVars {
    std::optional<Var> fore;
    std::optional<Var> det;
    std::optional<Var> joint;
};

struct AttendResult {
    Var out;   // N×d_model
    Var maps;  // attention node of the first layer (see Tape::attention_maps)
};

enum class TokenPath { Variate, Time };

enum class ScoreGranularity {
    PerPoint,   // each target position keeps its own error
    PerWindow,  // every target position gets the window mean
};

std::string to_string(ScoreGranularity g);
ScoreGranularity score_granularity_from_string(const std::string& s);

/// The network: variate-token and time-token embeddings feeding one shared
/// attention encoder (two copies in wo_att mode), a per-variate forecast
/// head, a per-time-step observation decoder, and the joint embedding with
/// its bottleneck decoder.
template <typename T>
class FcmModel {
public:
    /// Fresh model with Glorot-uniform weights drawn from `seed`.
    FcmModel(ModelConfig cfg, std::uint64_t seed);
    /// Wraps existing parameters (e.g. from a checkpoint); names and shapes
    /// are checked against the config.
    FcmModel(ModelConfig cfg, nd::ParamStore<T> params);

    const ModelConfig& config() const noexcept { return cfg_; }
    nd::ParamStore<T>& params() noexcept { return params_; }
    const nd::ParamStore<T>& params() const noexcept { return params_; }

    /// Parameter names and shapes required by `cfg`, in initialization order.
    static std::vector<std::pair<std::string, nd::Shape>> parameter_layout(const ModelConfig& cfg);

    // Building blocks, recorded on a tape bound to params().
    Var embed_variate(nd::Tape<T>& tape, Var x_obs) const;  // D×L -> D×d_model
    Var embed_time(nd::Tape<T>& tape, Var x_obs) const;     // D×L -> L×d_model
    AttendResult attend(nd::Tape<T>& tape, Var tokens, TokenPath path) const;
    Var forecast(nd::Tape<T>& tape, Var x_obs, Var* maps = nullptr) const;         // D×L
    Var reconstruct_obs(nd::Tape<T>& tape, Var x_obs, Var* maps = nullptr) const;  // D×L
    Var joint_embed(nd::Tape<T>& tape, Var x_obs, Var x_fore) const;
    Var decode_joint(nd::Tape<T>& tape, Var joint) const;

    /// Records the mode's losses for one window. The joint loss uses a
    /// detached copy of C as its target and is only built when include_joint.
    LossVars compute_losses(nd::Tape<T>& tape, const Tensor<T>& obs, const Tensor<T>* target,
                            bool include_joint) const;

    ForwardOutputs<T> forward(const Tensor<T>& obs) const;

    /// Per-target-position anomaly scores for one window, using only the
    /// observation. Returns `target_length` values (≤ L).
    std::vector<T> window_scores(const Tensor<T>& obs, std::size_t target_length,
                                 ScoreGranularity granularity = ScoreGranularity::PerPoint) const;

    /// Scores from precomputed outputs; exposed for tests.
    std::vector<T> scores_from_outputs(const Tensor<T>& obs, const ForwardOutputs<T>& out,
                                       std::size_t target_length, ScoreGranularity granularity) const;

    /// Window-level aggregate: mean of the per-position scores.
    T window_score(const Tensor<T>& obs) const;

    /// Scoring refuses models that were never trained (or loaded from a
    /// checkpoint of a trained model).
    bool trained() const noexcept { return trained_; }
    void mark_trained(bool v = true) noexcept { trained_ = v; }

private:
    std::string encoder_prefix(TokenPath path) const;
    Var encoder_layer(nd::Tape<T>& tape, Var x, const std::string& prefix, Var* maps) const;
    void check_obs(const Tensor<T>& obs) const;
    ForwardOutputs<T> forward_impl(const Tensor<T>& obs, bool scoring_only) const;

    ModelConfig cfg_;
    nd::ParamStore<T> params_;
    bool trained_ = false;
};

extern template class FcmModel<float>;
extern template class FcmModel<double>;

}  // namespace fcm::net
