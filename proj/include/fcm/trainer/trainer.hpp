#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fcm/dataio/series.hpp"
#include "fcm/dataio/windows.hpp"
#include "fcm/fcmnet/model.hpp"
#include "fcm/ndcore/adam.hpp"

namespace fcm::train {

/// Unit in which the access point P is counted.
enum class AccessUnit { Iteration, Epoch };

std::string to_string(AccessUnit u);
AccessUnit access_unit_from_string(const std::string& s);

struct TrainConfig {
    std::size_t epochs = 5;
    std::size_t batch_size = 8;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    /// The joint reconstruction loss joins the objective once the counter
    /// (0-based iteration or epoch, per `access_unit`) is strictly above P.
    std::int64_t access_point = 0;
    AccessUnit access_unit = AccessUnit::Iteration;
    /// Zero the Adam moments of every parameter when the joint loss first
    /// activates. Off by default.
    bool reset_adam_at_access = false;
    std::uint64_t seed = 0;
    net::Ablation ablation = net::Ablation::Full;
    /// Write a checkpoint every K iterations into checkpoint_dir (0 = never).
    std::size_t checkpoint_every = 0;
    std::filesystem::path checkpoint_dir;

    void validate() const;
};

struct TrainRecord {
    std::size_t iteration = 0;
    std::size_t epoch = 0;
    std::optional<double> l_fore;
    std::optional<double> l_det;
    std::optional<double> l_c;
    double seconds = 0;  // wall time since training started
};

struct TrainLog {
    std::vector<TrainRecord> records;
    std::vector<std::string> warnings;

    /// Columns: iteration, epoch, l_fore, l_det, l_c, seconds. Absent losses
    /// are empty cells.
    void write_csv(const std::filesystem::path& path) const;
};

/// True when the joint loss is part of the objective at `counter`.
inline bool joint_loss_active(std::int64_t counter, std::int64_t access_point) { return counter > access_point; }

/// Sum of the losses present in `losses`, with the joint term included only
/// after the access point.
template <typename T>
nd::Var staged_total(nd::Tape<T>& tape, std::int64_t counter, std::int64_t access_point, const net::LossVars& losses);

/// Passed to the per-iteration observer after backward() and before the
/// optimizer step, so gradients are still populated.
struct IterationInfo {
    std::size_t iteration = 0;
    std::size_t epoch = 0;
    bool joint_active = false;
};

template <typename T>
using IterationObserver = std::function<void(const IterationInfo&, const nd::ParamStore<T>&)>;

/// Staged training over all windows with a full target, shuffled per epoch.
/// Marks the model trained. Throws ConfigError when there are no trainable
/// windows and NumericError on divergence.
template <typename T>
TrainLog train(net::FcmModel<T>& model, const data::MultivariateSeries& series, const data::WindowPlan& plan,
               const TrainConfig& config, const IterationObserver<T>& observer = {});

extern template nd::Var staged_total<float>(nd::Tape<float>&, std::int64_t, std::int64_t, const net::LossVars&);
extern template nd::Var staged_total<double>(nd::Tape<double>&, std::int64_t, std::int64_t, const net::LossVars&);
extern template TrainLog train<float>(net::FcmModel<float>&, const data::MultivariateSeries&, const data::WindowPlan&,
                                      const TrainConfig&, const IterationObserver<float>&);
extern template TrainLog train<double>(net::FcmModel<double>&, const data::MultivariateSeries&,
                                       const data::WindowPlan&, const TrainConfig&, const IterationObserver<double>&);

}  // namespace fcm::train
