#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "fcm/evalkit/evaluate.hpp"
#include "fcm/fcmnet/config.hpp"
#include "fcm/fcmnet/model.hpp"
#include "fcm/trainer/trainer.hpp"

namespace fcm::app {

/// Everything a train/score/eval run needs besides the data. Built from a
/// named profile ("desk" or "paper") and then overridden from JSON or flags.
struct RunConfig {
    std::string profile = "desk";
    net::ModelConfig model;
    train::TrainConfig train;
    std::size_t stride = 25;
    net::ScoreGranularity granularity = net::ScoreGranularity::PerPoint;
    eval::Aggregation aggregation = eval::Aggregation::Mean;
    eval::EvalConfig eval;

    /// Copies model.L into eval and train.ablation into model.mode, then
    /// validates every part.
    void finalize();
};

RunConfig profile_config(const std::string& name);

/// Unknown keys anywhere in the document raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

}  // namespace fcm::app
