#pragma once

#include <optional>

#include "fcm/cli/run_config.hpp"
#include "fcm/dataio/series.hpp"
#include "fcm/evalkit/evaluate.hpp"
#include "fcm/evalkit/scores.hpp"
#include "fcm/trainer/trainer.hpp"

namespace fcm::app {

/// Extra arrays stored next to the weights in a checkpoint.
inline constexpr const char* kNormMean = "norm.mean";
inline constexpr const char* kNormStd = "norm.std";
inline constexpr const char* kStride = "windows.stride";

/// Train and test splits standardized with statistics fitted on train.
struct PreparedData {
    data::MultivariateSeries train;
    data::MultivariateSeries test;
    data::ChannelStats stats;
};

PreparedData prepare(const data::MultivariateSeries& train_raw, const data::MultivariateSeries& test_raw);

struct ExperimentResult {
    train::TrainLog log;
    eval::ScoreSeries scores;
    eval::EvalReport report;
};

/// Trains a fresh model on data.train (the test split must carry labels),
/// scores data.test and evaluates it in config.eval.mode.
ExperimentResult run_experiment(const RunConfig& config, const PreparedData& data);

}  // namespace fcm::app
