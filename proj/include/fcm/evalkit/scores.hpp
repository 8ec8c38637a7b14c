#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcm/dataio/windows.hpp"

namespace fcm::eval {

using BinaryVector = std::vector<std::uint8_t>;

/// How overlapping target windows are merged into one score per point.
enum class Aggregation { Mean, Max };

std::string to_string(Aggregation a);
Aggregation aggregation_from_string(const std::string& s);

/// Per-time-point scores. Positions never covered by a target window are
/// masked and take no part in thresholding or metrics.
struct ScoreSeries {
    std::vector<double> scores;
    BinaryVector masked;  // 1 = not covered
    std::optional<double> threshold;
    BinaryVector predictions;  // filled once thresholded; 0 at masked points

    std::size_t size() const { return scores.size(); }
    /// Scores at unmasked positions, in time order.
    std::vector<double> unmasked_scores() const;
    /// predictions = (score ≥ threshold) at unmasked positions.
    void apply_threshold(double threshold);
};

/// window_scores[i] holds the scores of window i for target points
/// i·S+L, i·S+L+1, ...; its length may be shorter than L at the series end.
ScoreSeries assemble_scores(const std::vector<std::vector<double>>& window_scores, const data::WindowPlan& plan,
                            std::size_t T, Aggregation aggregation = Aggregation::Mean);

/// Columns t, score, masked, prediction (prediction empty when no threshold).
void write_scores_csv(const std::filesystem::path& path, const ScoreSeries& s);
ScoreSeries read_scores_csv(const std::filesystem::path& path);

/// Threshold such that floor(r·n) of the n scores lie at or above it: the
/// midpoint between the k-th and (k+1)-th largest values. With k = 0 the
/// threshold sits just above the maximum (no alarms).
double select_threshold(std::span<const double> scores, double anomaly_ratio);

}  // namespace fcm::eval
