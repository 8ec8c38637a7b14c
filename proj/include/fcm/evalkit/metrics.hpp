#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fcm/evalkit/scores.hpp"

namespace fcm::eval {

/// Ground truth prepared for evaluation; excluded[t] = 1 drops t from every
/// metric.
struct GroundTruth {
    BinaryVector labels;
    BinaryVector excluded;
};

/// Prediction-mode ground truth. For each anomaly segment [t0, t1] the L
/// points before t0 become positive, [t0, min(t1, t0+L-1)] stays positive
/// and (t0+L-1, t1] is masked. Where a precursor or kept region overlaps a
/// masked tail, the point stays unmasked.
GroundTruth shift_ground_truth(std::span<const std::uint8_t> labels, std::size_t L);

/// Detection-mode ground truth: labels unchanged, nothing masked.
GroundTruth detection_ground_truth(std::span<const std::uint8_t> labels);

/// Maximal runs of ones as inclusive [first, last] index pairs.
struct Segment {
    std::size_t first = 0;
    std::size_t last = 0;
};
std::vector<Segment> segments(std::span<const std::uint8_t> binary);

/// For every maximal run of ground-truth ones, if any unmasked point in the
/// run is predicted, the whole run becomes predicted. Other points are kept.
BinaryVector point_adjust(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                          std::span<const std::uint8_t> mask = {});

struct Confusion {
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

/// Accuracy, precision, recall and F1 over unmasked points; 0/0 counts as 0.
Confusion prf1(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
               std::span<const std::uint8_t> mask = {});

/// Affiliation precision and recall on binary sequences of equal length.
/// Precision is absent when nothing is predicted; both are absent when the
/// ground truth has no events.
struct Affiliation {
    std::optional<double> precision;
    std::optional<double> recall;
};
Affiliation affiliation(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt);

/// Labels widened by a soft buffer of width `window` around each segment.
std::vector<double> extend_positive_range(std::span<const std::uint8_t> labels, std::size_t window);

struct RangeAuc {
    double roc = 0;
    double pr = 0;
};

/// Range-based ROC and PR areas with buffer `window`, sweeping every distinct
/// score as a threshold. Throws ConfigError when the labels are constant.
RangeAuc range_auc(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t window);

/// Range-AUC averaged over buffer widths 0..max_window.
RangeAuc vus(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t max_window);

namespace serial {
RangeAuc vus(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t max_window);
}

}  // namespace fcm::eval
