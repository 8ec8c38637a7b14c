#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcm/evalkit/metrics.hpp"
#include "fcm/evalkit/scores.hpp"

namespace fcm::eval {

enum class EvalMode { Prediction, Detection };

std::string to_string(EvalMode m);
EvalMode eval_mode_from_string(const std::string& s);

struct EvalConfig {
    std::size_t L = 50;
    EvalMode mode = EvalMode::Prediction;
    /// Fraction of evaluated points flagged as anomalous. Empty means the
    /// positive fraction of the evaluated ground truth.
    std::optional<double> anomaly_ratio;
    /// Range-AUC buffer width; empty means L/10.
    std::optional<std::size_t> range_window;
    /// Largest buffer width averaged by VUS; empty means L/2.
    std::optional<std::size_t> vus_max_window;
    /// Include training-set scores in the threshold pool.
    bool pool_train_scores = false;

    std::size_t effective_range_window() const { return range_window.value_or(L / 10); }
    std::size_t effective_vus_max_window() const { return vus_max_window.value_or(L / 2); }
};

/// Metrics that are undefined for an input (e.g. affiliation precision with
/// no alarms, AUCs on constant labels) are left empty.
struct EvalReport {
    EvalMode mode = EvalMode::Prediction;
    double threshold = 0;
    double anomaly_ratio = 0;
    std::size_t evaluated_points = 0;
    std::optional<double> accuracy, precision, recall, f1;
    std::optional<double> aff_precision, aff_recall;
    std::optional<double> r_auc_roc, r_auc_pr, vus_roc, vus_pr;
};

/// Column order used by every report writer.
const std::vector<std::string>& report_columns();
/// Values in report_columns() order.
std::vector<std::optional<double>> report_values(const EvalReport& r);

/// Thresholds the scores (filling scores.threshold / predictions) and
/// computes every metric against `labels`.
EvalReport evaluate(ScoreSeries& scores, std::span<const std::uint8_t> labels, const EvalConfig& config,
                    std::span<const double> train_scores = {});

/// Mean point-adjusted F1 of uniform random scores run through evaluate().
double monte_carlo_random_f1(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> score_mask,
                             const EvalConfig& config, std::size_t trials, std::uint64_t seed);

/// One row per named report, blank cells for missing metrics.
void write_report_csv(const std::filesystem::path& path, const std::vector<std::pair<std::string, EvalReport>>& rows);
std::vector<std::pair<std::string, std::map<std::string, std::optional<double>>>> read_report_csv(
    const std::filesystem::path& path);

/// Aligned text table with the same columns.
std::string format_table(const std::vector<std::string>& row_names,
                         const std::vector<std::vector<std::optional<double>>>& rows,
                         const std::vector<std::string>& columns);

}  // namespace fcm::eval
