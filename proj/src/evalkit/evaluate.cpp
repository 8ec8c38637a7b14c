#include "fcm/evalkit/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "fcm/error.hpp"

namespace fcm::eval {

std::string to_string(EvalMode m) { return m == EvalMode::Prediction ? "prediction" : "detection"; }

EvalMode eval_mode_from_string(const std::string& s) {
    if (s == "prediction") return EvalMode::Prediction;
    if (s == "detection") return EvalMode::Detection;
    throw ConfigError("unknown evaluation mode '" + s + "' (expected prediction or detection)");
}

const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> cols = {"Acc",   "P",     "R",     "F1",    "Aff-P",
                                                  "Aff-R", "R_A_R", "R_A_P", "V_ROC", "V_PR"};
    return cols;
}

std::vector<std::optional<double>> report_values(const EvalReport& r) {
    return {r.accuracy,   r.precision, r.recall,   r.f1,      r.aff_precision,
            r.aff_recall, r.r_auc_roc, r.r_auc_pr, r.vus_roc, r.vus_pr};
}

EvalReport evaluate(ScoreSeries& scores, std::span<const std::uint8_t> labels, const EvalConfig& config,
                    std::span<const double> train_scores) {
    const std::size_t n = scores.size();
    if (labels.size() != n)
        throw DataError("evaluate: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) +
                        " scores");
    if (scores.masked.size() != n) throw ShapeError("evaluate: mask length mismatch");
    if (config.anomaly_ratio && !(*config.anomaly_ratio > 0 && *config.anomaly_ratio < 1))
        throw ConfigError("evaluate: anomaly ratio must be in (0,1)");

    const GroundTruth gt =
        config.mode == EvalMode::Prediction ? shift_ground_truth(labels, config.L) : detection_ground_truth(labels);
    BinaryVector mask(n);
    std::vector<double> kept_scores;
    BinaryVector kept_labels;
    for (std::size_t t = 0; t < n; ++t) {
        mask[t] = gt.excluded[t] || scores.masked[t];
        if (!mask[t]) {
            kept_scores.push_back(scores.scores[t]);
            kept_labels.push_back(gt.labels[t]);
        }
    }
    if (kept_scores.empty()) throw DataError("evaluate: every point is masked");

    EvalReport rep;
    rep.mode = config.mode;
    rep.evaluated_points = kept_scores.size();
    const double positives = static_cast<double>(std::count(kept_labels.begin(), kept_labels.end(), 1));
    rep.anomaly_ratio = config.anomaly_ratio.value_or(positives / static_cast<double>(kept_scores.size()));

    std::vector<double> pool = kept_scores;
    if (config.pool_train_scores) pool.insert(pool.end(), train_scores.begin(), train_scores.end());
    if (rep.anomaly_ratio <= 0)
        rep.threshold = std::nextafter(*std::max_element(pool.begin(), pool.end()),
                                       std::numeric_limits<double>::infinity());
    else if (rep.anomaly_ratio >= 1)
        rep.threshold = *std::min_element(pool.begin(), pool.end());
    else
        rep.threshold = select_threshold(pool, rep.anomaly_ratio);
    scores.apply_threshold(rep.threshold);

    const BinaryVector adjusted = point_adjust(scores.predictions, gt.labels, mask);
    const Confusion c = prf1(adjusted, gt.labels, mask);
    rep.accuracy = c.accuracy;
    rep.precision = c.precision;
    rep.recall = c.recall;
    rep.f1 = c.f1;

    // Affiliation runs on the raw alarms; masked points count as normal.
    BinaryVector pred_z(n), gt_z(n);
    for (std::size_t t = 0; t < n; ++t) {
        pred_z[t] = mask[t] ? 0 : scores.predictions[t];
        gt_z[t] = mask[t] ? 0 : gt.labels[t];
    }
    const Affiliation aff = affiliation(pred_z, gt_z);
    rep.aff_precision = aff.precision;
    rep.aff_recall = aff.recall;

    if (positives > 0 && positives < static_cast<double>(kept_labels.size())) {
        const RangeAuc ra = range_auc(kept_scores, kept_labels, config.effective_range_window());
        const RangeAuc vu = vus(kept_scores, kept_labels, config.effective_vus_max_window());
        rep.r_auc_roc = ra.roc;
        rep.r_auc_pr = ra.pr;
        rep.vus_roc = vu.roc;
        rep.vus_pr = vu.pr;
    }
    return rep;
}

double monte_carlo_random_f1(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> score_mask,
                             const EvalConfig& config, std::size_t trials, std::uint64_t seed) {
    if (trials == 0) throw ConfigError("monte_carlo_random_f1: trials must be >= 1");
    if (score_mask.size() != labels.size()) throw ShapeError("monte_carlo_random_f1: mask length mismatch");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double sum = 0;
    for (std::size_t k = 0; k < trials; ++k) {
        ScoreSeries s;
        s.masked.assign(score_mask.begin(), score_mask.end());
        s.scores.resize(labels.size());
        for (std::size_t t = 0; t < labels.size(); ++t) s.scores[t] = s.masked[t] ? 0.0 : unif(rng);
        sum += evaluate(s, labels, config).f1.value_or(0.0);
    }
    return sum / static_cast<double>(trials);
}

void write_report_csv(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, EvalReport>>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "name";
    for (const auto& c : report_columns()) out << ',' << c;
    out << '\n' << std::setprecision(10);
    for (const auto& [name, rep] : rows) {
        out << name;
        for (const auto& v : report_values(rep)) {
            out << ',';
            if (v) out << *v;
        }
        out << '\n';
    }
}

std::vector<std::pair<std::string, std::map<std::string, std::optional<double>>>> read_report_csv(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open report '" + path.string() + "'");
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream is(line);
        while (std::getline(is, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        return cells;
    };
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty report '" + path.string() + "'");
    const auto header = split(line);
    if (header.empty() || header[0] != "name") throw DataError("report '" + path.string() + "' lacks a name column");
    std::vector<std::pair<std::string, std::map<std::string, std::optional<double>>>> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) throw DataError("ragged row in report '" + path.string() + "'");
        std::map<std::string, std::optional<double>> row;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            if (cells[i].empty()) {
                row[header[i]] = std::nullopt;
                continue;
            }
            double v = 0;
            auto [p, ec] = std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), v);
            if (ec != std::errc()) throw DataError("bad value '" + cells[i] + "' in report '" + path.string() + "'");
            row[header[i]] = v;
        }
        out.emplace_back(cells[0], std::move(row));
    }
    return out;
}

std::string format_table(const std::vector<std::string>& row_names,
                         const std::vector<std::vector<std::optional<double>>>& rows,
                         const std::vector<std::string>& columns) {
    std::size_t name_w = 4;
    for (const auto& n : row_names) name_w = std::max(name_w, n.size());
    std::vector<std::size_t> w(columns.size(), 6);
    for (std::size_t c = 0; c < columns.size(); ++c) w[c] = std::max(w[c], columns[c].size());

    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(name_w)) << "" << std::right;
    for (std::size_t c = 0; c < columns.size(); ++c) os << "  " << std::setw(static_cast<int>(w[c])) << columns[c];
    os << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        os << std::left << std::setw(static_cast<int>(name_w)) << row_names[r] << std::right;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            os << "  " << std::setw(static_cast<int>(w[c]));
            if (c < rows[r].size() && rows[r][c]) {
                std::ostringstream cell;
                cell << std::fixed << std::setprecision(4) << *rows[r][c];
                os << cell.str();
            } else {
                os << "";
            }
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace fcm::eval
