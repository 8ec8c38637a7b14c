#include "fcm/evalkit/scores.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "fcm/error.hpp"

namespace fcm::eval {

std::string to_string(Aggregation a) { return a == Aggregation::Mean ? "mean" : "max"; }

Aggregation aggregation_from_string(const std::string& s) {
    if (s == "mean") return Aggregation::Mean;
    if (s == "max") return Aggregation::Max;
    throw ConfigError("unknown aggregation '" + s + "' (expected mean or max)");
}

std::vector<double> ScoreSeries::unmasked_scores() const {
    std::vector<double> out;
    out.reserve(scores.size());
    for (std::size_t t = 0; t < scores.size(); ++t)
        if (!masked[t]) out.push_back(scores[t]);
    return out;
}

void ScoreSeries::apply_threshold(double th) {
    threshold = th;
    predictions.assign(scores.size(), 0);
    for (std::size_t t = 0; t < scores.size(); ++t)
        predictions[t] = !masked[t] && scores[t] >= th ? 1 : 0;
}

ScoreSeries assemble_scores(const std::vector<std::vector<double>>& window_scores, const data::WindowPlan& plan,
                            std::size_t T, Aggregation aggregation) {
    ScoreSeries out;
    std::vector<double> acc(T, aggregation == Aggregation::Mean ? 0.0 : -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> hits(T, 0);
    for (std::size_t i = 0; i < window_scores.size(); ++i) {
        const std::size_t base = plan.target_start(i);
        for (std::size_t j = 0; j < window_scores[i].size(); ++j) {
            const std::size_t t = base + j;
            if (t >= T) throw ConfigError("assemble_scores: window " + std::to_string(i) + " reaches past T");
            const double v = window_scores[i][j];
            if (aggregation == Aggregation::Mean)
                acc[t] += v;
            else
                acc[t] = std::max(acc[t], v);
            ++hits[t];
        }
    }
    out.scores.assign(T, 0.0);
    out.masked.assign(T, 1);
    for (std::size_t t = 0; t < T; ++t) {
        if (hits[t] == 0) continue;
        out.masked[t] = 0;
        out.scores[t] = aggregation == Aggregation::Mean ? acc[t] / static_cast<double>(hits[t]) : acc[t];
    }
    return out;
}

void write_scores_csv(const std::filesystem::path& path, const ScoreSeries& s) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "t,score,masked,prediction\n" << std::setprecision(17);
    const bool has_pred = s.threshold.has_value() && s.predictions.size() == s.scores.size();
    for (std::size_t t = 0; t < s.scores.size(); ++t) {
        out << t << ',' << s.scores[t] << ',' << static_cast<int>(s.masked[t]) << ',';
        if (has_pred) out << static_cast<int>(s.predictions[t]);
        out << '\n';
    }
}

ScoreSeries read_scores_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scores file '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty scores file '" + path.string() + "'");
    ScoreSeries s;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells;
        std::istringstream is(line);
        std::string cell;
        while (std::getline(is, cell, ',')) cells.push_back(cell);
        if (cells.size() < 3) throw DataError(path.string() + ":" + std::to_string(row) + ": expected t,score,masked");
        double score = 0;
        {
            const auto& c = cells[1];
            auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), score);
            if (ec != std::errc() || !std::isfinite(score))
                throw DataError(path.string() + ":" + std::to_string(row) + ": bad score '" + c + "'");
        }
        if (cells[0] != std::to_string(s.scores.size()))
            throw DataError(path.string() + ":" + std::to_string(row) + ": time index out of order");
        if (cells[2] != "0" && cells[2] != "1")
            throw DataError(path.string() + ":" + std::to_string(row) + ": masked must be 0 or 1");
        s.scores.push_back(score);
        s.masked.push_back(cells[2] == "1" ? 1 : 0);
    }
    if (s.scores.empty()) throw DataError("no rows in scores file '" + path.string() + "'");
    return s;
}

double select_threshold(std::span<const double> scores, double r) {
    if (scores.empty()) throw ConfigError("select_threshold: empty scores");
    if (!(r > 0 && r < 1)) throw ConfigError("select_threshold: anomaly ratio must be in (0,1)");
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const auto n = sorted.size();
    const auto k = static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
    if (k == 0) return std::nextafter(sorted.front(), std::numeric_limits<double>::infinity());
    if (k >= n) return sorted.back();
    return sorted[k - 1] / 2 + sorted[k] / 2;
}

}  // namespace fcm::eval
