#include "fcm/dataio/series.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fcm/error.hpp"

namespace fcm::data {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, delim)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

bool parse_double(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return in;
}

}  // namespace

MultivariateSeries::MultivariateSeries(nd::Tensor<double> v, std::optional<Labels> l, std::vector<std::string> names)
    : values(std::move(v)), labels(std::move(l)), channel_names(std::move(names)) {
    validate();
}

void MultivariateSeries::validate() const {
    if (values.rank() != 2) throw DataError("series values must be a D×T matrix");
    if (labels && labels->size() != length())
        throw DataError("label length " + std::to_string(labels->size()) + " does not match series length " +
                        std::to_string(length()));
    if (labels)
        for (auto v : *labels)
            if (v > 1) throw DataError("non-binary label");
    if (!channel_names.empty() && channel_names.size() != channels())
        throw DataError("channel name count does not match channel count");
    if (!values.all_finite()) throw DataError("series contains non-finite values");
}

MultivariateSeries load_csv(const std::filesystem::path& path, const CsvOptions& opts) {
    auto in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) throw DataError("empty file '" + path.string() + "'");
    std::vector<std::string> header = split(trim(line), opts.delimiter);
    const std::size_t d = header.size();

    std::vector<std::vector<double>> cols(d);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto cells = split(trim(line), opts.delimiter);
        if (cells.size() != d)
            throw DataError(path.string() + ":" + std::to_string(row) + ": ragged row (" +
                            std::to_string(cells.size()) + " cells, expected " + std::to_string(d) + ")");
        for (std::size_t c = 0; c < d; ++c) {
            double v;
            if (!parse_double(cells[c], v))
                throw DataError(path.string() + ":" + std::to_string(row) + ": non-numeric cell '" + cells[c] + "'");
            cols[c].push_back(v);
        }
    }
    if (cols.empty() || cols[0].empty()) throw DataError("no data rows in '" + path.string() + "'");

    const std::size_t t = cols[0].size();
    nd::Tensor<double> values = nd::Tensor<double>::matrix(d, t);
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t i = 0; i < t; ++i) values(c, i) = cols[c][i];
    return MultivariateSeries(std::move(values), std::nullopt, std::move(header));
}

Labels load_labels_csv(const std::filesystem::path& path, const LabelCsvOptions& opts) {
    auto in = open_or_throw(path);
    std::string line;
    Labels out;
    std::size_t row = 0;
    bool skipped_header = !opts.header;
    while (std::getline(in, line)) {
        ++row;
        const std::string cell = trim(line);
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        if (cell.empty()) continue;
        // An alphabetic first row is taken as a header even when not declared.
        if (row == 1 && std::isalpha(static_cast<unsigned char>(cell.front()))) continue;
        if (cell == "0")
            out.push_back(0);
        else if (cell == "1")
            out.push_back(1);
        else
            throw DataError(path.string() + ":" + std::to_string(row) + ": non-binary label '" + cell + "'");
    }
    if (out.empty()) throw DataError("empty label file '" + path.string() + "'");
    return out;
}

MultivariateSeries load_csv_with_labels(const std::filesystem::path& values, const std::filesystem::path& labels,
                                        const LabelCsvOptions& label_opts) {
    MultivariateSeries s = load_csv(values);
    s.labels = load_labels_csv(labels, label_opts);
    s.validate();
    return s;
}

void write_csv(const std::filesystem::path& path, const MultivariateSeries& series) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    for (std::size_t c = 0; c < series.channels(); ++c) {
        if (c) out << ',';
        out << (series.channel_names.empty() ? "ch" + std::to_string(c) : series.channel_names[c]);
    }
    out << '\n' << std::setprecision(17);
    for (std::size_t t = 0; t < series.length(); ++t) {
        for (std::size_t c = 0; c < series.channels(); ++c) {
            if (c) out << ',';
            out << series.values(c, t);
        }
        out << '\n';
    }
}

void write_labels_csv(const std::filesystem::path& path, const Labels& labels, bool header) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    if (header) out << "label\n";
    for (auto v : labels) out << static_cast<int>(v) << '\n';
}

ChannelStats fit_channel_stats(const MultivariateSeries& source, double std_floor) {
    ChannelStats stats;
    const std::size_t d = source.channels(), t = source.length();
    for (std::size_t c = 0; c < d; ++c) {
        double mean = 0;
        for (std::size_t i = 0; i < t; ++i) mean += source.values(c, i);
        mean /= static_cast<double>(t);
        double var = 0;
        for (std::size_t i = 0; i < t; ++i) var += (source.values(c, i) - mean) * (source.values(c, i) - mean);
        var /= static_cast<double>(t);
        double sd = std::sqrt(var);
        if (sd < std_floor) sd = std_floor;
        if (sd == 0) throw DataError("constant channel " + std::to_string(c) + " with std floor disabled");
        stats.mean.push_back(mean);
        stats.std.push_back(sd);
    }
    return stats;
}

MultivariateSeries apply_channel_stats(const MultivariateSeries& series, const ChannelStats& stats) {
    if (stats.mean.size() != series.channels()) throw DataError("channel stats do not match series channels");
    MultivariateSeries out = series;
    for (std::size_t c = 0; c < series.channels(); ++c)
        for (std::size_t i = 0; i < series.length(); ++i)
            out.values(c, i) = (series.values(c, i) - stats.mean[c]) / stats.std[c];
    return out;
}

std::pair<MultivariateSeries, ChannelStats> standardize(const MultivariateSeries& series,
                                                        const MultivariateSeries& stats_source, double std_floor) {
    ChannelStats stats = fit_channel_stats(stats_source, std_floor);
    return {apply_channel_stats(series, stats), std::move(stats)};
}

}  // namespace fcm::data
