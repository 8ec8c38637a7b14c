#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fcm/ndcore/tensor.hpp"

namespace fcm::data {

using Labels = std::vector<std::uint8_t>;

/// D channels × T time points, with optional per-point 0/1 labels.
struct MultivariateSeries {
    nd::Tensor<double> values;  // D×T
    std::optional<Labels> labels;
    std::vector<std::string> channel_names;

    MultivariateSeries() = default;
    explicit MultivariateSeries(nd::Tensor<double> v, std::optional<Labels> l = std::nullopt,
                                std::vector<std::string> names = {});

    std::size_t channels() const { return values.rows(); }
    std::size_t length() const { return values.cols(); }

    /// Throws DataError when the invariants (D ≥ 1, T ≥ 1, |labels| = T,
    /// labels binary, all values finite) do not hold.
    void validate() const;
};

struct CsvOptions {
    char delimiter = ',';
};

struct LabelCsvOptions {
    bool header = false;  // an alphabetic first row is skipped either way
};

/// Reads a header row followed by numeric rows; each column is a channel.
MultivariateSeries load_csv(const std::filesystem::path& path, const CsvOptions& opts = {});

/// Single 0/1 column, one row per time point.
Labels load_labels_csv(const std::filesystem::path& path, const LabelCsvOptions& opts = {});

/// load_csv plus an attached label file whose row count must match.
MultivariateSeries load_csv_with_labels(const std::filesystem::path& values, const std::filesystem::path& labels,
                                        const LabelCsvOptions& label_opts = {});

void write_csv(const std::filesystem::path& path, const MultivariateSeries& series);
void write_labels_csv(const std::filesystem::path& path, const Labels& labels, bool header = true);

/// Channel-wise z-score statistics (population standard deviation).
struct ChannelStats {
    std::vector<double> mean;
    std::vector<double> std;
};

/// Computes statistics on `source`; standard deviations are floored at
/// `std_floor`. With floor 0 a constant channel is a DataError.
ChannelStats fit_channel_stats(const MultivariateSeries& source, double std_floor = 1e-8);

MultivariateSeries apply_channel_stats(const MultivariateSeries& series, const ChannelStats& stats);

/// Fits on `stats_source` (the train split) and transforms `series` with it.
std::pair<MultivariateSeries, ChannelStats> standardize(const MultivariateSeries& series,
                                                        const MultivariateSeries& stats_source,
                                                        double std_floor = 1e-8);

}  // namespace fcm::data
