#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcm/dataio/series.hpp"

namespace fcm::data {

enum class AnomalyType { Group, Shapelet, Trend };

std::string to_string(AnomalyType t);
AnomalyType anomaly_type_from_string(const std::string& s);

/// How the base signal is perturbed before an onset.
enum class PrecursorStyle {
    Drift,   // the affected channels' phases drift apart, up to precursor_magnitude radians
    Ripple,  // an additive ripple of amplitude up to precursor_magnitude
};

std::string to_string(PrecursorStyle s);
PrecursorStyle precursor_style_from_string(const std::string& s);

struct AnomalySpec {
    AnomalyType type = AnomalyType::Group;
    std::size_t onset = 0;     // index into the test split
    std::size_t duration = 1;
    double magnitude = 2.0;
    double precursor_magnitude = 0.0;
    /// Affected channels; empty means every channel.
    std::vector<std::size_t> channels;
};

/// Generator settings. Both splits share one continuous base signal: the
/// train split covers t ∈ [0, T_train), the test split the next T_test points.
struct SynthConfig {
    std::size_t D = 3;
    std::size_t T_train = 5000;
    std::size_t T_test = 2000;
    std::uint64_t seed = 0;
    std::vector<double> periods;     // per channel, in samples; default one shared period
    std::vector<double> amplitudes;  // per channel
    double mixing = 0.3;             // weight of the mean of the other channels
    double noise_sigma = 0.05;
    /// Length of the unlabeled precursor region before each onset; anomalies
    /// need onset ≥ precursor_length.
    std::size_t precursor_length = 50;
    PrecursorStyle precursor_style = PrecursorStyle::Drift;
    /// Period of the precursor ripple (absent from the base spectrum).
    double precursor_period = 7.0;
    std::vector<AnomalySpec> anomalies;

    /// Fills per-channel periods/amplitudes when left empty, then checks every
    /// invariant. Throws ConfigError.
    void validate_and_fill();
};

struct SynthSplits {
    MultivariateSeries train;  // anomaly-free, labels all 0
    MultivariateSeries test;   // labels mark anomaly segments (not precursors)
};

SynthSplits synth_generate(SynthConfig config);

/// Evenly spaced anomalies cycling through group, shapelet and trend.
/// Durations are drawn from [min_duration, max_duration] with `seed`.
SynthConfig make_synth_config(std::size_t D, std::size_t T_train, std::size_t T_test, std::size_t n_anomalies,
                              std::size_t precursor_length, double magnitude, double precursor_ratio,
                              std::uint64_t seed, std::size_t min_duration = 20, std::size_t max_duration = 80);

nlohmann::json synth_config_to_json(const SynthConfig& cfg);
/// Unknown keys are a ConfigError.
SynthConfig synth_config_from_json(const nlohmann::json& j);
SynthConfig load_synth_config(const std::filesystem::path& path);

}  // namespace fcm::data
