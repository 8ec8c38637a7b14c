#include "fcm/dataio/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "fcm/error.hpp"

namespace fcm::data {

std::string to_string(AnomalyType t) {
    switch (t) {
        case AnomalyType::Group: return "group";
        case AnomalyType::Shapelet: return "shapelet";
        case AnomalyType::Trend: return "trend";
    }
    return "?";
}

AnomalyType anomaly_type_from_string(const std::string& s) {
    if (s == "group") return AnomalyType::Group;
    if (s == "shapelet") return AnomalyType::Shapelet;
    if (s == "trend") return AnomalyType::Trend;
    throw ConfigError("unknown anomaly type '" + s + "' (expected group, shapelet or trend)");
}

std::string to_string(PrecursorStyle s) { return s == PrecursorStyle::Drift ? "drift" : "ripple"; }

PrecursorStyle precursor_style_from_string(const std::string& s) {
    if (s == "drift") return PrecursorStyle::Drift;
    if (s == "ripple") return PrecursorStyle::Ripple;
    throw ConfigError("unknown precursor style '" + s + "' (expected drift or ripple)");
}

void SynthConfig::validate_and_fill() {
    if (D == 0) throw ConfigError("synth: D must be >= 1");
    if (T_train == 0 || T_test == 0) throw ConfigError("synth: split lengths must be >= 1");
    if (periods.empty())
        periods.assign(D, 40.0);
    if (amplitudes.empty())
        for (std::size_t c = 0; c < D; ++c) amplitudes.push_back(1.0 - 0.1 * static_cast<double>(c % 5));
    if (periods.size() != D || amplitudes.size() != D)
        throw ConfigError("synth: periods/amplitudes must have one entry per channel");
    for (double p : periods)
        if (!(p > 0)) throw ConfigError("synth: periods must be positive");
    if (!(noise_sigma >= 0)) throw ConfigError("synth: noise_sigma must be >= 0");
    if (!(precursor_period > 0)) throw ConfigError("synth: precursor_period must be positive");

    std::sort(anomalies.begin(), anomalies.end(),
              [](const AnomalySpec& a, const AnomalySpec& b) { return a.onset < b.onset; });
    std::size_t prev_end = 0;
    bool first = true;
    for (const auto& a : anomalies) {
        if (a.duration == 0) throw ConfigError("synth: anomaly duration must be >= 1");
        if (a.onset < precursor_length)
            throw ConfigError("synth: anomaly onset " + std::to_string(a.onset) +
                              " leaves no full precursor window (need onset >= " +
                              std::to_string(precursor_length) + ")");
        if (a.onset + a.duration > T_test) throw ConfigError("synth: anomaly extends past the test split");
        if (!(a.magnitude > 0)) throw ConfigError("synth: anomaly magnitude must be positive");
        if (!(a.precursor_magnitude >= 0) || !(a.precursor_magnitude < a.magnitude))
            throw ConfigError("synth: precursor magnitude must be in [0, magnitude)");
        for (auto c : a.channels)
            if (c >= D) throw ConfigError("synth: anomaly channel out of range");
        const std::size_t begin = a.onset - precursor_length;
        if (!first && begin < prev_end)
            throw ConfigError("synth: overlapping anomaly specs at onset " + std::to_string(a.onset));
        prev_end = a.onset + a.duration;
        first = false;
    }
}

SynthSplits synth_generate(SynthConfig cfg) {
    cfg.validate_and_fill();
    const std::size_t D = cfg.D, total = cfg.T_train + cfg.T_test;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<double> phases(D);
    for (auto& p : phases) p = phase_dist(rng);

    auto channels_of = [D](const AnomalySpec& a) {
        std::vector<std::size_t> chans = a.channels;
        if (chans.empty())
            for (std::size_t c = 0; c < D; ++c) chans.push_back(c);
        return chans;
    };

    // Per-channel phase offsets; drift precursors bend them apart before onset.
    nd::Tensor<double> offset = nd::Tensor<double>::matrix(D, total);
    const double Lp = static_cast<double>(cfg.precursor_length);
    if (cfg.precursor_style == PrecursorStyle::Drift)
        for (const auto& a : cfg.anomalies) {
            const auto chans = channels_of(a);
            for (std::size_t k = 0; k < cfg.precursor_length; ++k) {
                const std::size_t t = cfg.T_train + a.onset - cfg.precursor_length + k;
                const double ramp = static_cast<double>(k + 1) / Lp;
                // alternate directions so a multi-channel drift is not a plain time shift
                for (std::size_t i = 0; i < chans.size(); ++i)
                    offset(chans[i], t) = (i % 2 ? -1.0 : 1.0) * a.precursor_magnitude * ramp;
            }
        }

    nd::Tensor<double> base = nd::Tensor<double>::matrix(D, total);
    for (std::size_t t = 0; t < total; ++t)
        for (std::size_t c = 0; c < D; ++c)
            base(c, t) = cfg.amplitudes[c] * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / cfg.periods[c] +
                                                      phases[c] + offset(c, t));

    nd::Tensor<double> x = nd::Tensor<double>::matrix(D, total);
    for (std::size_t t = 0; t < total; ++t) {
        double sum = 0;
        for (std::size_t c = 0; c < D; ++c) sum += base(c, t);
        for (std::size_t c = 0; c < D; ++c) {
            const double others = D > 1 ? (sum - base(c, t)) / static_cast<double>(D - 1) : 0.0;
            x(c, t) = base(c, t) + cfg.mixing * others + cfg.noise_sigma * noise(rng);
        }
    }

    Labels test_labels(cfg.T_test, 0);
    for (const auto& a : cfg.anomalies) {
        const auto chans = channels_of(a);
        std::vector<double> signs(D);
        for (auto& s : signs) s = (rng() & 1u) ? 1.0 : -1.0;

        if (cfg.precursor_style == PrecursorStyle::Ripple)
            for (std::size_t k = 0; k < cfg.precursor_length; ++k) {
                const std::size_t t = a.onset - cfg.precursor_length + k;
                const double ramp = static_cast<double>(k + 1) / Lp;
                const double ripple =
                    std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / cfg.precursor_period);
                for (auto c : chans) x(c, cfg.T_train + t) += a.precursor_magnitude * ramp * ripple;
            }

        const double dur = static_cast<double>(a.duration);
        for (std::size_t k = 0; k < a.duration; ++k) {
            const std::size_t t = a.onset + k;
            const double u = static_cast<double>(k) / dur;
            double delta = 0;
            switch (a.type) {
                case AnomalyType::Group: delta = a.magnitude; break;
                case AnomalyType::Shapelet: {
                    // triangle wave with two full cycles over the segment
                    const double ph = std::fmod(2.0 * u, 1.0);
                    delta = a.magnitude * (ph < 0.5 ? 4.0 * ph - 1.0 : 3.0 - 4.0 * ph);
                    break;
                }
                case AnomalyType::Trend: delta = a.magnitude * static_cast<double>(k + 1) / dur; break;
            }
            for (auto c : chans)
                x(c, cfg.T_train + t) += a.type == AnomalyType::Group ? signs[c] * delta : delta;
            test_labels[t] = 1;
        }
    }

    std::vector<std::string> names;
    for (std::size_t c = 0; c < D; ++c) names.push_back("ch" + std::to_string(c));

    nd::Tensor<double> train = nd::Tensor<double>::matrix(D, cfg.T_train);
    nd::Tensor<double> test = nd::Tensor<double>::matrix(D, cfg.T_test);
    for (std::size_t c = 0; c < D; ++c) {
        for (std::size_t t = 0; t < cfg.T_train; ++t) train(c, t) = x(c, t);
        for (std::size_t t = 0; t < cfg.T_test; ++t) test(c, t) = x(c, cfg.T_train + t);
    }
    return SynthSplits{MultivariateSeries(std::move(train), Labels(cfg.T_train, 0), names),
                       MultivariateSeries(std::move(test), std::move(test_labels), names)};
}

SynthConfig make_synth_config(std::size_t D, std::size_t T_train, std::size_t T_test, std::size_t n_anomalies,
                              std::size_t precursor_length, double magnitude, double precursor_ratio,
                              std::uint64_t seed, std::size_t min_duration, std::size_t max_duration) {
    SynthConfig cfg;
    cfg.D = D;
    cfg.T_train = T_train;
    cfg.T_test = T_test;
    cfg.seed = seed;
    cfg.precursor_length = precursor_length;
    if (n_anomalies == 0) return cfg;
    if (min_duration == 0 || max_duration < min_duration) throw ConfigError("synth: bad duration range");

    const std::size_t slot = T_test / n_anomalies;
    if (slot < precursor_length + max_duration + 1)
        throw ConfigError("synth: test split too short for " + std::to_string(n_anomalies) + " anomalies");
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<std::size_t> dur(min_duration, max_duration);
    for (std::size_t k = 0; k < n_anomalies; ++k) {
        AnomalySpec a;
        a.type = static_cast<AnomalyType>(k % 3);
        a.duration = dur(rng);
        // place the segment mid-slot so neighbouring precursors never touch
        const std::size_t room = slot - a.duration;
        a.onset = k * slot + std::max(precursor_length, room / 2 + precursor_length / 2);
        a.magnitude = magnitude;
        a.precursor_magnitude = precursor_ratio * magnitude;
        if (a.type == AnomalyType::Shapelet) a.channels = {k % D};
        if (a.type == AnomalyType::Trend) a.channels = {(k + 1) % D};
        cfg.anomalies.push_back(a);
    }
    return cfg;
}

nlohmann::json synth_config_to_json(const SynthConfig& cfg) {
    nlohmann::json anomalies = nlohmann::json::array();
    for (const auto& a : cfg.anomalies)
        anomalies.push_back({{"type", to_string(a.type)},
                             {"onset", a.onset},
                             {"duration", a.duration},
                             {"magnitude", a.magnitude},
                             {"precursor_magnitude", a.precursor_magnitude},
                             {"channels", a.channels}});
    return {{"D", cfg.D},
            {"T_train", cfg.T_train},
            {"T_test", cfg.T_test},
            {"seed", cfg.seed},
            {"periods", cfg.periods},
            {"amplitudes", cfg.amplitudes},
            {"mixing", cfg.mixing},
            {"noise_sigma", cfg.noise_sigma},
            {"precursor_length", cfg.precursor_length},
            {"precursor_style", to_string(cfg.precursor_style)},
            {"precursor_period", cfg.precursor_period},
            {"anomalies", anomalies}};
}

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename V>
void read_opt(const nlohmann::json& j, const char* key, V& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<V>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

SynthConfig synth_config_from_json(const nlohmann::json& j) {
    reject_unknown(j,
                   {"D", "T_train", "T_test", "seed", "periods", "amplitudes", "mixing", "noise_sigma",
                    "precursor_length", "precursor_style", "precursor_period", "anomalies"},
                   "synth config");
    SynthConfig cfg;
    read_opt(j, "D", cfg.D);
    read_opt(j, "T_train", cfg.T_train);
    read_opt(j, "T_test", cfg.T_test);
    read_opt(j, "seed", cfg.seed);
    read_opt(j, "periods", cfg.periods);
    read_opt(j, "amplitudes", cfg.amplitudes);
    read_opt(j, "mixing", cfg.mixing);
    read_opt(j, "noise_sigma", cfg.noise_sigma);
    read_opt(j, "precursor_length", cfg.precursor_length);
    std::string style = to_string(cfg.precursor_style);
    read_opt(j, "precursor_style", style);
    cfg.precursor_style = precursor_style_from_string(style);
    read_opt(j, "precursor_period", cfg.precursor_period);
    if (j.contains("anomalies")) {
        if (!j["anomalies"].is_array()) throw ConfigError("synth config: 'anomalies' must be an array");
        for (const auto& aj : j["anomalies"]) {
            reject_unknown(aj, {"type", "onset", "duration", "magnitude", "precursor_magnitude", "channels"},
                           "anomaly spec");
            AnomalySpec a;
            std::string type = "group";
            read_opt(aj, "type", type);
            a.type = anomaly_type_from_string(type);
            read_opt(aj, "onset", a.onset);
            read_opt(aj, "duration", a.duration);
            read_opt(aj, "magnitude", a.magnitude);
            read_opt(aj, "precursor_magnitude", a.precursor_magnitude);
            read_opt(aj, "channels", a.channels);
            cfg.anomalies.push_back(a);
        }
    }
    cfg.validate_and_fill();
    return cfg;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open synth config '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("synth config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return synth_config_from_json(j);
}

}  // namespace fcm::data
