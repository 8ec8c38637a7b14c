#include "fcm/cli/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fcm/cli/manifest.hpp"
#include "fcm/cli/pipeline.hpp"
#include "fcm/cli/run_config.hpp"
#include "fcm/dataio/synth.hpp"
#include "fcm/dataio/windows.hpp"
#include "fcm/error.hpp"
#include "fcm/evalkit/evaluate.hpp"
#include "fcm/fcmnet/checkpoint.hpp"
#include "fcm/fcmnet/scoring.hpp"

namespace fcm::app {

namespace fs = std::filesystem;

namespace {

// Flags shared by train and ablate that override the loaded run config.
struct RunOverrides {
    std::string config_path;
    std::string profile;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    std::optional<std::int64_t> access_point;
    std::string access_unit;
    std::string precision;
    std::optional<double> lr;
    std::optional<std::size_t> stride;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Run config JSON");
        cmd->add_option("--profile", profile, "Base profile: desk or paper");
        cmd->add_option("--seed", seed, "Random seed");
        cmd->add_option("--epochs", epochs, "Training epochs");
        cmd->add_option("--access-point", access_point, "Joint loss starts once the counter exceeds this");
        cmd->add_option("--access-unit", access_unit, "iteration or epoch");
        cmd->add_option("--precision", precision, "f32 or f64");
        cmd->add_option("--lr", lr, "Adam learning rate");
        cmd->add_option("--stride", stride, "Window stride S");
    }

    RunConfig resolve() const {
        RunConfig c = !config_path.empty() ? load_run_config(config_path) : profile_config(profile.empty() ? "desk" : profile);
        if (!config_path.empty() && !profile.empty() && profile != c.profile)
            throw ConfigError("--profile conflicts with the profile named in " + config_path);
        if (seed) c.train.seed = *seed;
        if (epochs) c.train.epochs = *epochs;
        if (access_point) c.train.access_point = *access_point;
        if (!access_unit.empty()) c.train.access_unit = train::access_unit_from_string(access_unit);
        if (!precision.empty()) c.model.precision = net::precision_from_string(precision);
        if (lr) c.train.lr = *lr;
        if (stride) c.stride = *stride;
        c.finalize();
        return c;
    }
};

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

fs::path ensure_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw DataError("cannot create directory '" + dir + "': " + ec.message());
    return p;
}

fs::path sibling_manifest(const fs::path& out) {
    return out.parent_path() / (out.stem().string() + ".manifest.json");
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string config;
    std::string out;
    std::size_t channels = 3, train_length = 5000, test_length = 2000, anomalies = 6, precursor_length = 50;
    double magnitude = 2.0, precursor_ratio = 0.3;
    std::uint64_t seed = 0;
};

void cmd_synth(const SynthArgs& a) {
    data::SynthConfig cfg = !a.config.empty()
                                ? data::load_synth_config(a.config)
                                : data::make_synth_config(a.channels, a.train_length, a.test_length, a.anomalies,
                                                          a.precursor_length, a.magnitude, a.precursor_ratio, a.seed);
    const auto dir = ensure_dir(a.out);
    const auto splits = data::synth_generate(cfg);
    data::write_csv(dir / "train.csv", splits.train);
    data::write_csv(dir / "test.csv", splits.test);
    data::write_labels_csv(dir / "test_labels.csv", *splits.test.labels);
    write_json(dir / "synth_config.json", data::synth_config_to_json(cfg));
    Manifest m{"synth", data::synth_config_to_json(cfg), cfg.seed, {},
               {dir / "train.csv", dir / "test.csv", dir / "test_labels.csv", dir / "synth_config.json"}};
    if (!a.config.empty()) m.inputs.push_back(a.config);
    m.write(dir / "manifest.json");
    std::cout << "wrote " << splits.train.length() << " train and " << splits.test.length() << " test points ("
              << cfg.anomalies.size() << " anomalies) to " << dir.string() << '\n';
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    RunOverrides run;
    std::string data, out, ablation;
};

template <typename T>
void train_typed(const RunConfig& cfg, const data::MultivariateSeries& raw, const fs::path& dir) {
    const auto stats = data::fit_channel_stats(raw);
    const auto series = data::apply_channel_stats(raw, stats);
    net::FcmModel<T> model(cfg.model, cfg.train.seed);
    const auto plan = data::plan_windows(series.length(), cfg.model.L, cfg.stride);
    auto tc = cfg.train;
    if (tc.checkpoint_every > 0) tc.checkpoint_dir = ensure_dir((dir / "checkpoints").string());
    const auto log = train::train(model, series, plan, tc);
    for (const auto& w : log.warnings) std::cerr << "warning: " << w << '\n';
    net::save_checkpoint(dir / "model.ckpt", model,
                         {{kNormMean, stats.mean}, {kNormStd, stats.std}, {kStride, {double(cfg.stride)}}});
    log.write_csv(dir / "train_log.csv");
    const auto& last = log.records.back();
    std::cout << "trained " << net::to_string(cfg.model.mode) << " for " << log.records.size() << " iterations";
    if (last.l_fore) std::cout << "; L_fore " << *last.l_fore;
    if (last.l_det) std::cout << "; L_det " << *last.l_det;
    if (last.l_c) std::cout << "; L_c " << *last.l_c;
    std::cout << '\n';
}

void cmd_train(const TrainArgs& a) {
    RunConfig cfg = a.run.resolve();
    if (!a.ablation.empty()) cfg.train.ablation = net::ablation_from_string(a.ablation);
    const auto raw = data::load_csv(a.data);
    cfg.model.set_channels(raw.channels());
    cfg.finalize();
    const auto dir = ensure_dir(a.out);
    if (cfg.model.precision == net::Precision::F64)
        train_typed<double>(cfg, raw, dir);
    else
        train_typed<float>(cfg, raw, dir);
    write_json(dir / "run_config.json", to_json(cfg));
    Manifest{"train", to_json(cfg), cfg.train.seed, {a.data},
             {dir / "model.ckpt", dir / "train_log.csv", dir / "run_config.json"}}
        .write(dir / "manifest.json");
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
    std::string model, data, out, granularity = "point", aggregation = "mean";
    std::optional<std::size_t> stride;
};

template <typename T>
eval::ScoreSeries score_typed(const ScoreArgs& a, std::size_t& stride_used) {
    net::CheckpointExtras extras;
    const auto model = net::load_checkpoint<T>(a.model, &extras);
    if (!model.trained()) throw ConfigError("checkpoint '" + a.model + "' holds an untrained model");
    auto raw = data::load_csv(a.data);
    if (!extras.count(kNormMean) || !extras.count(kNormStd))
        throw DataError("checkpoint lacks normalization statistics");
    data::ChannelStats stats{extras.at(kNormMean), extras.at(kNormStd)};
    if (stats.mean.size() != raw.channels())
        throw DataError("data has " + std::to_string(raw.channels()) + " channels, model expects " +
                        std::to_string(stats.mean.size()));
    const auto series = data::apply_channel_stats(raw, stats);
    stride_used = a.stride.value_or(extras.count(kStride) ? std::size_t(extras.at(kStride).at(0)) : model.config().L / 2);
    const auto plan = data::plan_windows(series.length(), model.config().L, stride_used);
    const auto windows = net::score_windows(model, series, plan, net::score_granularity_from_string(a.granularity));
    return eval::assemble_scores(windows, plan, series.length(), eval::aggregation_from_string(a.aggregation));
}

void cmd_score(const ScoreArgs& a) {
    const auto header = net::read_checkpoint_header(a.model);
    std::size_t stride = 0;
    const auto s = header.config.precision == net::Precision::F64 ? score_typed<double>(a, stride)
                                                                   : score_typed<float>(a, stride);
    const fs::path out(a.out);
    if (out.has_parent_path()) ensure_dir(out.parent_path().string());
    eval::write_scores_csv(out, s);
    nlohmann::json cfg = {{"stride", stride}, {"granularity", a.granularity}, {"aggregation", a.aggregation},
                          {"L", header.config.L}};
    Manifest{"score", cfg, 0, {a.model, a.data}, {out}}.write(sibling_manifest(out));
    std::size_t covered = 0;
    for (auto m : s.masked) covered += m ? 0 : 1;
    std::cout << "scored " << covered << " of " << s.size() << " points -> " << out.string() << '\n';
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string scores, labels, out, train_scores, mode = "prediction";
    std::size_t window = 50;
    bool detection = false, both = false;
    std::optional<double> anomaly_ratio;
    std::optional<std::size_t> range_window, vus_max_window;
};

void cmd_eval(const EvalArgs& a) {
    if (a.detection && a.both) throw ConfigError("--detection-mode and --both are exclusive");
    auto s = eval::read_scores_csv(a.scores);
    const auto labels = data::load_labels_csv(a.labels);
    std::vector<double> train_scores;
    if (!a.train_scores.empty()) train_scores = eval::read_scores_csv(a.train_scores).unmasked_scores();

    eval::EvalConfig base;
    base.L = a.window;
    base.anomaly_ratio = a.anomaly_ratio;
    base.range_window = a.range_window;
    base.vus_max_window = a.vus_max_window;
    base.pool_train_scores = !a.train_scores.empty();

    std::vector<eval::EvalMode> modes;
    if (a.both)
        modes = {eval::EvalMode::Prediction, eval::EvalMode::Detection};
    else if (a.detection)
        modes = {eval::EvalMode::Detection};
    else
        modes = {eval::eval_mode_from_string(a.mode)};

    std::vector<std::pair<std::string, eval::EvalReport>> rows;
    eval::ScoreSeries thresholded;
    for (auto m : modes) {
        auto cfg = base;
        cfg.mode = m;
        auto copy = s;
        rows.emplace_back(eval::to_string(m), eval::evaluate(copy, labels, cfg, train_scores));
        if (m == modes.front()) thresholded = copy;
    }
    std::vector<std::string> names;
    std::vector<std::vector<std::optional<double>>> vals;
    for (const auto& [n, r] : rows) {
        names.push_back(n);
        vals.push_back(eval::report_values(r));
    }
    std::cout << eval::format_table(names, vals, eval::report_columns());
    std::cout << "threshold " << rows.front().second.threshold << " (ratio " << rows.front().second.anomaly_ratio
              << ", " << rows.front().second.evaluated_points << " evaluated points)\n";

    if (!a.out.empty()) {
        const fs::path out(a.out);
        if (out.has_parent_path()) ensure_dir(out.parent_path().string());
        eval::write_report_csv(out, rows);
        const fs::path pred = out.parent_path() / (out.stem().string() + ".predictions.csv");
        eval::write_scores_csv(pred, thresholded);
        nlohmann::json cfg = {{"window", a.window},
                              {"modes", [&] {
                                   std::vector<std::string> v;
                                   for (auto m : modes) v.push_back(eval::to_string(m));
                                   return v;
                               }()},
                              {"anomaly_ratio", a.anomaly_ratio ? nlohmann::json(*a.anomaly_ratio) : nlohmann::json()},
                              {"range_window", base.effective_range_window()},
                              {"vus_max_window", base.effective_vus_max_window()},
                              {"pool_train_scores", base.pool_train_scores}};
        std::vector<fs::path> inputs = {a.scores, a.labels};
        if (!a.train_scores.empty()) inputs.push_back(a.train_scores);
        Manifest{"eval", cfg, 0, inputs, {out, pred}}.write(sibling_manifest(out));
    }
}

// ---------------------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string out;
};

void cmd_report(const ReportArgs& a) {
    const auto& cols = eval::report_columns();
    std::vector<std::string> names;
    std::vector<std::vector<std::optional<double>>> vals;
    for (const auto& spec : a.inputs) {
        // "label=path" names the rows; otherwise the file stem is used.
        std::string label, path = spec;
        if (const auto eq = spec.find('='); eq != std::string::npos) {
            label = spec.substr(0, eq);
            path = spec.substr(eq + 1);
        } else {
            label = fs::path(spec).stem().string();
        }
        for (const auto& [row, metrics] : eval::read_report_csv(path)) {
            names.push_back(label + ":" + row);
            std::vector<std::optional<double>> v;
            for (const auto& c : cols) v.push_back(metrics.count(c) ? metrics.at(c) : std::nullopt);
            vals.push_back(std::move(v));
        }
    }
    const std::string table = eval::format_table(names, vals, cols);
    std::cout << table;
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) throw DataError("cannot write '" + a.out + "'");
        out << table;
    }
}

// ---------------------------------------------------------------------------

struct AblateArgs {
    RunOverrides run;
    std::string train_path, test_path, labels_path, out;
    std::vector<std::uint64_t> seeds = {0};
    std::vector<std::string> modes = {"full", "bare_fore", "bare_ap", "wo_att", "wo_Lc"};
};

void cmd_ablate(const AblateArgs& a) {
    const RunConfig base = a.run.resolve();
    auto train_raw = data::load_csv(a.train_path);
    auto test_raw = data::load_csv_with_labels(a.test_path, a.labels_path);
    const auto prepared = prepare(train_raw, test_raw);
    const auto dir = ensure_dir(a.out);

    std::vector<std::pair<std::string, eval::EvalReport>> rows;
    std::vector<std::string> names;
    std::vector<std::vector<std::optional<double>>> means;
    for (const auto& mode : a.modes) {
        std::vector<std::vector<std::optional<double>>> per_seed;
        for (auto seed : a.seeds) {
            RunConfig cfg = base;
            cfg.train.ablation = net::ablation_from_string(mode);
            cfg.train.seed = seed;
            auto res = run_experiment(cfg, prepared);
            std::cerr << mode << " seed " << seed << ": F1 " << res.report.f1.value_or(0) << '\n';
            rows.emplace_back(mode + "/seed" + std::to_string(seed), res.report);
            per_seed.push_back(eval::report_values(res.report));
        }
        std::vector<std::optional<double>> avg(per_seed.front().size());
        for (std::size_t c = 0; c < avg.size(); ++c) {
            double sum = 0;
            std::size_t k = 0;
            for (const auto& v : per_seed)
                if (v[c]) {
                    sum += *v[c];
                    ++k;
                }
            if (k == per_seed.size()) avg[c] = sum / double(k);
        }
        names.push_back(mode);
        means.push_back(avg);
    }
    eval::write_report_csv(dir / "ablation_runs.csv", rows);
    const std::string table = eval::format_table(names, means, eval::report_columns());
    {
        std::ofstream out(dir / "ablation.txt");
        out << table;
    }
    std::cout << table;
    nlohmann::json cfg = to_json(base);
    cfg["seeds"] = a.seeds;
    cfg["modes"] = a.modes;
    Manifest{"ablate", cfg, a.seeds.front(), {a.train_path, a.test_path, a.labels_path},
             {dir / "ablation_runs.csv", dir / "ablation.txt"}}
        .write(dir / "manifest.json");
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Anomaly prediction with forecast context and joint reconstruction"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate a synthetic dataset with precursor-bearing anomalies");
    s->add_option("--config", synth.config, "Synthetic config JSON (overrides the size flags)");
    s->add_option("--out", synth.out, "Output directory")->required();
    s->add_option("--channels", synth.channels, "Number of channels");
    s->add_option("--train-length", synth.train_length, "Train split length");
    s->add_option("--test-length", synth.test_length, "Test split length");
    s->add_option("--anomalies", synth.anomalies, "Number of anomalies in the test split");
    s->add_option("--precursor-length", synth.precursor_length, "Points of precursor before each onset");
    s->add_option("--magnitude", synth.magnitude, "Anomaly magnitude");
    s->add_option("--precursor-ratio", synth.precursor_ratio, "Precursor magnitude as a fraction of the anomaly's");
    s->add_option("--seed", synth.seed, "Random seed");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a model on an anomaly-free series");
    t->add_option("--data", tr.data, "Training CSV")->required();
    t->add_option("--out", tr.out, "Output directory")->required();
    t->add_option("--ablation", tr.ablation, "full, bare_fore, bare_ap, wo_att or wo_Lc");
    tr.run.attach(t);

    ScoreArgs sc;
    auto* c = app.add_subcommand("score", "Score a series with a trained checkpoint");
    c->add_option("--model", sc.model, "Checkpoint file")->required();
    c->add_option("--data", sc.data, "Series CSV")->required();
    c->add_option("--out", sc.out, "Scores CSV")->required();
    c->add_option("--stride", sc.stride, "Window stride (default: the training stride)");
    c->add_option("--granularity", sc.granularity, "point or window");
    c->add_option("--aggregation", sc.aggregation, "mean or max over overlapping windows");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Threshold scores and compute metrics");
    e->add_option("--scores", ev.scores, "Scores CSV")->required();
    e->add_option("--labels", ev.labels, "Labels CSV")->required();
    e->add_option("--window", ev.window, "Observation window length L");
    e->add_option("--mode", ev.mode, "prediction or detection");
    e->add_flag("--detection-mode", ev.detection, "Evaluate against the original labels");
    e->add_flag("--both", ev.both, "Report prediction and detection rows");
    e->add_option("--anomaly-ratio", ev.anomaly_ratio, "Alarm fraction (default: ground-truth ratio)");
    e->add_option("--train-scores", ev.train_scores, "Train-split scores to pool into the threshold");
    e->add_option("--range-window", ev.range_window, "Range-AUC buffer (default L/10)");
    e->add_option("--vus-max-window", ev.vus_max_window, "Largest VUS buffer (default L/2)");
    e->add_option("--out", ev.out, "Report CSV");

    ReportArgs rp;
    auto* r = app.add_subcommand("report", "Combine report CSVs into one table");
    r->add_option("inputs", rp.inputs, "Report CSVs, optionally label=path")->required();
    r->add_option("--out", rp.out, "Write the table to this file");

    AblateArgs ab;
    auto* b = app.add_subcommand("ablate", "Train and evaluate every ablation mode");
    b->add_option("--train", ab.train_path, "Training CSV")->required();
    b->add_option("--test", ab.test_path, "Test CSV")->required();
    b->add_option("--labels", ab.labels_path, "Test labels CSV")->required();
    b->add_option("--out", ab.out, "Output directory")->required();
    b->add_option("--seeds", ab.seeds, "Seeds to average over");
    b->add_option("--modes", ab.modes, "Subset of modes");
    ab.run.attach(b);

    try {
        app.parse(argc, argv);
        if (*s) cmd_synth(synth);
        if (*t) cmd_train(tr);
        if (*c) cmd_score(sc);
        if (*e) cmd_eval(ev);
        if (*r) cmd_report(rp);
        if (*b) cmd_ablate(ab);
        return kOk;
    } catch (const CLI::Success& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kConfigError;
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kConfigError;
    } catch (const NumericError& ex) {
        std::cerr << "numeric error: " << ex.what() << '\n';
        return kNumericError;
    } catch (const DataError& ex) {
        std::cerr << "data error: " << ex.what() << '\n';
        return kDataError;
    } catch (const ShapeError& ex) {
        std::cerr << "data error: " << ex.what() << '\n';
        return kDataError;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
}

}  // namespace fcm::app
