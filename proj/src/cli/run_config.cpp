#include "fcm/cli/run_config.hpp"

#include <fstream>
#include <set>

#include "fcm/error.hpp"

namespace fcm::app {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename V>
void read_opt(const json& j, const char* key, V& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<V>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <typename V>
void read_opt(const json& j, const char* key, std::optional<V>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        out.reset();
        return;
    }
    V v{};
    read_opt(j, key, v);
    out = v;
}

template <typename E, typename Parse>
void read_enum(const json& j, const char* key, E& out, Parse parse) {
    if (!j.contains(key)) return;
    std::string s;
    read_opt(j, key, s);
    out = parse(s);
}

template <typename V>
json opt_json(const std::optional<V>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

void RunConfig::finalize() {
    model.mode = train.ablation;
    eval.L = model.L;
    model.validate();
    train.validate();
    if (stride == 0 || stride >= model.L) throw ConfigError("stride must satisfy 1 <= S < L");
    if (eval.anomaly_ratio && !(*eval.anomaly_ratio > 0 && *eval.anomaly_ratio < 1))
        throw ConfigError("anomaly ratio must be in (0,1)");
}

RunConfig profile_config(const std::string& name) {
    RunConfig c;
    c.profile = name;
    if (name == "desk") {
        c.model = net::desk_profile(c.model.D);
        c.stride = 5;
        c.train.epochs = 5;
        c.train.batch_size = 8;
        c.train.lr = 1e-3;
        c.train.access_point = 150;
    } else if (name == "paper") {
        c.model = net::paper_profile(c.model.D);
        c.stride = 50;
        c.train.epochs = 10;
        c.train.batch_size = 32;
        c.train.lr = 1e-4;
        c.train.access_point = 5000;
    } else {
        throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
    }
    c.finalize();
    return c;
}

RunConfig run_config_from_json(const json& j) {
    reject_unknown(j, {"profile", "model", "train", "windows", "score", "eval"}, "run config");
    std::string profile = "desk";
    read_opt(j, "profile", profile);
    RunConfig c = profile_config(profile);

    if (j.contains("model")) {
        const auto& m = j["model"];
        reject_unknown(m,
                       {"D", "L", "d_model", "heads", "d_k", "d_v", "bottleneck", "d_ff", "n_layers", "concat",
                        "precision"},
                       "model config");
        read_opt(m, "D", c.model.D);
        read_opt(m, "L", c.model.L);
        read_opt(m, "d_model", c.model.d_model);
        read_opt(m, "heads", c.model.heads);
        read_opt(m, "d_k", c.model.d_k);
        read_opt(m, "d_v", c.model.d_v);
        if (m.contains("bottleneck")) c.model.auto_bottleneck = false;
        read_opt(m, "bottleneck", c.model.bottleneck);
        read_opt(m, "d_ff", c.model.d_ff);
        read_opt(m, "n_layers", c.model.n_layers);
        read_enum(m, "concat", c.model.concat, net::concat_axis_from_string);
        read_enum(m, "precision", c.model.precision, net::precision_from_string);
        c.model.set_channels(c.model.D);
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        reject_unknown(t,
                       {"epochs", "batch_size", "lr", "beta1", "beta2", "adam_eps", "access_point", "access_unit",
                        "reset_adam_at_access", "seed", "ablation", "checkpoint_every"},
                       "train config");
        read_opt(t, "epochs", c.train.epochs);
        read_opt(t, "batch_size", c.train.batch_size);
        read_opt(t, "lr", c.train.lr);
        read_opt(t, "beta1", c.train.beta1);
        read_opt(t, "beta2", c.train.beta2);
        read_opt(t, "adam_eps", c.train.adam_eps);
        read_opt(t, "access_point", c.train.access_point);
        read_enum(t, "access_unit", c.train.access_unit, train::access_unit_from_string);
        read_opt(t, "reset_adam_at_access", c.train.reset_adam_at_access);
        read_opt(t, "seed", c.train.seed);
        read_enum(t, "ablation", c.train.ablation, net::ablation_from_string);
        read_opt(t, "checkpoint_every", c.train.checkpoint_every);
    }
    if (j.contains("windows")) {
        reject_unknown(j["windows"], {"stride"}, "windows config");
        read_opt(j["windows"], "stride", c.stride);
    }
    if (j.contains("score")) {
        const auto& s = j["score"];
        reject_unknown(s, {"granularity", "aggregation"}, "score config");
        read_enum(s, "granularity", c.granularity, net::score_granularity_from_string);
        read_enum(s, "aggregation", c.aggregation, eval::aggregation_from_string);
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        reject_unknown(e, {"mode", "anomaly_ratio", "range_window", "vus_max_window", "pool_train_scores"},
                       "eval config");
        read_enum(e, "mode", c.eval.mode, eval::eval_mode_from_string);
        read_opt(e, "anomaly_ratio", c.eval.anomaly_ratio);
        read_opt(e, "range_window", c.eval.range_window);
        read_opt(e, "vus_max_window", c.eval.vus_max_window);
        read_opt(e, "pool_train_scores", c.eval.pool_train_scores);
    }
    c.finalize();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("run config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

json to_json(const RunConfig& c) {
    const auto& m = c.model;
    const auto& t = c.train;
    return json{
        {"profile", c.profile},
        {"model",
         {{"D", m.D},
          {"L", m.L},
          {"d_model", m.d_model},
          {"heads", m.heads},
          {"d_k", m.d_k},
          {"d_v", m.d_v},
          {"bottleneck", m.bottleneck},
          {"d_ff", m.d_ff},
          {"n_layers", m.n_layers},
          {"concat", net::to_string(m.concat)},
          {"precision", net::to_string(m.precision)}}},
        {"train",
         {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"lr", t.lr},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"adam_eps", t.adam_eps},
          {"access_point", t.access_point},
          {"access_unit", train::to_string(t.access_unit)},
          {"reset_adam_at_access", t.reset_adam_at_access},
          {"seed", t.seed},
          {"ablation", net::to_string(t.ablation)},
          {"checkpoint_every", t.checkpoint_every}}},
        {"windows", {{"stride", c.stride}}},
        {"score", {{"granularity", net::to_string(c.granularity)}, {"aggregation", eval::to_string(c.aggregation)}}},
        {"eval",
         {{"mode", eval::to_string(c.eval.mode)},
          {"anomaly_ratio", opt_json(c.eval.anomaly_ratio)},
          {"range_window", opt_json(c.eval.range_window)},
          {"vus_max_window", opt_json(c.eval.vus_max_window)},
          {"pool_train_scores", c.eval.pool_train_scores}}},
    };
}

}  // namespace fcm::app
