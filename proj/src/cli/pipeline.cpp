#include "fcm/cli/pipeline.hpp"

#include "fcm/dataio/windows.hpp"
#include "fcm/error.hpp"
#include "fcm/fcmnet/scoring.hpp"

namespace fcm::app {

PreparedData prepare(const data::MultivariateSeries& train_raw, const data::MultivariateSeries& test_raw) {
    if (train_raw.channels() != test_raw.channels())
        throw DataError("train and test splits have different channel counts");
    PreparedData out;
    out.stats = data::fit_channel_stats(train_raw);
    out.train = data::apply_channel_stats(train_raw, out.stats);
    out.test = data::apply_channel_stats(test_raw, out.stats);
    return out;
}

namespace {

template <typename T>
ExperimentResult run_typed(RunConfig cfg, const PreparedData& data) {
    cfg.model.set_channels(data.train.channels());
    cfg.finalize();
    if (!data.test.labels) throw DataError("the test split has no labels");
    net::FcmModel<T> model(cfg.model, cfg.train.seed);
    const auto train_plan = data::plan_windows(data.train.length(), cfg.model.L, cfg.stride);
    ExperimentResult res;
    res.log = train::train(model, data.train, train_plan, cfg.train);
    const auto test_plan = data::plan_windows(data.test.length(), cfg.model.L, cfg.stride);
    const auto windows = net::score_windows(model, data.test, test_plan, cfg.granularity);
    res.scores = eval::assemble_scores(windows, test_plan, data.test.length(), cfg.aggregation);
    res.report = eval::evaluate(res.scores, *data.test.labels, cfg.eval);
    return res;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config, const PreparedData& data) {
    return config.model.precision == net::Precision::F64 ? run_typed<double>(config, data)
                                                         : run_typed<float>(config, data);
}

}  // namespace fcm::app
