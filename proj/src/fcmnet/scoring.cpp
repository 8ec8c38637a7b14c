#include "fcm/fcmnet/scoring.hpp"

#include <exception>

#include "fcm/error.hpp"

namespace fcm::net {

namespace {

template <typename T>
std::vector<double> score_one(const FcmModel<T>& model, const data::MultivariateSeries& series,
                              const data::WindowPlan& plan, std::size_t i, ScoreGranularity granularity) {
    auto w = data::slice_window(series, plan, i);
    const auto s = model.window_scores(w.observation.template cast<T>(), w.target_length, granularity);
    return {s.begin(), s.end()};
}

template <typename T>
void check_inputs(const FcmModel<T>& model, const data::MultivariateSeries& series, const data::WindowPlan& plan) {
    if (!model.trained()) throw ConfigError("scoring needs a trained model");
    if (series.channels() != model.config().D) throw DataError("series channel count does not match the model");
    if (plan.L != model.config().L) throw ConfigError("window length does not match the model");
}

}  // namespace

template <typename T>
std::vector<std::vector<double>> score_windows(const FcmModel<T>& model, const data::MultivariateSeries& series,
                                               const data::WindowPlan& plan, ScoreGranularity granularity) {
    check_inputs(model, series, plan);
    const auto count = static_cast<std::int64_t>(plan.scoreable_count);
    std::vector<std::vector<double>> out(plan.scoreable_count);
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < count; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = score_one(model, series, plan, static_cast<std::size_t>(i), granularity);
        } catch (...) {
#pragma omp critical
            err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

namespace serial {
template <typename T>
std::vector<std::vector<double>> score_windows(const FcmModel<T>& model, const data::MultivariateSeries& series,
                                               const data::WindowPlan& plan, ScoreGranularity granularity) {
    check_inputs(model, series, plan);
    std::vector<std::vector<double>> out;
    out.reserve(plan.scoreable_count);
    for (std::size_t i = 0; i < plan.scoreable_count; ++i) out.push_back(score_one(model, series, plan, i, granularity));
    return out;
}
template std::vector<std::vector<double>> score_windows<float>(const FcmModel<float>&, const data::MultivariateSeries&,
                                                               const data::WindowPlan&, ScoreGranularity);
template std::vector<std::vector<double>> score_windows<double>(const FcmModel<double>&,
                                                                const data::MultivariateSeries&,
                                                                const data::WindowPlan&, ScoreGranularity);
}  // namespace serial

template std::vector<std::vector<double>> score_windows<float>(const FcmModel<float>&, const data::MultivariateSeries&,
                                                               const data::WindowPlan&, ScoreGranularity);
template std::vector<std::vector<double>> score_windows<double>(const FcmModel<double>&, const data::MultivariateSeries&,
                                                                const data::WindowPlan&, ScoreGranularity);

}  // namespace fcm::net
