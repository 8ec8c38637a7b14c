#pragma once

#include <vector>

#include "fcm/dataio/series.hpp"
#include "fcm/dataio/windows.hpp"
#include "fcm/fcmnet/model.hpp"

namespace fcm::net {

/// Scores every scoreable window of `series`. Entry i covers target points
/// plan.target_start(i) .. + plan.target_length(i). Windows are scored in
/// parallel; each window's values do not depend on the thread count.
template <typename T>
std::vector<std::vector<double>> score_windows(const FcmModel<T>& model, const data::MultivariateSeries& series,
                                               const data::WindowPlan& plan,
                                               ScoreGranularity granularity = ScoreGranularity::PerPoint);

namespace serial {
template <typename T>
std::vector<std::vector<double>> score_windows(const FcmModel<T>& model, const data::MultivariateSeries& series,
                                               const data::WindowPlan& plan,
                                               ScoreGranularity granularity = ScoreGranularity::PerPoint);
}

}  // namespace fcm::net
