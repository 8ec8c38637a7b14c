#pragma once

#include <cstddef>
#include <optional>

#include "fcm/dataio/series.hpp"

namespace fcm::data {

/// Sliding-window bookkeeping. Window i observes [i·S, i·S+L) and targets the
/// next L points [i·S+L, i·S+2L). Starts are 0-based throughout.
struct WindowPlan {
    std::size_t T = 0;
    std::size_t L = 0;
    std::size_t S = 0;
    std::size_t count = 0;            // ⌊(T−L)/S⌋ + 1 observation windows
    std::size_t trainable_count = 0;  // windows with i·S + 2L ≤ T
    std::size_t scoreable_count = 0;  // windows with i·S + L < T

    std::size_t start(std::size_t i) const { return i * S; }
    std::size_t target_start(std::size_t i) const { return i * S + L; }
    /// Number of target points inside [0, T).
    std::size_t target_length(std::size_t i) const;
};

WindowPlan plan_windows(std::size_t T, std::size_t L, std::size_t S);

struct Window {
    std::size_t index = 0;
    nd::Tensor<double> observation;          // D×L
    std::optional<nd::Tensor<double>> target;  // D×L, only when fully in range
    std::size_t target_length = 0;           // in-range target points
};

Window slice_window(const MultivariateSeries& series, const WindowPlan& plan, std::size_t i);

}  // namespace fcm::data
