#include "fcm/dataio/windows.hpp"

#include <algorithm>

#include "fcm/error.hpp"

namespace fcm::data {

std::size_t WindowPlan::target_length(std::size_t i) const {
    const std::size_t ts = target_start(i);
    if (ts >= T) return 0;
    return std::min(L, T - ts);
}

WindowPlan plan_windows(std::size_t T, std::size_t L, std::size_t S) {
    if (L == 0 || L > T) throw ConfigError("window length must satisfy 1 <= L <= T");
    if (S < 1 || S >= L) throw ConfigError("window step must satisfy 1 <= S < L");
    WindowPlan p;
    p.T = T;
    p.L = L;
    p.S = S;
    p.count = (T - L) / S + 1;
    p.trainable_count = T >= 2 * L ? (T - 2 * L) / S + 1 : 0;
    // i·S + L < T  <=>  i ≤ (T − L − 1)/S
    p.scoreable_count = T > L ? (T - L - 1) / S + 1 : 0;
    return p;
}

Window slice_window(const MultivariateSeries& series, const WindowPlan& plan, std::size_t i) {
    if (i >= plan.count) throw ConfigError("window index " + std::to_string(i) + " out of range");
    if (series.length() != plan.T) throw ConfigError("window plan does not match series length");
    const std::size_t d = series.channels(), L = plan.L, s0 = plan.start(i);
    Window w;
    w.index = i;
    w.observation = nd::Tensor<double>::matrix(d, L);
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t j = 0; j < L; ++j) w.observation(c, j) = series.values(c, s0 + j);
    w.target_length = plan.target_length(i);
    if (w.target_length == L) {
        nd::Tensor<double> tgt = nd::Tensor<double>::matrix(d, L);
        for (std::size_t c = 0; c < d; ++c)
            for (std::size_t j = 0; j < L; ++j) tgt(c, j) = series.values(c, s0 + L + j);
        w.target = std::move(tgt);
    }
    return w;
}

}  // namespace fcm::data
