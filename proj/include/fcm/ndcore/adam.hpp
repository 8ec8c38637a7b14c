#pragma once

#include <cmath>

#include "fcm/ndcore/param_store.hpp"

namespace fcm::nd {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One bias-corrected Adam update of every parameter, then clears gradients.
/// Throws if any parameter has no gradient populated.
template <typename T>
void adam_step(ParamStore<T>& store, const AdamConfig& cfg) {
    if (!(cfg.lr > 0)) throw ConfigError("adam: learning rate must be positive");
    for (const auto& [name, p] : store)
        if (!p.has_grad) throw ConfigError("adam: missing gradient for parameter '" + name + "'");

    const T b1 = static_cast<T>(cfg.beta1);
    const T b2 = static_cast<T>(cfg.beta2);
    const T eps = static_cast<T>(cfg.eps);
    for (auto& [name, p] : store) {
        ++p.step;
        const T c1 = T{1} - static_cast<T>(std::pow(cfg.beta1, static_cast<double>(p.step)));
        const T c2 = T{1} - static_cast<T>(std::pow(cfg.beta2, static_cast<double>(p.step)));
        const T lr = static_cast<T>(cfg.lr);
        for (std::size_t i = 0; i < p.value.numel(); ++i) {
            const T g = p.grad[i];
            p.m[i] = b1 * p.m[i] + (T{1} - b1) * g;
            p.v[i] = b2 * p.v[i] + (T{1} - b2) * g * g;
            const T mhat = p.m[i] / c1;
            const T vhat = p.v[i] / c2;
            p.value[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
    store.clear_grad();
}

}  // namespace fcm::nd
