#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fcm/ndcore/param_store.hpp"
#include "fcm/ndcore/tape.hpp"

namespace fcm::nd {

struct GradCheckOptions {
    double eps = 1e-5;
    /// 0 checks every coordinate; otherwise a seeded random subsample of at
    /// least min(64, total) coordinates.
    std::size_t max_coords = 0;
    std::uint64_t seed = 0;
    double denom_floor = 1e-8;
    /// Fourth-order stencil (f(-2h), f(-h), f(h), f(2h)) instead of the
    /// two-point central difference; allows a much larger h in double.
    bool five_point = false;
};

struct GradCheckReport {
    double max_rel_error = 0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0;
    double numeric = 0;
    std::size_t coords_checked = 0;
};

/// Compares the gradients already stored in `store` (from backward()) with
/// central differences of `loss_at`, which evaluates the loss for the current
/// parameter values. The perturbation actually applied after rounding to T is
/// used as the difference denominator (two-point form).
template <typename T>
GradCheckReport finite_diff_check(ParamStore<T>& store, const std::function<double(ParamStore<T>&)>& loss_at,
                                  const GradCheckOptions& opts = {}) {
    if (!(opts.eps > 0)) throw ConfigError("finite_diff_check: eps must be positive");

    struct Coord {
        std::string name;
        std::size_t index;
    };
    std::vector<Coord> coords;
    for (const auto& [name, p] : store) {
        if (!p.has_grad) throw ConfigError("finite_diff_check: no gradient for '" + name + "'");
        for (std::size_t i = 0; i < p.value.numel(); ++i) coords.push_back({name, i});
    }
    if (opts.max_coords != 0) {
        const std::size_t keep = std::min(coords.size(), std::max<std::size_t>(opts.max_coords, 64));
        std::mt19937_64 rng(opts.seed);
        std::shuffle(coords.begin(), coords.end(), rng);
        coords.resize(keep);
    }

    GradCheckReport rep;
    for (const auto& c : coords) {
        auto& p = store.at(c.name);
        const T orig = p.value[c.index];
        auto at = [&](double k) {
            p.value[c.index] = static_cast<T>(static_cast<double>(orig) + k * opts.eps);
            const double f = loss_at(store);
            p.value[c.index] = orig;
            if (!std::isfinite(f)) throw NumericError("finite_diff_check: non-finite loss at " + c.name);
            return f;
        };
        double numeric = 0;
        if (opts.five_point) {
            numeric = (8 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12 * opts.eps);
        } else {
            const T up = static_cast<T>(static_cast<double>(orig) + opts.eps);
            const T down = static_cast<T>(static_cast<double>(orig) - opts.eps);
            numeric = (at(1) - at(-1)) / (static_cast<double>(up) - static_cast<double>(down));
        }
        const double analytic = static_cast<double>(p.grad[c.index]);
        const double rel = std::abs(numeric - analytic) / std::max(std::abs(analytic), opts.denom_floor);
        if (rel > rep.max_rel_error || rep.coords_checked == 0) {
            rep.max_rel_error = rel;
            rep.worst_param = c.name;
            rep.worst_index = c.index;
            rep.analytic = analytic;
            rep.numeric = numeric;
        }
        ++rep.coords_checked;
    }
    return rep;
}

/// Convenience form: `build` records a scalar loss on a tape bound to
/// `store`. Runs backward once, then checks against differences of the same
/// function evaluated in precision T.
template <typename T>
GradCheckReport finite_diff_check(ParamStore<T>& store, const std::function<Var(Tape<T>&)>& build,
                                  const GradCheckOptions& opts = {}) {
    store.clear_grad();
    {
        Tape<T> tape(&store);
        tape.backward(build(tape));
    }
    auto loss_at = [&build](ParamStore<T>& s) {
        Tape<T> tape(&s, false);
        return static_cast<double>(tape.value(build(tape)).item());
    };
    return finite_diff_check<T>(store, std::function<double(ParamStore<T>&)>(loss_at), opts);
}

}  // namespace fcm::nd
