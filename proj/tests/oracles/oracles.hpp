#pragma once

// Independent reference implementations used only by tests. They follow the
// definitions directly and make no attempt to be fast.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using Bits = std::vector<std::uint8_t>;

inline std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, std::size_t m,
                                  std::size_t k, std::size_t n) {
    std::vector<double> c(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < k; ++p) c[i * n + j] += a[i * k + p] * b[p * n + j];
    return c;
}

inline std::vector<std::size_t> window_starts(std::size_t T, std::size_t L, std::size_t S) {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s + L <= T; ++s)
        if (s % S == 0) out.push_back(s);
    return out;
}

// Scans every index, finds the segment around it by walking both ways, and
// checks whether any unmasked point of that segment was predicted.
inline Bits point_adjust(const Bits& pred, const Bits& gt, const Bits& mask) {
    Bits out = pred;
    const std::size_t n = gt.size();
    for (std::size_t t = 0; t < n; ++t) {
        if (!gt[t]) continue;
        std::size_t lo = t, hi = t;
        while (lo > 0 && gt[lo - 1]) --lo;
        while (hi + 1 < n && gt[hi + 1]) ++hi;
        bool hit = false;
        for (std::size_t u = lo; u <= hi; ++u)
            if (pred[u] && !(mask.size() && mask[u])) hit = true;
        if (hit) out[t] = 1;
    }
    return out;
}

// Soft labels: every anomalous point contributes its own 1, and each segment
// spreads sqrt(1 - dist/window) over half a window on either side.
inline std::vector<double> soft_labels(const Bits& labels, std::size_t window) {
    const std::size_t n = labels.size();
    std::vector<double> out(n, 0.0);
    std::vector<std::pair<std::size_t, std::size_t>> segs;
    for (std::size_t t = 0; t < n; ++t) {
        if (!labels[t]) continue;
        if (t == 0 || !labels[t - 1]) segs.push_back({t, t});
        segs.back().second = t;
    }
    for (std::size_t x = 0; x < n; ++x) {
        double v = labels[x] ? 1.0 : 0.0;
        for (auto [s, e] : segs) {
            const double half = static_cast<double>(window / 2);
            const double dx = static_cast<double>(x);
            if (dx >= double(e) && dx < double(e) + half && window > 0)
                v += std::sqrt(1.0 - (dx - double(e)) / double(window));
            if (dx < double(s) && dx >= double(s) - half && window > 0)
                v += std::sqrt(1.0 - (double(s) - dx) / double(window));
        }
        out[x] = std::min(v, 1.0);
    }
    return out;
}

struct Auc {
    double roc = 0, pr = 0;
};

// Recomputes the full confusion state from scratch for every distinct score.
inline Auc range_auc(const std::vector<double>& scores, const Bits& labels, std::size_t window) {
    const std::size_t n = labels.size();
    const auto soft = soft_labels(labels, window);
    double P = 0, soft_sum = 0;
    for (std::size_t t = 0; t < n; ++t) {
        P += labels[t];
        soft_sum += soft[t];
    }
    const double p_new = (P + soft_sum) / 2;
    std::vector<std::pair<std::size_t, std::size_t>> segs;
    for (std::size_t t = 0; t < n; ++t) {
        if (soft[t] <= 0) continue;
        if (t == 0 || soft[t - 1] <= 0) segs.push_back({t, t});
        segs.back().second = t;
    }
    std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
    std::vector<double> tpr = {0}, fpr = {0}, prec = {1};
    for (double th : thresholds) {
        double tp = 0, np = 0;
        for (std::size_t t = 0; t < n; ++t)
            if (scores[t] >= th) {
                tp += soft[t];
                np += 1;
            }
        double exist = 0;
        for (auto [s, e] : segs) {
            bool any = false;
            for (std::size_t t = s; t <= e; ++t) any = any || scores[t] >= th;
            exist += any;
        }
        tpr.push_back(std::min(tp / p_new, 1.0) * exist / double(segs.size()));
        fpr.push_back((np - tp) / (double(n) - p_new));
        prec.push_back(tp / np);
    }
    Auc out;
    tpr.push_back(1);
    fpr.push_back(1);
    for (std::size_t j = 1; j < tpr.size(); ++j) out.roc += (fpr[j] - fpr[j - 1]) * (tpr[j] + tpr[j - 1]) / 2;
    for (std::size_t j = 1; j < prec.size(); ++j) out.pr += (tpr[j] - tpr[j - 1]) * (prec[j] + prec[j - 1]) / 2;
    return out;
}

struct Aff {
    bool has_precision = false;
    double precision = 0, recall = 0;
};

// Affiliation metrics by numerical integration: the outer integral uses a
// midpoint grid of `per_unit` cells per time step; the inner probability is
// the measure of the matching part of the zone, computed by sampling it on
// the same grid.
inline Aff affiliation(const Bits& pred, const Bits& gt, int per_unit = 200) {
    const std::size_t n = gt.size();
    auto intervals = [](const Bits& b) {
        std::vector<std::pair<double, double>> out;
        for (std::size_t t = 0; t < b.size(); ++t) {
            if (!b[t]) continue;
            if (t == 0 || !b[t - 1]) out.push_back({double(t), double(t)});
            out.back().second = double(t + 1);
        }
        return out;
    };
    const auto ev = intervals(gt);
    const auto pv = intervals(pred);
    const double h = 1.0 / per_unit;
    auto dist_iv = [](double x, std::pair<double, double> iv) {
        return std::max({iv.first - x, 0.0, x - iv.second});
    };
    Aff out;
    double psum = 0, rsum = 0;
    int pcount = 0;
    for (std::size_t k = 0; k < ev.size(); ++k) {
        const auto J = ev[k];
        const double za = k == 0 ? 0.0 : (ev[k - 1].second + J.first) / 2;
        const double zb = k + 1 == ev.size() ? double(n) : (J.second + ev[k + 1].first) / 2;
        std::vector<double> grid;
        for (double x = za + h / 2; x < zb; x += h) grid.push_back(x);
        auto in_pred = [&](double x) {
            for (auto iv : pv)
                if (x >= iv.first && x < iv.second) return true;
            return false;
        };
        std::vector<double> pred_pts;
        for (double x : grid)
            if (in_pred(x)) pred_pts.push_back(x);
        if (pred_pts.empty()) continue;
        // Precision.
        std::vector<double> dz;
        for (double x : grid) dz.push_back(dist_iv(x, J));
        std::sort(dz.begin(), dz.end());
        double pacc = 0;
        for (double y : pred_pts) {
            const double d = dist_iv(y, J);
            const auto ge = dz.end() - std::lower_bound(dz.begin(), dz.end(), d);
            pacc += d == 0 ? 1.0 : double(ge) / double(dz.size());
        }
        psum += pacc / double(pred_pts.size());
        ++pcount;
        // Recall.
        double racc = 0;
        int rcount = 0;
        for (double x = J.first + h / 2; x < J.second; x += h) {
            double d = 1e300;
            for (double y : pred_pts) d = std::min(d, std::abs(x - y));
            if (in_pred(x)) d = 0;
            double ge = 0;
            for (double y : grid) ge += std::abs(y - x) >= d;
            racc += d == 0 ? 1.0 : ge / double(grid.size());
            ++rcount;
        }
        rsum += racc / rcount;
    }
    if (pcount) {
        out.has_precision = true;
        out.precision = psum / pcount;
    }
    out.recall = ev.empty() ? 0 : rsum / double(ev.size());
    return out;
}

inline Bits random_bits(std::mt19937_64& rng, std::size_t n, double p_flip) {
    std::bernoulli_distribution flip(p_flip);
    Bits b(n);
    std::uint8_t cur = 0;
    for (auto& v : b) {
        if (flip(rng)) cur ^= 1;
        v = cur;
    }
    return b;
}

}  // namespace oracle
