#include "fcm/evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include "fcm/error.hpp"

namespace fcm::eval {

namespace {

void check_same(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw ShapeError(std::string(what) + ": length mismatch");
}

bool is_masked(std::span<const std::uint8_t> mask, std::size_t t) { return !mask.empty() && mask[t] != 0; }

}  // namespace

std::vector<Segment> segments(std::span<const std::uint8_t> binary) {
    std::vector<Segment> out;
    std::size_t t = 0;
    while (t < binary.size()) {
        if (!binary[t]) {
            ++t;
            continue;
        }
        std::size_t e = t;
        while (e + 1 < binary.size() && binary[e + 1]) ++e;
        out.push_back({t, e});
        t = e + 1;
    }
    return out;
}

GroundTruth shift_ground_truth(std::span<const std::uint8_t> labels, std::size_t L) {
    if (L == 0) throw ConfigError("shift_ground_truth: L must be >= 1");
    const std::size_t n = labels.size();
    GroundTruth gt;
    gt.labels.assign(labels.begin(), labels.end());
    gt.excluded.assign(n, 0);
    BinaryVector keep(n, 0);
    for (const auto& seg : segments(labels)) {
        const std::size_t pre = seg.first >= L ? seg.first - L : 0;
        for (std::size_t t = pre; t < seg.first; ++t) {
            gt.labels[t] = 1;
            keep[t] = 1;
        }
        const std::size_t kept_end = std::min(seg.last, seg.first + L - 1);
        for (std::size_t t = seg.first; t <= kept_end; ++t) keep[t] = 1;
        for (std::size_t t = kept_end + 1; t <= seg.last; ++t) gt.excluded[t] = 1;
    }
    for (std::size_t t = 0; t < n; ++t)
        if (keep[t]) gt.excluded[t] = 0;
    return gt;
}

GroundTruth detection_ground_truth(std::span<const std::uint8_t> labels) {
    return {BinaryVector(labels.begin(), labels.end()), BinaryVector(labels.size(), 0)};
}

BinaryVector point_adjust(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                          std::span<const std::uint8_t> mask) {
    check_same(pred.size(), gt.size(), "point_adjust");
    if (!mask.empty()) check_same(mask.size(), gt.size(), "point_adjust");
    BinaryVector out(pred.begin(), pred.end());
    for (const auto& seg : segments(gt)) {
        bool hit = false;
        for (std::size_t t = seg.first; t <= seg.last && !hit; ++t) hit = pred[t] && !is_masked(mask, t);
        if (hit)
            for (std::size_t t = seg.first; t <= seg.last; ++t) out[t] = 1;
    }
    return out;
}

Confusion prf1(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
               std::span<const std::uint8_t> mask) {
    check_same(pred.size(), gt.size(), "prf1");
    if (!mask.empty()) check_same(mask.size(), gt.size(), "prf1");
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t t = 0; t < gt.size(); ++t) {
        if (is_masked(mask, t)) continue;
        const bool p = pred[t] != 0, g = gt[t] != 0;
        if (p && g)
            ++tp;
        else if (p)
            ++fp;
        else if (g)
            ++fn;
        else
            ++tn;
    }
    auto ratio = [](double a, double b) { return b > 0 ? a / b : 0.0; };
    Confusion c;
    c.accuracy = ratio(tp + tn, tp + tn + fp + fn);
    c.precision = ratio(tp, tp + fp);
    c.recall = ratio(tp, tp + fn);
    c.f1 = ratio(2 * c.precision * c.recall, c.precision + c.recall);
    return c;
}

// ---------------------------------------------------------------------------
// Affiliation. Events are half-open real intervals [first, last+1) on [0, n).
// Each ground-truth event owns the zone between the midpoints to its
// neighbours. Integrands below are linear between the listed breakpoints, so
// the midpoint rule on each piece is exact.

namespace {

struct Iv {
    double a, b;
};

std::vector<Iv> to_intervals(std::span<const std::uint8_t> binary) {
    std::vector<Iv> out;
    for (const auto& s : segments(binary))
        out.push_back({static_cast<double>(s.first), static_cast<double>(s.last + 1)});
    return out;
}

template <typename F>
double integrate_pieces(double u, double v, std::vector<double> cuts, F&& f) {
    cuts.push_back(u);
    cuts.push_back(v);
    std::sort(cuts.begin(), cuts.end());
    double total = 0, prev = u;
    for (double c : cuts) {
        if (c <= prev) continue;
        if (c > v) c = v;
        total += (c - prev) * f((prev + c) / 2);
        prev = c;
        if (prev >= v) break;
    }
    return total;
}

// P(dist(X, J) >= d) for X uniform on zone [za, zb).
double precision_survival(double y, const Iv& J, double za, double zb) {
    const double d = std::max({J.a - y, 0.0, y - J.b});
    if (d == 0) return 1.0;
    return (std::max(0.0, J.a - d - za) + std::max(0.0, zb - J.b - d)) / (zb - za);
}

double dist_to_set(double x, const std::vector<Iv>& set) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& I : set) d = std::min(d, std::max({I.a - x, 0.0, x - I.b}));
    return d;
}

// P(|Y - x| >= d) for Y uniform on zone [za, zb).
double recall_survival(double x, double d, double za, double zb) {
    if (d == 0) return 1.0;
    return (std::max(0.0, x - d - za) + std::max(0.0, zb - x - d)) / (zb - za);
}

}  // namespace

Affiliation affiliation(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
    check_same(pred.size(), gt.size(), "affiliation");
    const auto events = to_intervals(gt);
    const auto preds = to_intervals(pred);
    Affiliation out;
    if (events.empty()) return out;
    const double T = static_cast<double>(gt.size());

    double p_sum = 0, r_sum = 0;
    std::size_t p_count = 0;
    for (std::size_t k = 0; k < events.size(); ++k) {
        const Iv& J = events[k];
        const double za = k == 0 ? 0.0 : (events[k - 1].b + J.a) / 2;
        const double zb = k + 1 == events.size() ? T : (J.b + events[k + 1].a) / 2;

        std::vector<Iv> local;
        for (const auto& I : preds) {
            const double a = std::max(I.a, za), b = std::min(I.b, zb);
            if (b > a) local.push_back({a, b});
        }
        if (local.empty()) continue;  // recall contribution is 0

        double integral = 0, length = 0;
        const std::vector<double> pcuts = {J.a, J.b, J.a + J.b - zb, J.a + J.b - za};
        for (const auto& I : local) {
            integral += integrate_pieces(I.a, I.b, pcuts,
                                         [&](double y) { return precision_survival(y, J, za, zb); });
            length += I.b - I.a;
        }
        p_sum += integral / length;
        ++p_count;

        std::vector<double> rcuts;
        for (std::size_t i = 0; i < local.size(); ++i) {
            rcuts.push_back(local[i].a);
            rcuts.push_back(local[i].b);
            rcuts.push_back((za + local[i].a) / 2);
            rcuts.push_back((zb + local[i].b) / 2);
            if (i + 1 < local.size()) rcuts.push_back((local[i].b + local[i + 1].a) / 2);
        }
        const double rec = integrate_pieces(J.a, J.b, rcuts, [&](double x) {
            return recall_survival(x, dist_to_set(x, local), za, zb);
        });
        r_sum += rec / (J.b - J.a);
    }
    if (p_count > 0) out.precision = p_sum / static_cast<double>(p_count);
    out.recall = r_sum / static_cast<double>(events.size());
    return out;
}

// ---------------------------------------------------------------------------
// Range-AUC.

std::vector<double> extend_positive_range(std::span<const std::uint8_t> labels, std::size_t window) {
    const std::size_t n = labels.size();
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) out[t] = labels[t] ? 1.0 : 0.0;
    const std::size_t half = window / 2;
    if (half == 0) return out;
    const double w = static_cast<double>(window);
    for (const auto& seg : segments(labels)) {
        for (std::size_t x = seg.last; x < std::min(seg.last + half, n); ++x)
            out[x] += std::sqrt(1.0 - static_cast<double>(x - seg.last) / w);
        const std::size_t lo = seg.first >= half ? seg.first - half : 0;
        for (std::size_t x = lo; x < seg.first; ++x) out[x] += std::sqrt(1.0 - static_cast<double>(seg.first - x) / w);
    }
    for (auto& v : out) v = std::min(v, 1.0);
    return out;
}

RangeAuc range_auc(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t window) {
    check_same(scores.size(), labels.size(), "range_auc");
    const std::size_t n = labels.size();
    const double P = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](auto v) { return v != 0; }));
    if (P == 0 || P == static_cast<double>(n)) throw ConfigError("range_auc: labels are constant");

    const auto soft = extend_positive_range(labels, window);
    const double p_new = (P + std::accumulate(soft.begin(), soft.end(), 0.0)) / 2;
    const double n_new = static_cast<double>(n) - p_new;

    // Segment id of every point with positive soft label.
    std::vector<std::int64_t> seg_of(n, -1);
    std::size_t n_seg = 0;
    for (std::size_t t = 0; t < n;) {
        if (soft[t] <= 0) {
            ++t;
            continue;
        }
        while (t < n && soft[t] > 0) seg_of[t++] = static_cast<std::int64_t>(n_seg);
        ++n_seg;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<std::uint8_t> seg_hit(n_seg, 0);
    std::size_t hits = 0;
    double tp = 0, npred = 0;
    double prev_fpr = 0, prev_tpr = 0, prev_prec = 1;
    RangeAuc out;
    for (std::size_t q = 0; q < n;) {
        const double th = scores[order[q]];
        while (q < n && scores[order[q]] == th) {
            const std::size_t t = order[q++];
            tp += soft[t];
            npred += 1;
            if (seg_of[t] >= 0 && !seg_hit[static_cast<std::size_t>(seg_of[t])]) {
                seg_hit[static_cast<std::size_t>(seg_of[t])] = 1;
                ++hits;
            }
        }
        const double recall = std::min(tp / p_new, 1.0);
        const double tpr = recall * static_cast<double>(hits) / static_cast<double>(n_seg);
        const double fpr = (npred - tp) / n_new;
        const double prec = tp / npred;
        out.roc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2;
        out.pr += (tpr - prev_tpr) * (prec + prev_prec) / 2;
        prev_fpr = fpr;
        prev_tpr = tpr;
        prev_prec = prec;
    }
    out.roc += (1.0 - prev_fpr) * (1.0 + prev_tpr) / 2;
    return out;
}

namespace serial {
RangeAuc vus(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t max_window) {
    RangeAuc acc;
    for (std::size_t w = 0; w <= max_window; ++w) {
        const auto r = range_auc(scores, labels, w);
        acc.roc += r.roc;
        acc.pr += r.pr;
    }
    const double k = static_cast<double>(max_window + 1);
    return {acc.roc / k, acc.pr / k};
}
}  // namespace serial

RangeAuc vus(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t max_window) {
    // Per-width results are summed in width order afterwards, so the value
    // matches the serial version bit for bit.
    const auto count = static_cast<std::int64_t>(max_window + 1);
    std::vector<RangeAuc> parts(static_cast<std::size_t>(count));
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic) if (count > 1)
    for (std::int64_t w = 0; w < count; ++w) {
        try {
            parts[static_cast<std::size_t>(w)] = range_auc(scores, labels, static_cast<std::size_t>(w));
        } catch (...) {
#pragma omp critical
            err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    RangeAuc acc;
    for (const auto& r : parts) {
        acc.roc += r.roc;
        acc.pr += r.pr;
    }
    const double k = static_cast<double>(count);
    return {acc.roc / k, acc.pr / k};
}

}  // namespace fcm::eval
