#pragma once

// Straight-line forward pass of the network on plain nested vectors, reading
// weights from a parameter store by name. Shares no code with the tape.

#include <cmath>
#include <string>
#include <vector>

#include "fcm/fcmnet/config.hpp"
#include "fcm/ndcore/param_store.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat from_param(const fcm::nd::ParamStore<double>& s, const std::string& name) {
    const auto& t = s.at(name).value;
    Mat m(t.shape()[0], std::vector<double>(t.shape()[1]));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j) m[i][j] = t(i, j);
    return m;
}

inline Mat T(const Mat& a) {
    Mat out(a[0].size(), std::vector<double>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) out[j][i] = a[i][j];
    return out;
}

inline Mat mul(const Mat& a, const Mat& b) {
    Mat out(a.size(), std::vector<double>(b[0].size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b[0].size(); ++j)
            for (std::size_t k = 0; k < b.size(); ++k) out[i][j] += a[i][k] * b[k][j];
    return out;
}

inline Mat linear(const fcm::nd::ParamStore<double>& s, const Mat& x, const std::string& w, const std::string& b) {
    Mat out = mul(x, from_param(s, w));
    const Mat bias = from_param(s, b);
    for (auto& row : out)
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += bias[0][j];
    return out;
}

inline Mat add(Mat a, const Mat& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
    return a;
}

inline Mat layer_norm(const fcm::nd::ParamStore<double>& s, const Mat& x, const std::string& p) {
    const Mat g = from_param(s, p + ".g"), b = from_param(s, p + ".b");
    Mat out = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double mean = 0, var = 0;
        for (double v : x[i]) mean += v;
        mean /= double(x[i].size());
        for (double v : x[i]) var += (v - mean) * (v - mean);
        var /= double(x[i].size());
        for (std::size_t j = 0; j < x[i].size(); ++j)
            out[i][j] = (x[i][j] - mean) / std::sqrt(var + 1e-5) * g[0][j] + b[0][j];
    }
    return out;
}

inline double gelu(double x) { return 0.5 * x * (1 + std::tanh(std::sqrt(2 / M_PI) * (x + 0.044715 * x * x * x))); }

inline Mat attention(const Mat& q, const Mat& k, const Mat& v, std::size_t heads) {
    const std::size_t n = q.size(), width = q[0].size(), dk = width / heads;
    Mat out(n, std::vector<double>(width, 0.0));
    for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> a(n);
            double mx = -1e300;
            for (std::size_t j = 0; j < n; ++j) {
                double dot = 0;
                for (std::size_t c = 0; c < dk; ++c) dot += q[i][h * dk + c] * k[j][h * dk + c];
                a[j] = dot / std::sqrt(double(dk));
                mx = std::max(mx, a[j]);
            }
            double z = 0;
            for (auto& x : a) z += (x = std::exp(x - mx));
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t c = 0; c < dk; ++c) out[i][h * dk + c] += a[j] / z * v[j][h * dk + c];
        }
    return out;
}

inline Mat encoder(const fcm::nd::ParamStore<double>& s, Mat x, const std::string& prefix, std::size_t heads,
                   std::size_t layers) {
    for (std::size_t l = 0; l < layers; ++l) {
        const std::string p = prefix + ".l" + std::to_string(l) + ".";
        const Mat q = mul(x, from_param(s, p + "wq")), k = mul(x, from_param(s, p + "wk")),
                  v = mul(x, from_param(s, p + "wv"));
        const Mat att = linear(s, attention(q, k, v, heads), p + "wo", p + "bo");
        const Mat y = layer_norm(s, add(x, att), p + "ln1");
        Mat hidden = linear(s, y, p + "ff1.w", p + "ff1.b");
        for (auto& row : hidden)
            for (auto& e : row) e = gelu(e);
        x = layer_norm(s, add(y, linear(s, hidden, p + "ff2.w", p + "ff2.b")), p + "ln2");
    }
    return x;
}

struct Outputs {
    Mat forecast, reconstruction, joint, joint_decoded;
    double l_fore = 0, l_det = 0, l_c = 0;
};

inline double mse(const Mat& a, const Mat& b) {
    double s = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j, ++n) s += (a[i][j] - b[i][j]) * (a[i][j] - b[i][j]);
    return s / double(n);
}

inline Outputs forward(const fcm::nd::ParamStore<double>& s, const fcm::net::ModelConfig& c, const Mat& x,
                       const Mat& target) {
    using fcm::net::Ablation;
    Outputs o;
    const bool shared = c.mode != Ablation::WoAtt;
    if (c.mode != Ablation::BareAP) {
        const Mat tok = linear(s, x, "embed_var.w", "embed_var.b");
        o.forecast = linear(s, encoder(s, tok, shared ? "enc" : "enc_var", c.heads, c.n_layers), "head_fore.w",
                            "head_fore.b");
        o.l_fore = mse(o.forecast, target);
    }
    if (c.mode != Ablation::BareFore) {
        const Mat tok = linear(s, T(x), "embed_time.w", "embed_time.b");
        o.reconstruction = T(linear(s, encoder(s, tok, shared ? "enc" : "enc_time", c.heads, c.n_layers),
                                    "head_det.w", "head_det.b"));
        o.l_det = mse(o.reconstruction, x);
    }
    if (c.mode == Ablation::Full || c.mode == Ablation::WoAtt) {
        Mat joined;
        if (c.concat == fcm::net::ConcatAxis::Time) {
            joined = T(x);
            for (const auto& row : T(o.forecast)) joined.push_back(row);
        } else {
            joined = T(x);
            const Mat f = T(o.forecast);
            for (std::size_t i = 0; i < joined.size(); ++i) joined[i].insert(joined[i].end(), f[i].begin(), f[i].end());
        }
        o.joint = linear(s, joined, "joint.w", "joint.b");
        Mat h = linear(s, o.joint, "dec.w1", "dec.b1");
        for (auto& row : h)
            for (auto& e : row) e = std::tanh(e);
        o.joint_decoded = linear(s, h, "dec.w2", "dec.b2");
        o.l_c = mse(o.joint_decoded, o.joint);
    }
    return o;
}

}  // namespace oracle
