#pragma once

// Reverse-mode gradient recording over a dynamic tape.
//
// A Tape owns every intermediate value of one forward pass. Ops append a node
// whose parents are strictly earlier nodes, so the recorded graph is a DAG in
// tape order and backward() is a single reverse sweep. Parameters enter the
// tape through param(), which reads the ParamStore value in place; backward()
// adds the accumulated gradient of each parameter node into the store.

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fcm/ndcore/kernels.hpp"
#include "fcm/ndcore/param_store.hpp"
#include "fcm/ndcore/tensor.hpp"

namespace fcm::nd {

/// Handle to a node on a Tape.
struct Var {
    std::size_t id = static_cast<std::size_t>(-1);
};

template <typename T>
class Tape {
public:
    /// With record_grad = false no backward closures are stored (inference).
    explicit Tape(ParamStore<T>* store = nullptr, bool record_grad = true)
        : store_(store), record_(record_grad) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // ---- leaves -----------------------------------------------------------

    Var constant(Tensor<T> value) {
        check_finite(value, "constant");
        return push(std::move(value), {}, false, "constant", nullptr);
    }

    /// Parameter leaf. Repeated calls with the same name return the same node.
    Var param(const std::string& name) {
        if (!store_) throw ConfigError("tape has no parameter store");
        if (auto it = param_nodes_.find(name); it != param_nodes_.end()) return it->second;
        Param<T>& p = store_->at(name);
        Node n;
        n.external = &p.value;
        n.requires_grad = record_;
        n.op = "param:" + name;
        n.param = &p;
        nodes_.push_back(std::move(n));
        Var v{nodes_.size() - 1};
        param_nodes_.emplace(name, v);
        return v;
    }

    /// Value of v with gradient flow cut.
    Var detach(Var v) { return constant(value(v)); }

    // ---- linear algebra ---------------------------------------------------

    Var matmul(Var a, Var b) { return gemm_op(a, b, Trans::No, "matmul"); }

    /// a · bᵀ
    Var matmul_nt(Var a, Var b) { return gemm_op(a, b, Trans::Yes, "matmul_nt"); }

    Var transpose(Var a) {
        Tensor<T> out = nd::transpose(value(a));
        return push_op(std::move(out), {a}, "transpose", [](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            t.accumulate(n.parents[0], nd::transpose(n.grad));
        });
    }

    /// x · w + bias, bias broadcast over rows (w: in×out, bias: 1×out).
    Var linear(Var x, Var w, Var bias) { return add_row(matmul(x, w), bias); }

    // ---- elementwise --------------------------------------------------------

    Var add(Var a, Var b) { return binary(a, b, T{1}, "add"); }
    Var sub(Var a, Var b) { return binary(a, b, T{-1}, "sub"); }

    /// m (r×c) + bias (1×c or c) broadcast over rows.
    Var add_row(Var m, Var bias) {
        const auto& mv = value(m);
        const auto& bv = value(bias);
        mv.require_rank(2);
        if (bv.numel() != mv.cols())
            throw ShapeError("add_row: bias " + shape_str(bv.shape()) + " vs matrix " + shape_str(mv.shape()));
        Tensor<T> out = mv;
        for (std::size_t r = 0; r < out.rows(); ++r)
            for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv[c];
        return push_op(std::move(out), {m, bias}, "add_row", [](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            t.accumulate(n.parents[0], n.grad);
            if (t.nodes_[n.parents[1]].requires_grad) {
                Tensor<T> gb(t.value(Var{n.parents[1]}).shape());
                for (std::size_t r = 0; r < n.grad.rows(); ++r)
                    for (std::size_t c = 0; c < n.grad.cols(); ++c) gb[c] += n.grad(r, c);
                t.accumulate(n.parents[1], gb);
            }
        });
    }

    Var scale(Var a, T s) {
        Tensor<T> out = value(a);
        for (auto& x : out.data()) x *= s;
        return push_op(std::move(out), {a}, "scale", [s](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            Tensor<T> g = n.grad;
            for (auto& x : g.data()) x *= s;
            t.accumulate(n.parents[0], g);
        });
    }

    /// Tanh-approximated GELU.
    Var gelu(Var a) {
        Tensor<T> out = value(a);
        for (auto& x : out.data()) x = gelu_value(x);
        return push_op(std::move(out), {a}, "gelu", [](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            const auto& x = t.value(Var{n.parents[0]});
            Tensor<T> g = n.grad;
            for (std::size_t i = 0; i < g.numel(); ++i) g[i] *= gelu_grad(x[i]);
            t.accumulate(n.parents[0], g);
        });
    }

    Var tanh(Var a) {
        Tensor<T> out = value(a);
        for (auto& x : out.data()) x = std::tanh(x);
        return push_op(std::move(out), {a}, "tanh", [](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            Tensor<T> g = n.grad;
            for (std::size_t i = 0; i < g.numel(); ++i) g[i] *= T{1} - n.value[i] * n.value[i];
            t.accumulate(n.parents[0], g);
        });
    }

    // ---- reductions ---------------------------------------------------------

    Var sum(Var a) {
        T s = 0;
        for (T x : value(a).data()) s += x;
        return push_op(Tensor<T>::scalar(s), {a}, "sum", [](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            Tensor<T> g(t.value(Var{n.parents[0]}).shape(), n.grad[0]);
            t.accumulate(n.parents[0], g);
        });
    }

    /// Mean over all elements of the squared difference.
    Var mse(Var a, Var b) {
        const auto& av = value(a);
        const auto& bv = value(b);
        if (!av.same_shape(bv))
            throw ShapeError("mse: shape " + shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
        T s = 0;
        for (std::size_t i = 0; i < av.numel(); ++i) {
            const T d = av[i] - bv[i];
            s += d * d;
        }
        s /= static_cast<T>(av.numel());
        return push_op(Tensor<T>::scalar(s), {a, b}, "mse", [](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            const auto& av = t.value(Var{n.parents[0]});
            const auto& bv = t.value(Var{n.parents[1]});
            const T k = T{2} * n.grad[0] / static_cast<T>(av.numel());
            Tensor<T> g(av.shape());
            for (std::size_t i = 0; i < g.numel(); ++i) g[i] = k * (av[i] - bv[i]);
            t.accumulate(n.parents[0], g);
            if (t.nodes_[n.parents[1]].requires_grad) {
                for (auto& x : g.data()) x = -x;
                t.accumulate(n.parents[1], g);
            }
        });
    }

    // ---- row-wise -----------------------------------------------------------

    Var softmax_rows(Var a) {
        Tensor<T> out = value(a);
        out.require_rank(2);
        kernels::softmax_rows(out.rows(), out.cols(), out.data().data());
        return push_op(std::move(out), {a}, "softmax_rows", [](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            Tensor<T> g = n.grad;
            softmax_backward_rows(n.value, g);
            t.accumulate(n.parents[0], g);
        });
    }

    /// Per-row normalization to zero mean / unit variance, then gain and bias
    /// (each 1×c).
    Var layer_norm(Var x, Var gain, Var bias, T eps = T(1e-5)) {
        const auto& xv = value(x);
        xv.require_rank(2);
        const auto& gv = value(gain);
        const auto& bv = value(bias);
        const std::size_t rows = xv.rows(), cols = xv.cols();
        if (gv.numel() != cols || bv.numel() != cols) throw ShapeError("layer_norm: gain/bias width mismatch");
        Tensor<T> xhat = Tensor<T>::matrix(rows, cols);
        std::vector<T> rstd(rows);
        Tensor<T> out = Tensor<T>::matrix(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            T mean = 0;
            for (std::size_t c = 0; c < cols; ++c) mean += xv(r, c);
            mean /= static_cast<T>(cols);
            T var = 0;
            for (std::size_t c = 0; c < cols; ++c) var += (xv(r, c) - mean) * (xv(r, c) - mean);
            var /= static_cast<T>(cols);
            rstd[r] = T{1} / std::sqrt(var + eps);
            for (std::size_t c = 0; c < cols; ++c) {
                xhat(r, c) = (xv(r, c) - mean) * rstd[r];
                out(r, c) = xhat(r, c) * gv[c] + bv[c];
            }
        }
        return push_op(std::move(out), {x, gain, bias}, "layer_norm",
                       [xhat = std::move(xhat), rstd = std::move(rstd)](Tape& t, std::size_t self) {
                           const auto& n = t.nodes_[self];
                           const auto& gv = t.value(Var{n.parents[1]});
                           const std::size_t rows = n.grad.rows(), cols = n.grad.cols();
                           Tensor<T> dx = Tensor<T>::matrix(rows, cols);
                           Tensor<T> dg(gv.shape()), db(gv.shape());
                           for (std::size_t r = 0; r < rows; ++r) {
                               T mean_d = 0, mean_dx = 0;
                               for (std::size_t c = 0; c < cols; ++c) {
                                   const T d = n.grad(r, c) * gv[c];
                                   mean_d += d;
                                   mean_dx += d * xhat(r, c);
                                   dg[c] += n.grad(r, c) * xhat(r, c);
                                   db[c] += n.grad(r, c);
                               }
                               mean_d /= static_cast<T>(cols);
                               mean_dx /= static_cast<T>(cols);
                               for (std::size_t c = 0; c < cols; ++c) {
                                   const T d = n.grad(r, c) * gv[c];
                                   dx(r, c) = rstd[r] * (d - mean_d - xhat(r, c) * mean_dx);
                               }
                           }
                           t.accumulate(n.parents[0], dx);
                           t.accumulate(n.parents[1], dg);
                           t.accumulate(n.parents[2], db);
                       });
    }

    // ---- reshaping ----------------------------------------------------------

    /// Stacks a (r1×c) on top of b (r2×c).
    Var concat_rows(Var a, Var b) {
        const auto& av = value(a);
        const auto& bv = value(b);
        av.require_rank(2);
        bv.require_rank(2);
        if (av.cols() != bv.cols()) throw ShapeError("concat_rows: column mismatch");
        Tensor<T> out = Tensor<T>::matrix(av.rows() + bv.rows(), av.cols());
        std::copy(av.data().begin(), av.data().end(), out.data().begin());
        std::copy(bv.data().begin(), bv.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(av.numel()));
        return push_op(std::move(out), {a, b}, "concat_rows", [](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            const auto& av = t.value(Var{n.parents[0]});
            const auto& bv = t.value(Var{n.parents[1]});
            const auto split = n.grad.data().begin() + static_cast<std::ptrdiff_t>(av.numel());
            t.accumulate(n.parents[0], Tensor<T>(av.shape(), std::vector<T>(n.grad.data().begin(), split)));
            t.accumulate(n.parents[1], Tensor<T>(bv.shape(), std::vector<T>(split, n.grad.data().end())));
        });
    }

    /// Places a (r×c1) left of b (r×c2).
    Var concat_cols(Var a, Var b) {
        const auto& av = value(a);
        const auto& bv = value(b);
        av.require_rank(2);
        bv.require_rank(2);
        if (av.rows() != bv.rows()) throw ShapeError("concat_cols: row mismatch");
        const std::size_t ca = av.cols(), cb = bv.cols();
        Tensor<T> out = Tensor<T>::matrix(av.rows(), ca + cb);
        for (std::size_t r = 0; r < av.rows(); ++r) {
            for (std::size_t c = 0; c < ca; ++c) out(r, c) = av(r, c);
            for (std::size_t c = 0; c < cb; ++c) out(r, ca + c) = bv(r, c);
        }
        return push_op(std::move(out), {a, b}, "concat_cols", [ca, cb](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            const std::size_t rows = n.grad.rows();
            Tensor<T> ga = Tensor<T>::matrix(rows, ca), gb = Tensor<T>::matrix(rows, cb);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < ca; ++c) ga(r, c) = n.grad(r, c);
                for (std::size_t c = 0; c < cb; ++c) gb(r, c) = n.grad(r, ca + c);
            }
            t.accumulate(n.parents[0], ga);
            t.accumulate(n.parents[1], gb);
        });
    }

    /// Rows [begin, end) of a matrix.
    Var slice_rows(Var a, std::size_t begin, std::size_t end) {
        const auto& av = value(a);
        av.require_rank(2);
        if (begin >= end || end > av.rows()) throw ShapeError("slice_rows: bad range");
        const std::size_t c = av.cols();
        Tensor<T> out({end - begin, c},
                      std::vector<T>(av.data().begin() + static_cast<std::ptrdiff_t>(begin * c),
                                     av.data().begin() + static_cast<std::ptrdiff_t>(end * c)));
        return push_op(std::move(out), {a}, "slice_rows", [begin, c](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            Tensor<T> g(t.value(Var{n.parents[0]}).shape());
            std::copy(n.grad.data().begin(), n.grad.data().end(),
                      g.data().begin() + static_cast<std::ptrdiff_t>(begin * c));
            t.accumulate(n.parents[0], g);
        });
    }

    /// Columns [begin, end) of a matrix.
    Var slice_cols(Var a, std::size_t begin, std::size_t end) {
        const auto& av = value(a);
        av.require_rank(2);
        if (begin >= end || end > av.cols()) throw ShapeError("slice_cols: bad range");
        Tensor<T> out = Tensor<T>::matrix(av.rows(), end - begin);
        for (std::size_t r = 0; r < av.rows(); ++r)
            for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = av(r, c);
        return push_op(std::move(out), {a}, "slice_cols", [begin](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            Tensor<T> g(t.value(Var{n.parents[0]}).shape());
            for (std::size_t r = 0; r < n.grad.rows(); ++r)
                for (std::size_t c = 0; c < n.grad.cols(); ++c) g(r, begin + c) = n.grad(r, c);
            t.accumulate(n.parents[0], g);
        });
    }

    // ---- attention ----------------------------------------------------------

    /// Multi-head scaled dot-product attention over N tokens. q, k, v are
    /// N×(heads·d_k); head j reads columns [j·d_k, (j+1)·d_k). Returns the
    /// concatenated head outputs (N×heads·d_k). The row-stochastic maps
    /// (heads×N×N) are kept on the node; see attention_maps().
    Var multihead_attention(Var q, Var k, Var v, std::size_t heads) {
        const auto& qv = value(q);
        const auto& kv = value(k);
        const auto& vv = value(v);
        qv.require_rank(2);
        if (!qv.same_shape(kv) || !qv.same_shape(vv)) throw ShapeError("attention: q/k/v shape mismatch");
        const std::size_t n = qv.rows(), width = qv.cols();
        if (heads == 0 || width % heads != 0) throw ShapeError("attention: width not divisible by heads");
        const std::size_t dk = width / heads;
        const T scale = T{1} / std::sqrt(static_cast<T>(dk));

        Tensor<T> maps({heads, n, n});
        Tensor<T> out = Tensor<T>::matrix(n, width);
        std::vector<T> qh(n * dk), kh(n * dk), vh(n * dk), oh(n * dk);
        for (std::size_t h = 0; h < heads; ++h) {
            gather_head(qv, h, dk, qh);
            gather_head(kv, h, dk, kh);
            gather_head(vv, h, dk, vh);
            T* a = &maps(h, 0, 0);
            kernels::gemm(Trans::No, Trans::Yes, n, n, dk, qh.data(), kh.data(), a, false);
            for (std::size_t i = 0; i < n * n; ++i) a[i] *= scale;
            kernels::softmax_rows(n, n, a);
            kernels::gemm(Trans::No, Trans::No, n, dk, n, a, vh.data(), oh.data(), false);
            scatter_head(oh, h, dk, out);
        }
        Var res = push_op(std::move(out), {q, k, v}, "multihead_attention",
                          [heads, dk, scale](Tape& t, std::size_t self) {
                              t.attention_backward(self, heads, dk, scale);
                          });
        nodes_[res.id].aux = std::move(maps);
        return res;
    }

    const Tensor<T>& attention_maps(Var v) const {
        const auto& n = node(v);
        if (n.op != "multihead_attention") throw ConfigError("attention_maps on non-attention node");
        return n.aux;
    }

    // ---- access & backward ------------------------------------------------

    const Tensor<T>& value(Var v) const {
        const auto& n = node(v);
        return n.external ? *n.external : n.value;
    }

    /// Gradient accumulated on a node by the last backward(); zeros if none.
    Tensor<T> grad(Var v) const {
        const auto& n = node(v);
        if (n.has_grad) return n.grad;
        return Tensor<T>(value(v).shape());
    }

    std::size_t size() const noexcept { return nodes_.size(); }

    /// Reverse sweep from a scalar loss. Every parameter of the attached
    /// store receives a gradient (zero if it is not on the loss path).
    void backward(Var loss) {
        if (!record_) throw ConfigError("backward on a tape recorded without gradients");
        const auto& lv = value(loss);
        if (lv.numel() != 1) throw ShapeError("backward requires a scalar loss, got " + shape_str(lv.shape()));
        for (auto& n : nodes_) {
            n.has_grad = false;
        }
        auto& root = nodes_[loss.id];
        root.grad = Tensor<T>(lv.shape(), T{1});
        root.has_grad = true;
        for (std::size_t id = loss.id + 1; id-- > 0;) {
            auto& n = nodes_[id];
            for (auto p : n.parents)
                if (p >= id) throw ConfigError("cycle in recorded graph at node " + std::to_string(id));
            if (!n.has_grad || !n.requires_grad || !n.backward_fn) continue;
            n.backward_fn(*this, id);
        }
        if (store_) {
            for (auto& [name, p] : *store_) {
                if (!p.has_grad) {
                    p.grad.fill(T{0});
                    p.has_grad = true;
                }
            }
            for (const auto& [name, v] : param_nodes_) {
                auto& n = nodes_[v.id];
                if (!n.has_grad) continue;
                auto& g = n.param->grad;
                for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
            }
        }
    }

private:
    struct Node {
        Tensor<T> value;
        const Tensor<T>* external = nullptr;
        Tensor<T> grad;
        Tensor<T> aux;
        bool has_grad = false;
        bool requires_grad = false;
        std::vector<std::size_t> parents;
        std::function<void(Tape&, std::size_t)> backward_fn;
        std::string op;
        Param<T>* param = nullptr;
    };

    const Node& node(Var v) const {
        if (v.id >= nodes_.size()) throw ConfigError("invalid tape variable");
        return nodes_[v.id];
    }

    static void check_finite(const Tensor<T>& t, const char* op) {
        if (!t.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
    }

    Var push(Tensor<T> value, std::vector<std::size_t> parents, bool requires_grad, std::string op,
             std::function<void(Tape&, std::size_t)> fn) {
        Node n;
        n.value = std::move(value);
        n.parents = std::move(parents);
        n.requires_grad = requires_grad;
        n.op = std::move(op);
        if (requires_grad) n.backward_fn = std::move(fn);
        nodes_.push_back(std::move(n));
        return Var{nodes_.size() - 1};
    }

    Var push_op(Tensor<T> value, std::initializer_list<Var> inputs, const char* op,
                std::function<void(Tape&, std::size_t)> fn) {
        check_finite(value, op);
        std::vector<std::size_t> parents;
        bool req = false;
        for (Var in : inputs) {
            if (in.id >= nodes_.size()) throw ConfigError(std::string(op) + ": invalid input variable");
            parents.push_back(in.id);
            req = req || nodes_[in.id].requires_grad;
        }
        return push(std::move(value), std::move(parents), record_ && req, op, std::move(fn));
    }

    void accumulate(std::size_t id, const Tensor<T>& g) {
        auto& n = nodes_[id];
        if (!n.requires_grad) return;
        if (!n.has_grad) {
            n.grad = g;
            n.has_grad = true;
            return;
        }
        for (std::size_t i = 0; i < g.numel(); ++i) n.grad[i] += g[i];
    }

    Var gemm_op(Var a, Var b, Trans tb, const char* op) {
        const auto& av = value(a);
        const auto& bv = value(b);
        av.require_rank(2);
        bv.require_rank(2);
        const std::size_t m = av.rows(), k = av.cols();
        const std::size_t kb = tb == Trans::No ? bv.rows() : bv.cols();
        const std::size_t n = tb == Trans::No ? bv.cols() : bv.rows();
        if (k != kb)
            throw ShapeError(std::string(op) + ": inner dimensions differ " + shape_str(av.shape()) + " vs " +
                             shape_str(bv.shape()));
        Tensor<T> out = Tensor<T>::matrix(m, n);
        kernels::gemm(Trans::No, tb, m, n, k, av.data().data(), bv.data().data(), out.data().data(), false);
        return push_op(std::move(out), {a, b}, op, [tb, m, n, k](Tape& t, std::size_t self) {
            const auto& node = t.nodes_[self];
            const auto& av = t.value(Var{node.parents[0]});
            const auto& bv = t.value(Var{node.parents[1]});
            const T* g = node.grad.data().data();
            if (t.nodes_[node.parents[0]].requires_grad) {
                // dA = G · op(B)ᵀ
                Tensor<T> ga = Tensor<T>::matrix(m, k);
                kernels::gemm(Trans::No, tb == Trans::No ? Trans::Yes : Trans::No, m, k, n, g, bv.data().data(),
                              ga.data().data(), false);
                t.accumulate(node.parents[0], ga);
            }
            if (t.nodes_[node.parents[1]].requires_grad) {
                if (tb == Trans::No) {
                    // dB = Aᵀ · G  (k×n)
                    Tensor<T> gb = Tensor<T>::matrix(k, n);
                    kernels::gemm(Trans::Yes, Trans::No, k, n, m, av.data().data(), g, gb.data().data(), false);
                    t.accumulate(node.parents[1], gb);
                } else {
                    // B is n×k: dB = Gᵀ · A
                    Tensor<T> gb = Tensor<T>::matrix(n, k);
                    kernels::gemm(Trans::Yes, Trans::No, n, k, m, g, av.data().data(), gb.data().data(), false);
                    t.accumulate(node.parents[1], gb);
                }
            }
        });
    }

    Var binary(Var a, Var b, T sign, const char* op) {
        const auto& av = value(a);
        const auto& bv = value(b);
        if (!av.same_shape(bv))
            throw ShapeError(std::string(op) + ": shape " + shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
        Tensor<T> out = av;
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] += sign * bv[i];
        return push_op(std::move(out), {a, b}, op, [sign](Tape& t, std::size_t self) {
            const auto& n = t.nodes_[self];
            t.accumulate(n.parents[0], n.grad);
            if (t.nodes_[n.parents[1]].requires_grad) {
                Tensor<T> g = n.grad;
                if (sign != T{1})
                    for (auto& x : g.data()) x *= sign;
                t.accumulate(n.parents[1], g);
            }
        });
    }

    static void softmax_backward_rows(const Tensor<T>& y, Tensor<T>& g) {
        const std::size_t rows = y.rows(), cols = y.cols();
        for (std::size_t r = 0; r < rows; ++r) {
            T dot = 0;
            for (std::size_t c = 0; c < cols; ++c) dot += g(r, c) * y(r, c);
            for (std::size_t c = 0; c < cols; ++c) g(r, c) = y(r, c) * (g(r, c) - dot);
        }
    }

    static void gather_head(const Tensor<T>& src, std::size_t h, std::size_t dk, std::vector<T>& dst) {
        const std::size_t n = src.rows(), width = src.cols();
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < dk; ++c) dst[r * dk + c] = src.data()[r * width + h * dk + c];
    }

    static void scatter_head(const std::vector<T>& src, std::size_t h, std::size_t dk, Tensor<T>& dst) {
        const std::size_t n = dst.rows(), width = dst.cols();
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < dk; ++c) dst.data()[r * width + h * dk + c] += src[r * dk + c];
    }

    void attention_backward(std::size_t self, std::size_t heads, std::size_t dk, T scale) {
        const auto& nd = nodes_[self];
        const auto& qv = value(Var{nd.parents[0]});
        const auto& kv = value(Var{nd.parents[1]});
        const auto& vv = value(Var{nd.parents[2]});
        const std::size_t n = qv.rows();
        const Tensor<T>& maps = nd.aux;
        Tensor<T> gq(qv.shape()), gk(kv.shape()), gv(vv.shape());
        std::vector<T> qh(n * dk), kh(n * dk), vh(n * dk), go(n * dk), tmp(n * dk);
        Tensor<T> da = Tensor<T>::matrix(n, n);
        for (std::size_t h = 0; h < heads; ++h) {
            gather_head(qv, h, dk, qh);
            gather_head(kv, h, dk, kh);
            gather_head(vv, h, dk, vh);
            gather_head(nd.grad, h, dk, go);
            const T* a = &maps(h, 0, 0);
            // dV = Aᵀ · dO
            kernels::gemm(Trans::Yes, Trans::No, n, dk, n, a, go.data(), tmp.data(), false);
            scatter_head(tmp, h, dk, gv);
            // dA = dO · Vᵀ, then through softmax, then the 1/sqrt(d_k) scale
            kernels::gemm(Trans::No, Trans::Yes, n, n, dk, go.data(), vh.data(), da.data().data(), false);
            for (std::size_t r = 0; r < n; ++r) {
                T dot = 0;
                for (std::size_t c = 0; c < n; ++c) dot += da(r, c) * a[r * n + c];
                for (std::size_t c = 0; c < n; ++c) da(r, c) = a[r * n + c] * (da(r, c) - dot) * scale;
            }
            // dQ = dS · K ; dK = dSᵀ · Q
            kernels::gemm(Trans::No, Trans::No, n, dk, n, da.data().data(), kh.data(), tmp.data(), false);
            scatter_head(tmp, h, dk, gq);
            kernels::gemm(Trans::Yes, Trans::No, n, dk, n, da.data().data(), qh.data(), tmp.data(), false);
            scatter_head(tmp, h, dk, gk);
        }
        accumulate(nd.parents[0], gq);
        accumulate(nd.parents[1], gk);
        accumulate(nd.parents[2], gv);
    }

    static T gelu_value(T x) {
        const T c = static_cast<T>(0.7978845608028654);  // sqrt(2/pi)
        return T(0.5) * x * (T{1} + std::tanh(c * (x + T(0.044715) * x * x * x)));
    }

    static T gelu_grad(T x) {
        const T c = static_cast<T>(0.7978845608028654);
        const T u = c * (x + T(0.044715) * x * x * x);
        const T th = std::tanh(u);
        const T du = c * (T{1} + T(3 * 0.044715) * x * x);
        return T(0.5) * (T{1} + th) + T(0.5) * x * (T{1} - th * th) * du;
    }

    ParamStore<T>* store_;
    bool record_;
    std::vector<Node> nodes_;
    std::unordered_map<std::string, Var> param_nodes_;
};

}  // namespace fcm::nd
