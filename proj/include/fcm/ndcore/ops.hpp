#pragma once

// Value-level (non-recording) counterparts of the tape ops, for inference
// code and tests.

#include "fcm/ndcore/kernels.hpp"
#include "fcm/ndcore/tensor.hpp"

namespace fcm::nd {

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    a.require_rank(2);
    b.require_rank(2);
    if (a.cols() != b.rows())
        throw ShapeError("matmul: inner dimensions differ " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    Tensor<T> out = Tensor<T>::matrix(a.rows(), b.cols());
    kernels::gemm(Trans::No, Trans::No, a.rows(), b.cols(), a.cols(), a.data().data(), b.data().data(),
                  out.data().data(), false);
    return out;
}

template <typename T>
Tensor<T> softmax_rows(Tensor<T> m) {
    m.require_rank(2);
    if (!m.all_finite()) throw NumericError("softmax_rows: non-finite input");
    kernels::softmax_rows(m.rows(), m.cols(), m.data().data());
    return m;
}

template <typename T>
T mse_loss(const Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw ShapeError("mse_loss: shape " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    T s = 0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        const T d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<T>(a.numel());
}

}  // namespace fcm::nd
