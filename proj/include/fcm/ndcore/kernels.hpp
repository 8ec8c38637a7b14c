#pragma once

// Dense kernels used by the tape ops. Two implementations live side by side:
//   fcm::nd::serial  - plain loops, the reference the tests compare against
//   fcm::nd::kernels - OpenMP row-parallel versions used by the library
// Parallel kernels split work by output row only, so each output element is
// accumulated in the same order as the serial version and results are
// bit-identical regardless of thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fcm::nd {

/// Operand layout for gemm: row-major as stored, or transposed.
enum class Trans { No, Yes };

namespace serial {

/// C(m×n) (+)= op(A) · op(B), op(A) is m×k, op(B) is k×n, all row-major.
template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            T acc = accumulate ? c[i * n + j] : T{0};
            for (std::size_t p = 0; p < k; ++p) {
                const T av = ta == Trans::No ? a[i * k + p] : a[p * m + i];
                const T bv = tb == Trans::No ? b[p * n + j] : b[j * k + p];
                acc += av * bv;
            }
            c[i * n + j] = acc;
        }
    }
}

template <typename T>
void softmax_rows(std::size_t rows, std::size_t cols, T* m) {
    for (std::size_t r = 0; r < rows; ++r) {
        T* row = m + r * cols;
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, row[c]);
        T sum = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            sum += row[c];
        }
        for (std::size_t c = 0; c < cols; ++c) row[c] /= sum;
    }
}

}  // namespace serial

namespace kernels {

/// Work (multiply-adds) below which kernels stay on the calling thread.
inline constexpr std::size_t kParallelThreshold = 1u << 16;

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Same contract as serial::gemm. The inner loop order is i-p-j for the
/// untransposed-B cases, which keeps the per-element summation order in p.
template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate) {
    const bool par = m * n * k >= kParallelThreshold && m > 1;
    const auto rows = static_cast<std::ptrdiff_t>(m);
    if (tb == Trans::No) {
#pragma omp parallel for schedule(static) if (par)
        for (std::ptrdiff_t si = 0; si < rows; ++si) {
            const auto i = static_cast<std::size_t>(si);
            T* crow = c + i * n;
            if (!accumulate) std::fill(crow, crow + n, T{0});
            for (std::size_t p = 0; p < k; ++p) {
                const T av = ta == Trans::No ? a[i * k + p] : a[p * m + i];
                const T* brow = b + p * n;
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    } else {
#pragma omp parallel for schedule(static) if (par)
        for (std::ptrdiff_t si = 0; si < rows; ++si) {
            const auto i = static_cast<std::size_t>(si);
            for (std::size_t j = 0; j < n; ++j) {
                const T* brow = b + j * k;
                T acc = accumulate ? c[i * n + j] : T{0};
                if (ta == Trans::No) {
                    const T* arow = a + i * k;
                    for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
                } else {
                    for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * brow[p];
                }
                c[i * n + j] = acc;
            }
        }
    }
}

template <typename T>
void softmax_rows(std::size_t rows, std::size_t cols, T* m) {
    const bool par = rows * cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
    for (std::ptrdiff_t sr = 0; sr < static_cast<std::ptrdiff_t>(rows); ++sr) {
        serial::softmax_rows<T>(1, cols, m + static_cast<std::size_t>(sr) * cols);
    }
}

}  // namespace kernels
}  // namespace fcm::nd
