#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fcm/error.hpp"

namespace fcm::nd {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << ']';
    return os.str();
}

/// Dense row-major tensor of rank 1..3. Every dimension is positive.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;

    explicit Tensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)) {
        validate_shape();
        data_.assign(shape_numel(shape_), fill);
    }

    Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        validate_shape();
        if (data_.size() != shape_numel(shape_))
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_str(shape_));
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, T fill = T{0}) {
        return Tensor({rows, cols}, fill);
    }

    static Tensor from_rows(std::initializer_list<std::initializer_list<T>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r ? rows.begin()->size() : 0;
        std::vector<T> data;
        data.reserve(r * c);
        for (const auto& row : rows) {
            if (row.size() != c) throw ShapeError("ragged initializer rows");
            data.insert(data.end(), row.begin(), row.end());
        }
        return Tensor({r, c}, std::move(data));
    }

    static Tensor scalar(T v) { return Tensor({1}, std::vector<T>{v}); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t numel() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::size_t rows() const {
        require_rank(2);
        return shape_[0];
    }
    std::size_t cols() const {
        require_rank(2);
        return shape_[1];
    }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
    T& operator()(std::size_t a, std::size_t b, std::size_t c) {
        return data_[(a * shape_[1] + b) * shape_[2] + c];
    }
    const T& operator()(std::size_t a, std::size_t b, std::size_t c) const {
        return data_[(a * shape_[1] + b) * shape_[2] + c];
    }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T item() const {
        if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape_));
        return data_[0];
    }

    std::span<T> span() noexcept { return data_; }
    std::span<const T> span() const noexcept { return data_; }
    std::span<T> row(std::size_t r) { return std::span<T>(data_).subspan(r * shape_[1], shape_[1]); }
    std::span<const T> row(std::size_t r) const {
        return std::span<const T>(data_).subspan(r * shape_[1], shape_[1]);
    }

    std::vector<T>& data() noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
    }

    bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

    void require_rank(std::size_t r) const {
        if (shape_.size() != r)
            throw ShapeError("expected rank-" + std::to_string(r) + " tensor, got " + shape_str(shape_));
    }

    template <typename U>
    Tensor<U> cast() const {
        std::vector<U> out(data_.begin(), data_.end());
        return Tensor<U>(shape_, std::move(out));
    }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    void validate_shape() const {
        if (shape_.empty() || shape_.size() > 3)
            throw ShapeError("tensor rank must be 1..3, got " + std::to_string(shape_.size()));
        for (auto d : shape_)
            if (d == 0) throw ShapeError("tensor dimensions must be positive: " + shape_str(shape_));
    }

    Shape shape_;
    std::vector<T> data_;
};

template <typename T>
Tensor<T> transpose(const Tensor<T>& m) {
    m.require_rank(2);
    Tensor<T> out = Tensor<T>::matrix(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
    return out;
}

template <typename T>
T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw ShapeError("max_abs_diff: shape mismatch");
    T worst = 0;
    for (std::size_t i = 0; i < a.numel(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace fcm::nd
