#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fcm/ndcore/tensor.hpp"

namespace fcm::nd {

/// One learnable tensor plus its gradient and Adam state.
template <typename T>
struct Param {
    Tensor<T> value;
    Tensor<T> grad;  // same shape as value; meaningful only when has_grad
    Tensor<T> m;     // first moment
    Tensor<T> v;     // second moment
    std::uint64_t step = 0;
    bool has_grad = false;

    explicit Param(Tensor<T> init)
        : value(std::move(init)), grad(value.shape()), m(value.shape()), v(value.shape()) {}
};

/// Named parameters, ordered by name so iteration (and therefore every
/// reduction over parameters) is deterministic.
template <typename T>
class ParamStore {
public:
    Param<T>& add(const std::string& name, Tensor<T> init) {
        auto [it, inserted] = params_.try_emplace(name, std::move(init));
        if (!inserted) throw ConfigError("duplicate parameter '" + name + "'");
        return it->second;
    }

    bool contains(const std::string& name) const { return params_.count(name) != 0; }

    Param<T>& at(const std::string& name) {
        auto it = params_.find(name);
        if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
        return it->second;
    }
    const Param<T>& at(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
        return it->second;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(params_.size());
        for (const auto& [name, _] : params_) out.push_back(name);
        return out;
    }

    std::size_t size() const noexcept { return params_.size(); }

    std::size_t numel() const {
        std::size_t n = 0;
        for (const auto& [_, p] : params_) n += p.value.numel();
        return n;
    }

    /// Marks every parameter as having a (zero) gradient.
    void zero_grad() {
        for (auto& [_, p] : params_) {
            p.grad.fill(T{0});
            p.has_grad = true;
        }
    }

    void clear_grad() {
        for (auto& [_, p] : params_) {
            p.grad.fill(T{0});
            p.has_grad = false;
        }
    }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::map<std::string, Param<T>> params_;
};

}  // namespace fcm::nd
