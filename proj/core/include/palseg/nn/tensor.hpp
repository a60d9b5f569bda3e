#pragma once

#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "palseg/common/check.hpp"

namespace palseg::nn {

/// Dense row-major tensor with value semantics. The NN stack keeps every
/// activation and parameter in NCHW layout.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::int64_t> shape, T fill = T(0))
        : shape_(std::move(shape)), data_(checked_numel(shape_), fill) {}

    static Tensor from_data(std::vector<std::int64_t> shape, std::vector<T> data) {
        Tensor t;
        t.shape_ = std::move(shape);
        PALSEG_CHECK(data.size() == checked_numel(t.shape_),
                     "data size ", data.size(), " does not match shape ", shape_str(t.shape_));
        t.data_ = std::move(data);
        return t;
    }

    const std::vector<std::int64_t>& shape() const { return shape_; }
    int ndim() const { return static_cast<int>(shape_.size()); }
    std::int64_t dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
    std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& vec() { return data_; }
    const std::vector<T>& vec() const { return data_; }

    T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    T operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    /// NCHW accessor.
    T& at4(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
        return data_[static_cast<std::size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
    }
    T at4(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
        return data_[static_cast<std::size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
    }

    T& at2(std::int64_t i, std::int64_t j) {
        return data_[static_cast<std::size_t>(i * shape_[1] + j)];
    }
    T at2(std::int64_t i, std::int64_t j) const {
        return data_[static_cast<std::size_t>(i * shape_[1] + j)];
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    Tensor reshaped(std::vector<std::int64_t> new_shape) const {
        PALSEG_CHECK(checked_numel(new_shape) == data_.size(),
                     "cannot reshape ", shape_str(shape_), " to ", shape_str(new_shape));
        Tensor t = *this;
        t.shape_ = std::move(new_shape);
        return t;
    }

    std::string shape_str() const { return shape_str(shape_); }

    static std::string shape_str(const std::vector<std::int64_t>& s) {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) os << ", ";
            os << s[i];
        }
        os << "]";
        return os.str();
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> t(shape_);
        for (std::size_t i = 0; i < data_.size(); ++i) {
            t.data()[i] = static_cast<U>(data_[i]);
        }
        return t;
    }

private:
    static std::size_t checked_numel(const std::vector<std::int64_t>& shape) {
        std::size_t n = 1;
        for (std::int64_t d : shape) {
            PALSEG_CHECK(d >= 0, "negative dimension in shape ", shape_str(shape));
            n *= static_cast<std::size_t>(d);
        }
        return shape.empty() ? 0 : n;
    }

    std::vector<std::int64_t> shape_;
    std::vector<T> data_;
};

} // namespace palseg::nn
