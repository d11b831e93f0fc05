#pragma once

#include <cassert>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "vispro/common.hpp"

namespace vispro {

// Dense row-major tensor, rank <= 4. Spatial layout is height x width x channels.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;

    explicit Tensor(std::vector<int> s, T fill = T{0}) : shape(std::move(s)) {
        assert(shape.size() <= 4);
        data.assign(static_cast<std::size_t>(size_of(shape)), fill);
    }

    static long size_of(const std::vector<int>& s) {
        long n = 1;
        for (const int d : s) {
            assert(d > 0);
            n *= d;
        }
        return n;
    }

    long size() const { return static_cast<long>(data.size()); }

    int dim(std::size_t i) const { return shape[i]; }

    // h x w x c indexing
    T& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * shape[1] + x) * shape[2] + c];
    }
    T at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * shape[1] + x) * shape[2] + c];
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }

    void zero() { std::fill(data.begin(), data.end(), T{0}); }
};

template <typename T>
std::string shape_string(const Tensor<T>& t) {
    std::string s = "[";
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
        if (i) s += " x ";
        s += std::to_string(t.shape[i]);
    }
    return s + "]";
}

template <typename T>
bool all_finite(const Tensor<T>& t) {
    for (const T v : t.data) {
        if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
}

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
    Tensor<To> out(t.shape);
    for (long i = 0; i < t.size(); ++i) out.data[i] = static_cast<To>(t.data[i]);
    return out;
}

}  // namespace vispro
