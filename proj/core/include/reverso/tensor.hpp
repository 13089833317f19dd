#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace reverso {

// Row-major 2D tensor of doubles. Rows index sequence positions, columns
// index channels.
struct Tensor2 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }

    std::size_t size() const { return data.size(); }

    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
    void zero() { fill(0.0); }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

// A learnable tensor with its gradient slot. Gradients are zeroed before
// each backward pass.
struct GradPair {
    Tensor2 value;
    Tensor2 grad;

    GradPair() = default;
    GradPair(std::size_t r, std::size_t c) : value(r, c), grad(r, c) {}

    void zero_grad() { grad.zero(); }
    std::size_t size() const { return value.size(); }
};

// Named reference to a parameter, used by the optimizer, checkpointing and
// gradient checks.
struct ParamRef {
    std::string name;
    GradPair* p = nullptr;
};

inline void check_shape(const Tensor2& t, std::size_t r, std::size_t c, const char* what) {
    if (t.rows != r || t.cols != c)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(r) +
                                    "x" + std::to_string(c) + ", got " +
                                    std::to_string(t.rows) + "x" + std::to_string(t.cols));
}

}  // namespace reverso
