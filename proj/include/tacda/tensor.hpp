#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "tacda/error.hpp"
#include "tacda/rng.hpp"

namespace tacda {

// Dense real64 array with a shape. Row-major; rank 1 and 2 cover everything
// this pipeline needs (windows are M x L, batches are B x F).
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)),
          data_(std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                                [](std::size_t a, std::size_t b) { return a * b; }),
                0.0) {}

    static Tensor zeros(std::initializer_list<std::size_t> shape) {
        return Tensor(std::vector<std::size_t>(shape));
    }
    static Tensor zeros(const std::vector<std::size_t>& shape) { return Tensor(shape); }

    static Tensor scalar(double v) {
        Tensor t = zeros({1});
        t.data_[0] = v;
        return t;
    }

    static Tensor from_vector(std::vector<double> v) {
        Tensor t;
        t.shape_ = {v.size()};
        t.data_ = std::move(v);
        return t;
    }

    static Tensor matrix(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }

    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
        require(v.size() == rows * cols, "Tensor::matrix: value count does not match shape");
        Tensor t;
        t.shape_ = {rows, cols};
        t.data_ = std::move(v);
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }

    std::size_t rows() const {
        require(rank() == 2, "Tensor::rows: rank-2 tensor required");
        return shape_[0];
    }
    std::size_t cols() const {
        require(rank() == 2, "Tensor::cols: rank-2 tensor required");
        return shape_[1];
    }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    double* row_ptr(std::size_t r) { return data_.data() + r * shape_[1]; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * shape_[1]; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape_.size(); ++i)
            s += (i ? "x" : "") + std::to_string(shape_[i]);
        return s + "]";
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// out = a * b for rank-2 operands. i-k-j loop order keeps the inner stride 1.
inline void matmul_into(const Tensor& a, const Tensor& b, Tensor& out) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    require(b.rows() == k, "matmul: inner dimensions disagree " + a.shape_str() + " * " + b.shape_str());
    require(out.rows() == m && out.cols() == n, "matmul: bad output shape");
    out.fill(0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b.row_ptr(p);
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    Tensor out = Tensor::matrix(a.rows(), b.cols());
    matmul_into(a, b, out);
    return out;
}

// dst += x * y^T   ((m x n) * (p x n)^T -> m x p); contiguous row dots.
inline void addmm_nt(Tensor& dst, const Tensor& x, const Tensor& y) {
    const std::size_t m = x.rows(), n = x.cols(), p = y.rows();
    require(y.cols() == n && dst.rows() == m && dst.cols() == p, "addmm_nt: shape mismatch");
    for (std::size_t i = 0; i < m; ++i) {
        const double* xrow = x.row_ptr(i);
        double* drow = dst.row_ptr(i);
        for (std::size_t j = 0; j < p; ++j) {
            const double* yrow = y.row_ptr(j);
            double acc = 0.0;
            for (std::size_t t = 0; t < n; ++t) acc += xrow[t] * yrow[t];
            drow[j] += acc;
        }
    }
}

// dst += x^T * y   ((m x k)^T * (m x n) -> k x n).
inline void addmm_tn(Tensor& dst, const Tensor& x, const Tensor& y) {
    const std::size_t m = x.rows(), k = x.cols(), n = y.cols();
    require(y.rows() == m && dst.rows() == k && dst.cols() == n, "addmm_tn: shape mismatch");
    for (std::size_t i = 0; i < m; ++i) {
        const double* xrow = x.row_ptr(i);
        const double* yrow = y.row_ptr(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double xv = xrow[p];
            if (xv == 0.0) continue;
            double* drow = dst.row_ptr(p);
            for (std::size_t j = 0; j < n; ++j) drow[j] += xv * yrow[j];
        }
    }
}

inline Tensor random_uniform(std::vector<std::size_t> shape, double lo, double hi, Rng& rng) {
    Tensor t{std::move(shape)};
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

}  // namespace tacda
