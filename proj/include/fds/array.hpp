#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <vector>

namespace fds {

using Real = double;
using Complex = std::complex<double>;

// Dense row-major 2D grid, indexed (row, col) = (y, x).
template <typename T>
class Array2D {
public:
    Array2D() = default;
    Array2D(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(std::size_t y, std::size_t x) {
        assert(y < rows_ && x < cols_);
        return data_[y * cols_ + x];
    }
    const T& operator()(std::size_t y, std::size_t x) const {
        assert(y < rows_ && x < cols_);
        return data_[y * cols_ + x];
    }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& raw() { return data_; }
    const std::vector<T>& raw() const { return data_; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Array2D& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

// Dense 3D grid ordered [z][y][x].
template <typename T>
class Array3D {
public:
    Array3D() = default;
    Array3D(std::size_t nz, std::size_t ny, std::size_t nx, T fill = T{})
        : nz_(nz), ny_(ny), nx_(nx), data_(nz * ny * nx, fill) {}

    std::size_t nz() const { return nz_; }
    std::size_t ny() const { return ny_; }
    std::size_t nx() const { return nx_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(std::size_t z, std::size_t y, std::size_t x) {
        assert(z < nz_ && y < ny_ && x < nx_);
        return data_[(z * ny_ + y) * nx_ + x];
    }
    const T& operator()(std::size_t z, std::size_t y, std::size_t x) const {
        assert(z < nz_ && y < ny_ && x < nx_);
        return data_[(z * ny_ + y) * nx_ + x];
    }

    T* slice(std::size_t z) { return data_.data() + z * ny_ * nx_; }
    const T* slice(std::size_t z) const { return data_.data() + z * ny_ * nx_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& raw() { return data_; }
    const std::vector<T>& raw() const { return data_; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Array3D& o) const {
        return nz_ == o.nz_ && ny_ == o.ny_ && nx_ == o.nx_;
    }

private:
    std::size_t nz_ = 0, ny_ = 0, nx_ = 0;
    std::vector<T> data_;
};

template <typename A>
Real max_value(const A& a) {
    Real m = -std::numeric_limits<Real>::infinity();
    for (auto v : a.raw()) m = std::max(m, static_cast<Real>(v));
    return m;
}

template <typename A>
Real sum_value(const A& a) {
    Real s = 0;
    for (auto v : a.raw()) s += static_cast<Real>(v);
    return s;
}

template <typename A, typename B>
Real dot_value(const A& a, const B& b) {
    Real s = 0;
    for (std::size_t i = 0; i < a.raw().size(); ++i)
        s += static_cast<Real>(a.raw()[i]) * static_cast<Real>(b.raw()[i]);
    return s;
}

}  // namespace fds
