#pragma once

// Standard includes
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace prmbound {

// Small dense row-major matrix over an arbitrary ring (Rational, Poly, double).
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, const T& fill = T(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<T>& data() const { return data_; }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }
    bool operator!=(const Matrix& o) const { return !(*this == o); }

    Matrix& operator+=(const Matrix& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

    template <class S>
    Matrix scaled(const S& s) const {
        Matrix out = *this;
        for (auto& v : out.data_) v = v * s;
        return out;
    }

    template <class U, class F>
    Matrix<U> map(F f) const {
        Matrix<U> out(rows_, cols_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out(r, c) = f((*this)(r, c));
        return out;
    }

private:
    void check_same(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

// Sum of entries of the elementwise product.
template <class A, class B>
auto frobenius(const Matrix<A>& a, const Matrix<B>& b) -> decltype(a(0, 0) * b(0, 0)) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("frobenius: shape mismatch");
    using R = decltype(a(0, 0) * b(0, 0));
    R acc = R(0);
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) acc += a(r, c) * b(r, c);
    return acc;
}

// Outer product u v^T.
template <class T>
Matrix<T> outer(const std::vector<T>& u, const std::vector<T>& v) {
    Matrix<T> m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
    return m;
}

}  // namespace prmbound
