#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace idapbc {

using Vec = std::vector<double>;
using ComplexScalar = std::complex<double>;

/// Dense row-major matrix. The dimension cap guards against runaway
/// allocations while leaving room for dictionary Jacobians (one row per
/// monomial).
class Mat {
public:
    Mat() = default;

    Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
        check_dims(rows, cols);
    }

    Mat(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ > 0 ? init.begin()->size() : 0;
        check_dims(rows_, cols_);
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) {
                throw std::invalid_argument("Mat: ragged initializer list");
            }
            for (double v : row) {
                data_.push_back(v);
            }
        }
    }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    static Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }

    /// Column vector from a Vec.
    static Mat column(const Vec& v) {
        Mat m(v.size(), 1);
        for (std::size_t i = 0; i < v.size(); ++i) {
            m(i, 0) = v[i];
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    Mat transpose() const {
        Mat t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                t(c, r) = (*this)(r, c);
            }
        }
        return t;
    }

    Mat operator+(const Mat& o) const {
        require_same_shape(o);
        Mat out = *this;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            out.data_[i] += o.data_[i];
        }
        return out;
    }

    Mat operator-(const Mat& o) const {
        require_same_shape(o);
        Mat out = *this;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            out.data_[i] -= o.data_[i];
        }
        return out;
    }

    Mat operator*(const Mat& o) const {
        if (cols_ != o.rows_) {
            throw std::invalid_argument("Mat: inner dimensions do not match");
        }
        Mat out(rows_, o.cols_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t k = 0; k < cols_; ++k) {
                const double a = (*this)(r, k);
                for (std::size_t c = 0; c < o.cols_; ++c) {
                    out(r, c) += a * o(k, c);
                }
            }
        }
        return out;
    }

    Mat operator*(double s) const {
        Mat out = *this;
        for (double& v : out.data_) {
            v *= s;
        }
        return out;
    }

    Vec operator*(const Vec& v) const {
        if (cols_ != v.size()) {
            throw std::invalid_argument("Mat: vector length does not match columns");
        }
        Vec out(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < cols_; ++c) {
                acc += (*this)(r, c) * v[c];
            }
            out[r] = acc;
        }
        return out;
    }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < rows_ && i < cols_; ++i) {
            t += (*this)(i, i);
        }
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) {
            s += v * v;
        }
        return std::sqrt(s);
    }

    bool is_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    }

    const std::vector<double>& data() const { return data_; }

private:
    static void check_dims(std::size_t rows, std::size_t cols) {
        if (rows == 0 || cols == 0 || rows > 256 || cols > 256) {
            throw std::invalid_argument("Mat: dimensions must be in 1..256");
        }
    }

    void require_same_shape(const Mat& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) {
            throw std::invalid_argument("Mat: shape mismatch");
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Mat operator*(double s, const Mat& m) { return m * s; }

// Small vector helpers shared across the library.

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dot: length mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

inline double norm2_squared(const Vec& v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return s;
}

inline double norm2(const Vec& v) { return std::sqrt(norm2_squared(v)); }

inline double max_abs(const Vec& v) {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

inline bool is_finite(const Vec& v) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

inline Vec operator+(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("Vec add: length mismatch");
    }
    Vec out = a;
    for (std::size_t i = 0; i < b.size(); ++i) {
        out[i] += b[i];
    }
    return out;
}

inline Vec operator-(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("Vec sub: length mismatch");
    }
    Vec out = a;
    for (std::size_t i = 0; i < b.size(); ++i) {
        out[i] -= b[i];
    }
    return out;
}

inline Vec operator*(double s, const Vec& v) {
    Vec out = v;
    for (double& x : out) {
        x *= s;
    }
    return out;
}

}  // namespace idapbc
