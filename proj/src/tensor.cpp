#include "nntf/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nntf {

namespace {

std::size_t checked_volume(const std::vector<std::size_t>& shape) {
    if (shape.empty())
        throw std::invalid_argument("tensor shape must have at least one mode");
    std::size_t volume = 1;
    for (std::size_t extent : shape) {
        if (extent == 0)
            throw std::invalid_argument("tensor mode sizes must be positive");
        volume *= extent;
    }
    return volume;
}

// Row-major odometer: advances idx with the last mode fastest, in step with
// a flat index scan.
inline void advance_index(std::vector<std::size_t>& idx, const std::vector<std::size_t>& shape) {
    for (std::size_t k = shape.size(); k-- > 0;) {
        if (++idx[k] < shape[k])
            return;
        idx[k] = 0;
    }
}

} // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("matrix dimensions must be positive");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("matrix dimensions must be positive");
    if (data_.size() != rows * cols)
        throw std::invalid_argument("matrix data length does not match rows * cols");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    data_.assign(checked_volume(shape_), 0.0);
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != checked_volume(shape_))
        throw std::invalid_argument("tensor data length does not match shape volume");
}

DenseTensor DenseTensor::assert_nonnegative(std::vector<std::size_t> shape,
                                            std::vector<double> data) {
    DenseTensor t(std::move(shape), std::move(data));
    require_nonnegative(t, "tensor");
    return t;
}

void require_nonnegative(const DenseTensor& t, const char* what) {
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] < 0.0)
            throw std::invalid_argument(std::string(what) + " has a negative entry at flat index " +
                                        std::to_string(i));
}

void require_nonnegative(const Matrix& m, const char* what) {
    const double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i)
        if (p[i] < 0.0)
            throw std::invalid_argument(std::string(what) + " has a negative entry at flat index " +
                                        std::to_string(i));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions do not match");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.data() + i * c.cols();
        const double* ai = a.data() + i * a.cols();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = ai[k];
            const double* bk = b.data() + k * b.cols();
            for (std::size_t j = 0; j < b.cols(); ++j)
                ci[j] += aik * bk[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw std::invalid_argument("matmul_tn: inner dimensions do not match");
    Matrix c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* ak = a.data() + k * a.cols();
        const double* bk = b.data() + k * b.cols();
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = ak[i];
            double* ci = c.data() + i * c.cols();
            for (std::size_t j = 0; j < b.cols(); ++j)
                ci[j] += aki * bk[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw std::invalid_argument("matmul_nt: inner dimensions do not match");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.data() + i * a.cols();
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* bj = b.data() + j * b.cols();
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k)
                sum += ai[k] * bj[k];
            c(i, j) = sum;
        }
    }
    return c;
}

Matrix gram(const Matrix& a) { return matmul_tn(a, a); }

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            t(j, i) = a(i, j);
    return t;
}

double frobenius_norm(const Matrix& m) {
    double sum = 0.0;
    const double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i)
        sum += p[i] * p[i];
    return std::sqrt(sum);
}

Matrix unfold(const DenseTensor& t, std::size_t mode) {
    const std::size_t order = t.order();
    if (mode >= order)
        throw std::invalid_argument("unfold: mode " + std::to_string(mode) +
                                    " out of range for order " + std::to_string(order));
    const auto& shape = t.shape();
    const std::size_t rows = shape[mode];
    const std::size_t cols = t.size() / rows;

    // Column strides J_k: product of kept mode sizes below k.
    std::vector<std::size_t> colstride(order, 0);
    std::size_t acc = 1;
    for (std::size_t k = 0; k < order; ++k) {
        if (k == mode)
            continue;
        colstride[k] = acc;
        acc *= shape[k];
    }

    Matrix m(rows, cols);
    std::vector<std::size_t> idx(order, 0);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        std::size_t col = 0;
        for (std::size_t k = 0; k < order; ++k)
            if (k != mode)
                col += idx[k] * colstride[k];
        m(idx[mode], col) = t[flat];
        advance_index(idx, shape);
    }
    return m;
}

DenseTensor fold(const Matrix& m, std::size_t mode, const std::vector<std::size_t>& shape) {
    const std::size_t order = shape.size();
    if (mode >= order)
        throw std::invalid_argument("fold: mode " + std::to_string(mode) +
                                    " out of range for order " + std::to_string(order));
    DenseTensor t(shape);
    if (m.rows() != shape[mode] || m.cols() != t.size() / shape[mode])
        throw std::invalid_argument("fold: matrix dimensions inconsistent with shape and mode");

    std::vector<std::size_t> colstride(order, 0);
    std::size_t acc = 1;
    for (std::size_t k = 0; k < order; ++k) {
        if (k == mode)
            continue;
        colstride[k] = acc;
        acc *= shape[k];
    }

    std::vector<std::size_t> idx(order, 0);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        std::size_t col = 0;
        for (std::size_t k = 0; k < order; ++k)
            if (k != mode)
                col += idx[k] * colstride[k];
        t[flat] = m(idx[mode], col);
        advance_index(idx, shape);
    }
    return t;
}

DenseTensor mode_n_product(const DenseTensor& t, const Matrix& m, std::size_t mode) {
    if (mode >= t.order())
        throw std::invalid_argument("mode_n_product: mode out of range");
    if (m.cols() != t.shape()[mode])
        throw std::invalid_argument("mode_n_product: matrix columns do not match mode size");
    std::vector<std::size_t> new_shape = t.shape();
    new_shape[mode] = m.rows();
    return fold(matmul(m, unfold(t, mode)), mode, new_shape);
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw std::invalid_argument("khatri_rao: column counts do not match");
    Matrix c(a.rows() * b.rows(), a.cols());
    for (std::size_t ia = 0; ia < a.rows(); ++ia)
        for (std::size_t ib = 0; ib < b.rows(); ++ib) {
            const std::size_t row = ia * b.rows() + ib;
            for (std::size_t r = 0; r < a.cols(); ++r)
                c(row, r) = a(ia, r) * b(ib, r);
        }
    return c;
}

double frobenius_norm(const DenseTensor& t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
        sum += t[i] * t[i];
    return std::sqrt(sum);
}

double relative_error(const DenseTensor& t, const DenseTensor& approx) {
    if (t.shape() != approx.shape())
        throw std::invalid_argument("relative_error: shapes do not match");
    double ref = 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        ref += t[i] * t[i];
        const double d = t[i] - approx[i];
        diff += d * d;
    }
    if (ref == 0.0)
        throw std::domain_error("relative_error: reference tensor has zero norm");
    return std::sqrt(diff / ref);
}

} // namespace nntf
