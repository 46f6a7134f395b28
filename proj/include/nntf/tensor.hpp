#pragma once

#include <cstddef>
#include <vector>

namespace nntf {

// Dense row-major matrix of doubles. The shared 2-D carrier for unfoldings
// and factor matrices.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    static Matrix identity(std::size_t n);

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Dense N-way tensor, flat row-major storage (last index fastest).
class DenseTensor {
  public:
    DenseTensor() = default;
    explicit DenseTensor(std::vector<std::size_t> shape);
    DenseTensor(std::vector<std::size_t> shape, std::vector<double> data);

    // Validating constructor: additionally rejects negative entries.
    static DenseTensor assert_nonnegative(std::vector<std::size_t> shape,
                                          std::vector<double> data);

    std::size_t order() const { return shape_.size(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

  private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Throws std::invalid_argument naming `what` if any entry is negative.
void require_nonnegative(const DenseTensor& t, const char* what);
void require_nonnegative(const Matrix& m, const char* what);

// Matrix kernels.
Matrix matmul(const Matrix& a, const Matrix& b);    // a * b
Matrix matmul_tn(const Matrix& a, const Matrix& b); // a^T * b
Matrix matmul_nt(const Matrix& a, const Matrix& b); // a * b^T
Matrix gram(const Matrix& a);                       // a^T * a
Matrix transpose(const Matrix& a);
double frobenius_norm(const Matrix& m);

// Mode-n matricization. Element (i_0,...,i_{N-1}) maps to row i_mode and
// column sum_{k != mode} i_k * J_k with J_k the product of the sizes of all
// modes below k, excluding the unfold mode. The first kept mode therefore
// varies fastest along columns. fold is the exact inverse.
Matrix unfold(const DenseTensor& t, std::size_t mode);
DenseTensor fold(const Matrix& m, std::size_t mode, const std::vector<std::size_t>& shape);

// Result replaces mode size I_mode with m.rows(); equals
// fold(m * unfold(t, mode), mode, new_shape).
DenseTensor mode_n_product(const DenseTensor& t, const Matrix& m, std::size_t mode);

// Column-wise Kronecker product: column r is kron(a_r, b_r), with b's index
// varying fastest.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

double frobenius_norm(const DenseTensor& t);
// ||t - approx||_F / ||t||_F. Shape mismatch -> invalid_argument,
// zero-norm reference -> domain_error.
double relative_error(const DenseTensor& t, const DenseTensor& approx);

} // namespace nntf
