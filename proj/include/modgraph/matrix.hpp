#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace modgraph {

/// Dense row-major matrix of doubles. Vectors are 1×n matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// "RxC", used in error messages.
  std::string shape_string() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// a · bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// aᵀ · b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

/// Adds a 1×cols bias to every row.
Matrix add_row_bias(const Matrix& m, const Matrix& bias);

/// Throws DegenerateError naming the first row whose norm is below 1e-12.
Matrix l2_normalize_rows(const Matrix& m);

/// Rows of `m` at `indices`, in order.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> indices);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

/// True when every entry is finite.
bool all_finite(const Matrix& m);

/// Largest |a - b| over matching entries; shapes must agree.
double max_abs_diff(const Matrix& a, const Matrix& b);

inline constexpr double kMinNorm = 1e-12;

}  // namespace modgraph
