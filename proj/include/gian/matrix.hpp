#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace gian {

// Dense row-major matrix of 64-bit reals. The only tensor type in the
// project; everything is desk-scale so no views, no strides, no SIMD.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(check_size(rows, cols), 0.0) {}
  Matrix(int rows, int cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }
  static Matrix ones(int rows, int cols);
  static Matrix identity(int n);
  static Matrix filled(int rows, int cols, double v);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double& at(std::size_t i) { return data_[i]; }
  double at(std::size_t i) const { return data_[i]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_str() const;

  bool all_finite() const;
  void fill(double v);

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  static std::size_t check_size(int rows, int cols);

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Plain (non-differentiated) kernels shared by the network forward paths
// and file I/O. Test oracles deliberately do not call these; they keep
// their own straight-line loops.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& a);

}  // namespace gian
