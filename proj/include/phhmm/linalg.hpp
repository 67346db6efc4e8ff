#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace phhmm {

using Vec = std::vector<double>;

// Dense row-major matrix. Small sizes only (regime-phase chains and Moran
// chains are a handful of states), so everything is plain O(n^3) dense.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Vec row(std::size_t r) const;
  double row_sum(std::size_t r) const;

  Matrix transpose() const;

  bool operator==(const Matrix& other) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

// Row vector times matrix: (v^T A)^T.
Vec vec_mat(const Vec& v, const Matrix& a);
// Matrix times column vector.
Vec mat_vec(const Matrix& a, const Vec& v);

double dot(const Vec& a, const Vec& b);
double sum(const Vec& v);

// Solves A x = b by Gaussian elimination with partial pivoting.
// Throws NumericError if A is singular to working precision.
Vec solve(Matrix a, Vec b);

// Solves x (I - A) = e, i.e. the fundamental-matrix row sums (I - A)^{-1} e.
Vec fundamental_row_sums(const Matrix& a);

// Stationary distribution of a row-stochastic matrix restricted to its
// support: pi P = pi, sum(pi) = 1, solved as a dense linear system.
// Requires a single recurrent class; see reservoir.cpp for the class search.
Vec solve_stationary(const Matrix& p);

double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs_diff(const Vec& a, const Vec& b);

}  // namespace phhmm
