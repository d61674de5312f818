#pragma once

// Discrete L^2 calculus on a uniform 1-D grid and the small dense linear
// algebra used by the chart and Hessian machinery.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lojalab/error.hpp"

namespace lojalab {

/// Uniform mesh on [a,b] with n interior nodes and homogeneous Dirichlet
/// boundary; interior node i (0-based) sits at a + (i+1)h.
class Grid1D {
 public:
  Grid1D(double a, double b, std::size_t n);

  /// Euclidean coordinate space R^dim seen as a unit-spacing lattice, so the
  /// grid inner product reduces to the plain dot product. Allows dim >= 1.
  static Grid1D coordinates(std::size_t dim);

  double a() const { return a_; }
  double b() const { return b_; }
  std::size_t n() const { return n_; }
  double h() const { return h_; }
  double node(std::size_t i) const { return a_ + static_cast<double>(i + 1) * h_; }
  bool is_coordinate_space() const { return coordinates_; }

  friend bool operator==(const Grid1D& lhs, const Grid1D& rhs) {
    return lhs.a_ == rhs.a_ && lhs.b_ == rhs.b_ && lhs.n_ == rhs.n_;
  }

 private:
  Grid1D(double a, double b, std::size_t n, bool coordinates);

  double a_;
  double b_;
  std::size_t n_;
  double h_;
  bool coordinates_ = false;
};

/// Interior nodal values of a function vanishing on the boundary.
class Field {
 public:
  explicit Field(const Grid1D& grid);
  Field(const Grid1D& grid, std::vector<double> values);

  static Field sample(const Grid1D& grid, const std::function<double(double)>& f);
  static Field constant(const Grid1D& grid, double c);

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  std::span<const double> view() const { return values_; }

  bool all_finite() const;
  double max_abs() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
  /// this += s * x
  Field& axpy(double s, const Field& x);

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

Field operator+(Field lhs, const Field& rhs);
Field operator-(Field lhs, const Field& rhs);
Field operator*(double s, Field f);

void require_same_grid(const Field& u, const Field& v);

/// Discrete L^2 pairing h * sum u_i v_i.
double inner(const Field& u, const Field& v);
double norm(const Field& u);

/// Central first difference with zero ghost values.
Field d1(const Field& u);
/// Three-point Laplacian with zero ghost values.
Field d2(const Field& u);

/// Smallest eigenvalue (2 - 2cos(k*pi*h))/h^2 of the k-th Dirichlet sine mode
/// of -d2 on an interval of unit length scaled by the grid.
double discrete_dirichlet_eigenvalue(const Grid1D& grid, int k);

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const std::vector<double>& data() const { return data_; }

  std::vector<double> column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);
  DenseMatrix transpose() const;
  double frobenius_norm() const;
  double max_abs() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
std::vector<double> operator*(const DenseMatrix& a, std::span<const double> x);
/// a^T x without forming the transpose.
std::vector<double> transpose_times(const DenseMatrix& a, std::span<const double> x);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

struct Svd {
  DenseMatrix U;          // rows x k, orthonormal columns
  std::vector<double> s;  // k = min(rows, cols) values, descending
  DenseMatrix V;          // cols x k, orthonormal columns
};

/// Thin singular value decomposition by one-sided (Hestenes) Jacobi.
/// Columns of U belonging to zero singular values are completed to an
/// orthonormal set.
Svd svd_small(const DenseMatrix& m);

/// Largest singular value.
double spectral_norm(const DenseMatrix& m);

struct SymEig {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column j pairs with values[j]
};

/// Cyclic Jacobi eigensolver for symmetric matrices.
SymEig sym_eigs(const DenseMatrix& m);

/// Orthonormal basis (as columns) of the Euclidean orthogonal complement of
/// the span of q's columns; q must have orthonormal columns.
DenseMatrix orthonormal_complement(const DenseMatrix& q);

/// Orthonormal basis of the column space of a full-column-rank matrix
/// (modified Gram-Schmidt with one reorthogonalization pass).
DenseMatrix orthonormalize_columns(const DenseMatrix& a);

/// Solves A X = B by LU with partial pivoting.
DenseMatrix solve(const DenseMatrix& a, const DenseMatrix& b);
std::vector<double> solve(const DenseMatrix& a, std::span<const double> b);

struct LineFit {
  double slope;
  double intercept;
  double r2;
};

LineFit linfit(std::span<const double> x, std::span<const double> y);

}  // namespace lojalab
