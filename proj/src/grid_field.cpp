#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lojalab/numerics.hpp"

namespace lojalab {

Grid1D::Grid1D(double a, double b, std::size_t n) : Grid1D(a, b, n, false) {}

Grid1D::Grid1D(double a, double b, std::size_t n, bool coordinates)
    : a_(a), b_(b), n_(n), h_(0.0), coordinates_(coordinates) {
  require(std::isfinite(a) && std::isfinite(b) && a < b, "grid requires finite a < b");
  if (coordinates) {
    require(n >= 1, "coordinate space needs dimension >= 1");
  } else {
    require(n >= 3, "grid requires n >= 3 interior nodes, got " + std::to_string(n));
  }
  h_ = (b - a) / static_cast<double>(n + 1);
}

Grid1D Grid1D::coordinates(std::size_t dim) {
  return Grid1D(0.0, static_cast<double>(dim + 1), dim, true);
}

Field::Field(const Grid1D& grid) : grid_(grid), values_(grid.n(), 0.0) {}

Field::Field(const Grid1D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  require(values_.size() == grid_.n(), "field length " + std::to_string(values_.size()) +
                                           " does not match grid size " +
                                           std::to_string(grid_.n()));
  require(all_finite(), "field entries must be finite");
}

Field Field::sample(const Grid1D& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) v[i] = f(grid.node(i));
  return Field(grid, std::move(v));
}

Field Field::constant(const Grid1D& grid, double c) {
  return Field(grid, std::vector<double>(grid.n(), c));
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double Field::max_abs() const {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

void require_same_grid(const Field& u, const Field& v) {
  require(u.grid() == v.grid() && u.size() == v.size(), "fields live on different grids");
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& x : values_) x *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& x) {
  require_same_grid(*this, x);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * x.values_[i];
  return *this;
}

Field operator+(Field lhs, const Field& rhs) { return lhs += rhs; }
Field operator-(Field lhs, const Field& rhs) { return lhs -= rhs; }
Field operator*(double s, Field f) { return f *= s; }

double inner(const Field& u, const Field& v) {
  require_same_grid(u, v);
  return u.grid().h() * dot(u.view(), v.view());
}

double norm(const Field& u) { return std::sqrt(inner(u, u)); }

Field d1(const Field& u) {
  const std::size_t n = u.size();
  const double h = u.grid().h();
  Field out(u.grid());
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? u[i - 1] : 0.0;
    const double right = i + 1 < n ? u[i + 1] : 0.0;
    out[i] = (right - left) / (2.0 * h);
  }
  return out;
}

Field d2(const Field& u) {
  const std::size_t n = u.size();
  const double h2 = u.grid().h() * u.grid().h();
  Field out(u.grid());
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? u[i - 1] : 0.0;
    const double right = i + 1 < n ? u[i + 1] : 0.0;
    out[i] = (right - 2.0 * u[i] + left) / h2;
  }
  return out;
}

double discrete_dirichlet_eigenvalue(const Grid1D& grid, int k) {
  const double h = grid.h();
  const double length = grid.b() - grid.a();
  return (2.0 - 2.0 * std::cos(k * std::numbers::pi * h / length)) / (h * h);
}

}  // namespace lojalab
