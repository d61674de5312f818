#include <cmath>
#include <numbers>

#include "lojalab/energy_models.hpp"

namespace lojalab {

ScalarFunction ScalarFunction::identity() {
  return {"identity", [](double s) { return s; }, [](double) { return 1.0; },
          [](double) { return 0.0; }};
}

ScalarFunction ScalarFunction::square() {
  return {"square", [](double s) { return s * s; }, [](double s) { return 2.0 * s; },
          [](double) { return 2.0; }};
}

ScalarFunction ScalarFunction::cube() {
  return {"cube", [](double s) { return s * s * s; }, [](double s) { return 3.0 * s * s; },
          [](double s) { return 6.0 * s; }};
}

ScalarFunction ScalarFunction::named(const std::string& name) {
  if (name == "identity") return identity();
  if (name == "square") return square();
  if (name == "cube") return cube();
  fail(ErrorKind::config_error, "unknown scalar function '" + name + "'");
}

namespace {

class IntegralConstraint final : public ConstraintModel {
 public:
  IntegralConstraint(const Grid1D& grid, ScalarFunction g, double target)
      : grid_(grid), g_(std::move(g)), target_(target) {
    require(g_.f && g_.df && g_.d2f, "integral constraint needs g, g' and g''");
  }

  std::string name() const override { return "integral(" + g_.name + ")"; }
  const Grid1D& grid() const override { return grid_; }
  std::size_t m() const override { return 1; }
  double scale() const override { return std::abs(target_); }

  std::vector<double> value(const Field& u) const override {
    check(u);
    double s = g_.f(0.0);  // trapezoid half-weights at both boundary nodes
    for (double x : u.values()) s += g_.f(x);
    return {grid_.h() * s - target_};
  }

  std::vector<Field> h_gradients(const Field& u) const override {
    check(u);
    Field g(grid_);
    for (std::size_t i = 0; i < u.size(); ++i) g[i] = g_.df(u[i]);
    return {std::move(g)};
  }

  Field hessian_apply(const Field& u, std::size_t k, const Field& v) const override {
    check(u);
    require(k == 0, "integral constraint has a single component");
    require_same_grid(u, v);
    Field out(grid_);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = g_.d2f(u[i]) * v[i];
    return out;
  }

 private:
  void check(const Field& u) const { require(u.grid() == grid_, "constraint: field on a different grid"); }

  Grid1D grid_;
  ScalarFunction g_;
  double target_;
};

class RevolutionVolume final : public ConstraintModel {
 public:
  RevolutionVolume(const Grid1D& grid, double nu) : grid_(grid), nu_(nu) {}

  std::string name() const override { return "volume"; }
  const Grid1D& grid() const override { return grid_; }
  std::size_t m() const override { return 1; }
  double scale() const override { return std::abs(nu_); }

  std::vector<double> value(const Field& u) const override {
    check(u);
    double s = 1.0;  // (1+0)^2 at the two boundary half-weights
    for (double x : u.values()) s += (1.0 + x) * (1.0 + x);
    return {std::numbers::pi * grid_.h() * s - nu_};
  }

  std::vector<Field> h_gradients(const Field& u) const override {
    check(u);
    Field g(grid_);
    for (std::size_t i = 0; i < u.size(); ++i) g[i] = 2.0 * std::numbers::pi * (1.0 + u[i]);
    return {std::move(g)};
  }

  Field hessian_apply(const Field& u, std::size_t k, const Field& v) const override {
    check(u);
    require(k == 0, "volume constraint has a single component");
    require_same_grid(u, v);
    return 2.0 * std::numbers::pi * v;
  }

 private:
  void check(const Field& u) const { require(u.grid() == grid_, "constraint: field on a different grid"); }

  Grid1D grid_;
  double nu_;
};

class NoConstraint final : public ConstraintModel {
 public:
  explicit NoConstraint(const Grid1D& grid) : grid_(grid) {}

  std::string name() const override { return "none"; }
  const Grid1D& grid() const override { return grid_; }
  std::size_t m() const override { return 0; }
  double scale() const override { return 0.0; }
  std::vector<double> value(const Field&) const override { return {}; }
  std::vector<Field> h_gradients(const Field&) const override { return {}; }
  Field hessian_apply(const Field&, std::size_t, const Field&) const override {
    fail(ErrorKind::contract_violation, "the empty constraint has no components");
  }

 private:
  Grid1D grid_;
};

}  // namespace

ConstraintPtr integral_constraint(const Grid1D& grid, ScalarFunction g, double target) {
  return std::make_shared<IntegralConstraint>(grid, std::move(g), target);
}

ConstraintPtr mass_constraint(const Grid1D& grid, double target) {
  return integral_constraint(grid, ScalarFunction::identity(), target);
}

ConstraintPtr revolution_volume_constraint(const Grid1D& grid, double nu) {
  return std::make_shared<RevolutionVolume>(grid, nu);
}

ConstraintPtr no_constraint(const Grid1D& grid) { return std::make_shared<NoConstraint>(grid); }

}  // namespace lojalab
