#include <algorithm>
#include <cmath>

#include "lojalab/energy_models.hpp"

namespace lojalab {

LambdaRule lambda_rule_from_string(const std::string& name) {
  if (name == "geometric") return LambdaRule::geometric;
  if (name == "inverse_square") return LambdaRule::inverse_square;
  fail(ErrorKind::config_error, "unknown lambda rule '" + name + "' (geometric | inverse_square)");
}

std::string to_string(LambdaRule rule) {
  return rule == LambdaRule::geometric ? "geometric" : "inverse_square";
}

SeqQuadModel SeqQuadModel::with_rule(std::size_t N, LambdaRule rule) {
  require(N >= 1, "sequence model needs N >= 1");
  SeqQuadModel model{N, std::vector<double>(N)};
  for (std::size_t k = 1; k <= N; ++k) {
    const double kk = static_cast<double>(k);
    model.lambda[k - 1] = rule == LambdaRule::geometric ? std::ldexp(1.0, -static_cast<int>(k))
                                                        : 1.0 / (kk * kk);
  }
  return model;
}

double seq_quad_energy(const SeqQuadModel& model, std::span<const double> x) {
  require(x.size() == model.N, "seq_quad_energy: length mismatch");
  double e = 0.0;
  for (std::size_t k = 0; k < model.N; ++k) e += model.lambda[k] * x[k] * x[k];
  return 0.5 * e;
}

std::vector<double> seq_quad_gradient(const SeqQuadModel& model, std::span<const double> x) {
  require(x.size() == model.N, "seq_quad_gradient: length mismatch");
  std::vector<double> g(model.N);
  for (std::size_t k = 0; k < model.N; ++k) g[k] = model.lambda[k] * x[k];
  return g;
}

namespace {

class DiagonalQuadratic final : public EnergyModel {
 public:
  explicit DiagonalQuadratic(std::vector<double> weights)
      : grid_(Grid1D::coordinates(weights.size())), weights_(std::move(weights)) {
    for (double w : weights_) require(std::isfinite(w) && w >= 0.0, "quadratic weights must be finite and >= 0");
  }

  std::string name() const override { return "seq_quad"; }
  const Grid1D& grid() const override { return grid_; }

  double energy(const Field& u) const override {
    check(u);
    double e = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) e += weights_[k] * u[k] * u[k];
    return 0.5 * e;
  }

  Field h_gradient(const Field& u) const override {
    check(u);
    Field g(grid_);
    for (std::size_t k = 0; k < u.size(); ++k) g[k] = weights_[k] * u[k];
    return g;
  }

  Field hessian_apply(const Field& u, const Field& v) const override {
    check(u);
    require_same_grid(u, v);
    Field out(grid_);
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = weights_[k] * v[k];
    return out;
  }

  double stiffness(const Field&) const override {
    return std::max(*std::max_element(weights_.begin(), weights_.end()), 1e-300);
  }

 private:
  void check(const Field& u) const { require(u.grid() == grid_, "seq_quad: dimension mismatch"); }

  Grid1D grid_;
  std::vector<double> weights_;
};

class Monomial final : public EnergyModel {
 public:
  explicit Monomial(int p) : grid_(Grid1D::coordinates(1)), p_(p) {
    require(p >= 1, "monomial power p must be >= 1");
  }

  std::string name() const override { return "monomial"; }
  const Grid1D& grid() const override { return grid_; }
  double energy(const Field& u) const override { return std::pow(u[0], 2 * p_); }

  Field h_gradient(const Field& u) const override {
    Field g(grid_);
    g[0] = 2.0 * p_ * std::pow(u[0], 2 * p_ - 1);
    return g;
  }

  Field hessian_apply(const Field& u, const Field& v) const override {
    Field out(grid_);
    out[0] = 2.0 * p_ * (2 * p_ - 1) * std::pow(u[0], 2 * p_ - 2) * v[0];
    return out;
  }

  double stiffness(const Field& u) const override {
    return std::max(2.0 * p_ * (2 * p_ - 1) * std::pow(u[0], 2 * p_ - 2), 1e-300);
  }

 private:
  Grid1D grid_;
  int p_;
};

// E(x) = x_0 + sum x'_n^2
class GraphExampleEnergy final : public EnergyModel {
 public:
  explicit GraphExampleEnergy(std::size_t N) : grid_(Grid1D::coordinates(N + 1)) {}

  std::string name() const override { return "constraint_hessian_example"; }
  const Grid1D& grid() const override { return grid_; }

  double energy(const Field& x) const override {
    double e = 0.0;
    for (std::size_t k = 1; k < x.size(); ++k) e += x[k] * x[k];
    return x[0] + e;
  }

  Field h_gradient(const Field& x) const override {
    Field g(grid_);
    g[0] = 1.0;
    for (std::size_t k = 1; k < x.size(); ++k) g[k] = 2.0 * x[k];
    return g;
  }

  Field hessian_apply(const Field&, const Field& v) const override {
    Field out(grid_);
    for (std::size_t k = 1; k < v.size(); ++k) out[k] = 2.0 * v[k];
    return out;
  }

  double stiffness(const Field&) const override { return 2.0; }

 private:
  Grid1D grid_;
};

// G(x) = x_0 - sum (lambda_n - 1) x'_n^2
class GraphExampleConstraint final : public ConstraintModel {
 public:
  explicit GraphExampleConstraint(std::vector<double> lambda)
      : grid_(Grid1D::coordinates(lambda.size() + 1)), lambda_(std::move(lambda)) {}

  std::string name() const override { return "graph"; }
  const Grid1D& grid() const override { return grid_; }
  std::size_t m() const override { return 1; }
  double scale() const override { return 0.0; }

  std::vector<double> value(const Field& x) const override {
    double psi = 0.0;
    for (std::size_t n = 1; n < x.size(); ++n) psi += (lambda_[n - 1] - 1.0) * x[n] * x[n];
    return {x[0] - psi};
  }

  std::vector<Field> h_gradients(const Field& x) const override {
    Field g(grid_);
    g[0] = 1.0;
    for (std::size_t n = 1; n < x.size(); ++n) g[n] = -2.0 * (lambda_[n - 1] - 1.0) * x[n];
    return {std::move(g)};
  }

  Field hessian_apply(const Field&, std::size_t k, const Field& v) const override {
    require(k == 0, "graph constraint has a single component");
    Field out(grid_);
    for (std::size_t n = 1; n < v.size(); ++n) out[n] = -2.0 * (lambda_[n - 1] - 1.0) * v[n];
    return out;
  }

 private:
  Grid1D grid_;
  std::vector<double> lambda_;
};

class HeightEnergy final : public EnergyModel {
 public:
  explicit HeightEnergy(std::size_t dim) : grid_(Grid1D::coordinates(dim)) {}

  std::string name() const override { return "sphere"; }
  const Grid1D& grid() const override { return grid_; }
  double energy(const Field& x) const override { return -x[x.size() - 1]; }

  Field h_gradient(const Field&) const override {
    Field g(grid_);
    g[grid_.n() - 1] = -1.0;
    return g;
  }

  Field hessian_apply(const Field&, const Field&) const override { return Field(grid_); }
  double stiffness(const Field&) const override { return 1.0; }

 private:
  Grid1D grid_;
};

class SphereConstraint final : public ConstraintModel {
 public:
  SphereConstraint(std::size_t dim, double radius) : grid_(Grid1D::coordinates(dim)), radius_(radius) {
    require(radius > 0.0, "sphere radius must be positive");
  }

  std::string name() const override { return "sphere"; }
  const Grid1D& grid() const override { return grid_; }
  std::size_t m() const override { return 1; }
  double scale() const override { return radius_ * radius_; }

  std::vector<double> value(const Field& x) const override {
    return {dot(x.view(), x.view()) - radius_ * radius_};
  }

  std::vector<Field> h_gradients(const Field& x) const override { return {2.0 * x}; }

  Field hessian_apply(const Field&, std::size_t k, const Field& v) const override {
    require(k == 0, "sphere constraint has a single component");
    return 2.0 * v;
  }

 private:
  Grid1D grid_;
  double radius_;
};

}  // namespace

EnergyPtr diagonal_quadratic_model(std::vector<double> weights) {
  require(!weights.empty(), "diagonal quadratic needs at least one weight");
  return std::make_shared<DiagonalQuadratic>(std::move(weights));
}

EnergyPtr seq_quad_model(const SeqQuadModel& model) {
  for (double l : model.lambda) require(l > 0.0, "sequence weights must be strictly positive");
  return diagonal_quadratic_model(model.lambda);
}

EnergyPtr monomial_model(int p) { return std::make_shared<Monomial>(p); }

std::pair<EnergyPtr, ConstraintPtr> constraint_hessian_example_model(std::size_t N,
                                                                     std::vector<double> lambda) {
  require(N >= 1, "example needs N >= 1");
  require(lambda.size() == N, "example needs N weights");
  return {std::make_shared<GraphExampleEnergy>(N),
          std::make_shared<GraphExampleConstraint>(std::move(lambda))};
}

std::pair<EnergyPtr, ConstraintPtr> sphere_toy_model(std::size_t dim, double radius) {
  require(dim >= 2, "sphere toy needs dim >= 2");
  return {std::make_shared<HeightEnergy>(dim), std::make_shared<SphereConstraint>(dim, radius)};
}

}  // namespace lojalab
