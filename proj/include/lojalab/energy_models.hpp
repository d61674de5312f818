#pragma once

// Discrete energies and constraints. Every gradient is the exact gradient of
// the discrete functional with respect to the grid inner product, so finite
// differences of `energy` reproduce `h_gradient` to truncation error.

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lojalab/numerics.hpp"

namespace lojalab {

class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual std::string name() const = 0;
  virtual const Grid1D& grid() const = 0;
  virtual double energy(const Field& u) const = 0;
  virtual Field h_gradient(const Field& u) const = 0;
  /// Second derivative applied to v, as an inner-product representative.
  virtual Field hessian_apply(const Field& u, const Field& v) const = 0;
  /// Membership in the open set the energy is defined on.
  virtual bool admissible(const Field& /*u*/) const { return true; }
  /// Coefficient of the highest-order term; the flow's time step is
  /// cfl * h^2 / stiffness.
  virtual double stiffness(const Field& u) const = 0;
};

class ConstraintModel {
 public:
  virtual ~ConstraintModel() = default;

  virtual std::string name() const = 0;
  virtual const Grid1D& grid() const = 0;
  /// Number of scalar constraints.
  virtual std::size_t m() const = 0;
  virtual std::vector<double> value(const Field& u) const = 0;
  virtual std::vector<Field> h_gradients(const Field& u) const = 0;
  /// Derivative of the k-th gradient applied to v.
  virtual Field hessian_apply(const Field& u, std::size_t k, const Field& v) const = 0;
  /// Magnitude of the prescribed value; residual tolerances scale with 1 + scale().
  virtual double scale() const = 0;
};

using EnergyPtr = std::shared_ptr<const EnergyModel>;
using ConstraintPtr = std::shared_ptr<const ConstraintModel>;

/// Scalar function with its first two derivatives.
struct ScalarFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;

  static ScalarFunction identity();
  static ScalarFunction square();
  static ScalarFunction cube();
  /// Looks up identity | square | cube; throws config_error otherwise.
  static ScalarFunction named(const std::string& name);
};

// -- grid energies ---------------------------------------------------------

/// 2*pi * int (1+u) sqrt(1+u'^2): area of the surface swept by 1+u.
EnergyPtr revolution_model(const Grid1D& grid);
/// int sqrt(1+u'^2): length of the graph.
EnergyPtr graph_area_model(const Grid1D& grid);
/// int (u'^2/2 + (1-u^2)^2/4): Ginzburg-Landau energy with unit interface width.
EnergyPtr allen_cahn_model(const Grid1D& grid);

/// int g(u) dx - target, integrated by the trapezoid rule over all grid nodes.
ConstraintPtr integral_constraint(const Grid1D& grid, ScalarFunction g, double target);
ConstraintPtr mass_constraint(const Grid1D& grid, double target);
/// pi * int (1+u)^2 dx - nu: enclosed volume of the surface of revolution.
ConstraintPtr revolution_volume_constraint(const Grid1D& grid, double nu);
/// m = 0: the unconstrained problem.
ConstraintPtr no_constraint(const Grid1D& grid);

/// Multiplier of the volume-constrained revolution problem written through
/// integration by parts: E/nu - (pi/nu) [u'/sqrt(1+u'^2)]_a^b
/// - (pi/nu) int (1+u)/sqrt(1+u'^2). Valid on the constraint set only;
/// evaluated with the same edge quadrature as the energy.
double revolution_multiplier_closed_form(const Field& u, double nu);

// -- sequence-space examples (Euclidean coordinates) -----------------------

enum class LambdaRule { geometric, inverse_square };

LambdaRule lambda_rule_from_string(const std::string& name);
std::string to_string(LambdaRule rule);

/// Truncated weights lambda_k, k = 1..N.
struct SeqQuadModel {
  std::size_t N = 0;
  std::vector<double> lambda;

  static SeqQuadModel with_rule(std::size_t N, LambdaRule rule);
};

/// E(x) = 1/2 sum lambda_k x_k^2.
double seq_quad_energy(const SeqQuadModel& model, std::span<const double> x);
std::vector<double> seq_quad_gradient(const SeqQuadModel& model, std::span<const double> x);

/// EnergyModel view of the diagonal quadratic on R^N. Zero weights are
/// allowed here (they produce an explicit Hessian kernel).
EnergyPtr diagonal_quadratic_model(std::vector<double> weights);
EnergyPtr seq_quad_model(const SeqQuadModel& model);

/// E(x) = x^(2p) on R.
EnergyPtr monomial_model(int p);

/// On R x R^N: E(x) = x_0 + sum |x'_n|^2 and G(x) = x_0 - sum (lambda_n - 1)|x'_n|^2.
/// Coordinate 0 is x_0.
std::pair<EnergyPtr, ConstraintPtr> constraint_hessian_example_model(std::size_t N,
                                                                     std::vector<double> lambda);

/// Height function E(x) = -x_last on R^dim together with G(x) = |x|^2 - radius^2.
std::pair<EnergyPtr, ConstraintPtr> sphere_toy_model(std::size_t dim, double radius = 1.0);

}  // namespace lojalab
