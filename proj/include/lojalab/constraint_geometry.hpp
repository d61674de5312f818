#pragma once

// Geometry of the constraint set M = {G = 0}: Lagrange multipliers, the
// orthogonal projection onto the tangent space, Newton retraction onto M, and
// the local graph chart  omega -> u_bar + omega + psi(omega)  over the kernel
// of G'(u_bar).

#include <cstddef>
#include <span>
#include <vector>

#include "lojalab/energy_models.hpp"
#include "lojalab/numerics.hpp"

namespace lojalab {

struct MultiplierVector {
  std::vector<double> values;
};

/// Solves the Gram system sum_k <grad G_j, grad G_k> lambda_k = <grad G_j, grad E>.
/// Throws constraint_degeneracy when the constraint gradients are dependent.
MultiplierVector multiplier(const EnergyModel& E, const ConstraintModel& G, const Field& u);

/// grad E - sum_k lambda_k grad G_k: the gradient with its normal part removed.
Field project_tangent(const EnergyModel& E, const ConstraintModel& G, const Field& u);

struct RetractOptions {
  double tol = 1e-12;  // relative to 1 + G.scale()
  int max_iter = 50;
};

struct RetractResult {
  Field u;
  int iterations = 0;
  double residual = 0.0;
};

/// Newton iteration with corrections confined to span{grad G_k(u)}, the
/// gradients being re-evaluated every step.
RetractResult retract_with_info(const ConstraintModel& G, const Field& u, const RetractOptions& opts = {});
Field retract(const ConstraintModel& G, const Field& u, const RetractOptions& opts = {});

double constraint_residual(const ConstraintModel& G, const Field& u);

struct ChartOptions {
  double kernel_rel_tol = 1e-10;  // singular values below this * s_max count as kernel
  double newton_tol = 1e-13;      // relative to 1 + G.scale()
  int newton_max_iter = 50;
};

/// Base point plus inner-orthonormal bases of V0 = ker G'(u_bar) and its
/// orthogonal complement V1. Bases are stored as matrix columns.
struct ChartData {
  Field u_bar;
  DenseMatrix V0;  // n x (n - m)
  DenseMatrix V1;  // n x m
  std::vector<double> split_singular_values;
  double newton_tol = 1e-13;
  int newton_max_iter = 50;
  double trust_radius = 0.0;

  std::size_t dim0() const { return V0.cols(); }
  std::size_t m() const { return V1.cols(); }
  std::size_t ambient() const { return u_bar.size(); }

  Field v0_field(std::size_t i) const;
  Field v1_field(std::size_t k) const;
  /// u_bar + sum omega_i V0_i + sum psi_k V1_k
  Field embed(std::span<const double> omega, std::span<const double> psi) const;
  /// V0-coordinates of u - u_bar.
  std::vector<double> coordinates(const Field& u) const;
  /// V1-coordinates of u - u_bar.
  std::vector<double> normal_coordinates(const Field& u) const;
};

ChartData build_chart(const ConstraintModel& G, const Field& u_bar, const ChartOptions& opts = {});

/// V1-coefficients psi(omega) with G(embed(omega, psi)) = 0, by Newton from 0.
std::vector<double> psi(const ChartData& chart, const ConstraintModel& G, std::span<const double> omega);

/// m x dim0 matrix of  -(dG/dv1)^{-1} G'(phi(omega)) restricted to V0.
DenseMatrix psi_prime(const ChartData& chart, const ConstraintModel& G, std::span<const double> omega);

Field phi(const ChartData& chart, const ConstraintModel& G, std::span<const double> omega);

/// Operator norm of phi'(omega) = id + psi'(omega), i.e. sqrt(1 + |psi'|^2).
double phi_prime_norm(const DenseMatrix& psi_prime);

struct TangentAngles {
  double angle1 = 0.0;  // how far ker G'(phi(omega)) sticks out of Im phi'(omega)
  double angle2 = 0.0;  // how far Im phi'(omega) sticks out of ker G'(phi(omega))
};

TangentAngles tangent_identity_check(const ChartData& chart, const ConstraintModel& G,
                                     std::span<const double> omega);

double pullback_energy(const ChartData& chart, const EnergyModel& E, const ConstraintModel& G,
                       std::span<const double> omega);
std::vector<double> pullback_grad(const ChartData& chart, const EnergyModel& E, const ConstraintModel& G,
                                  std::span<const double> omega);

/// Central-difference step for chart-coordinate derivatives. Grows with
/// |omega| and shrinks like h^(3/2) on fine grids so a single basis direction
/// never produces large discrete slopes.
double chart_fd_step(const ChartData& chart, std::span<const double> omega, double base = 1e-4);

/// Second derivative of the pullback energy, by central differences of
/// pullback_grad. Not symmetrized.
DenseMatrix pullback_hessian(const ChartData& chart, const EnergyModel& E, const ConstraintModel& G,
                             std::span<const double> omega_bar);

/// Second derivative of the pullback assembled from hessian_apply:
///   phi'^T (E''(phi) - sum mu_k G_k''(phi)) phi'
/// with mu solving (dG/dv1)^T mu = V1^T grad E. At a constrained critical
/// point phi' = V0 there and mu is the Lagrange multiplier. An empty omega
/// means the base point.
DenseMatrix projected_hessian(const ChartData& chart, const EnergyModel& E, const ConstraintModel& G,
                              std::span<const double> omega = {});

struct ComparisonSample {
  double pullback_grad_norm = 0.0;  // |F'(omega)|
  double tangent_dual_norm = 0.0;   // |E'(u)| restricted to T_u M
  double phi_prime_norm = 0.0;
  double chart_mismatch = 0.0;      // |phi(omega) - u|
};

struct ComparisonReport {
  std::vector<ComparisonSample> samples;
  double sup_phi_prime = 0.0;
  std::vector<std::size_t> upper_violations;  // |F'| > |E'|_T * sup|phi'|
  std::vector<std::size_t> lower_violations;  // |E'|_T > 2 |F'|

  bool ok() const { return upper_violations.empty() && lower_violations.empty(); }
};

/// Two-sided comparison between the constrained derivative norm and the
/// derivative of the pullback, evaluated on the given points of M.
ComparisonReport derivative_comparison(const ChartData& chart, const EnergyModel& E, const ConstraintModel& G,
                                 const std::vector<Field>& samples);

}  // namespace lojalab
