#include <algorithm>
#include <cmath>
#include <sstream>

#include "lojalab/constraint_geometry.hpp"

namespace lojalab {

namespace {

DenseMatrix gram(const std::vector<Field>& grads) {
  const std::size_t m = grads.size();
  DenseMatrix g(m, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = j; k < m; ++k) {
      const double v = inner(grads[j], grads[k]);
      g(j, k) = v;
      g(k, j) = v;
    }
  return g;
}

double max_abs(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

}  // namespace

MultiplierVector multiplier(const EnergyModel& E, const ConstraintModel& G, const Field& u) {
  const std::size_t m = G.m();
  if (m == 0) return {};
  const Field grad_e = E.h_gradient(u);
  const std::vector<Field> grads = G.h_gradients(u);
  const DenseMatrix gamma = gram(grads);
  const SymEig eig = sym_eigs(gamma);
  if (!(eig.values.front() > 1e-12))
    fail(ErrorKind::constraint_degeneracy,
         "constraint gradients are linearly dependent (min Gram eigenvalue " +
             std::to_string(eig.values.front()) + ")");
  std::vector<double> beta(m);
  for (std::size_t k = 0; k < m; ++k) beta[k] = inner(grads[k], grad_e);
  return {solve(gamma, beta)};
}

Field project_tangent(const EnergyModel& E, const ConstraintModel& G, const Field& u) {
  Field p = E.h_gradient(u);
  if (G.m() == 0) return p;
  const std::vector<Field> grads = G.h_gradients(u);
  const MultiplierVector lam = multiplier(E, G, u);
  for (std::size_t k = 0; k < grads.size(); ++k) p.axpy(-lam.values[k], grads[k]);
  return p;
}

double constraint_residual(const ConstraintModel& G, const Field& u) { return max_abs(G.value(u)); }

RetractResult retract_with_info(const ConstraintModel& G, const Field& u, const RetractOptions& opts) {
  require(opts.max_iter >= 1 && opts.tol > 0.0, "retract: bad options");
  RetractResult out{u, 0, 0.0};
  if (G.m() == 0) return out;
  const double tol = opts.tol * (1.0 + G.scale());
  for (;;) {
    const std::vector<double> r = G.value(out.u);
    out.residual = max_abs(r);
    if (!std::isfinite(out.residual))
      fail(ErrorKind::retraction_failure, "constraint value is not finite during retraction");
    if (out.residual <= tol) return out;
    if (out.iterations >= opts.max_iter) {
      std::ostringstream msg;
      msg << "no convergence after " << out.iterations << " Newton steps (residual " << out.residual << ")";
      fail(ErrorKind::retraction_failure, msg.str());
    }
    const std::vector<Field> grads = G.h_gradients(out.u);
    // G(u + sum c_k grad G_k) ~ G(u) + Gamma c
    std::vector<double> rhs(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) rhs[k] = -r[k];
    std::vector<double> c;
    try {
      c = solve(gram(grads), rhs);
    } catch (const Error& e) {
      fail(ErrorKind::retraction_failure, std::string("singular Gram matrix: ") + e.what());
    }
    for (std::size_t k = 0; k < grads.size(); ++k) out.u.axpy(c[k], grads[k]);
    ++out.iterations;
  }
}

Field retract(const ConstraintModel& G, const Field& u, const RetractOptions& opts) {
  return retract_with_info(G, u, opts).u;
}

}  // namespace lojalab
