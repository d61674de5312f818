#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lojalab/grad_check.hpp"

namespace lojalab {

namespace {

Field random_state(std::mt19937_64& rng, const Grid1D& g, double amp) {
  std::normal_distribution<double> nd;
  if (g.is_coordinate_space()) {
    Field u(g);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = amp * nd(rng);
    return u;
  }
  // a few sine modes with decaying weights keeps u smooth and |u| small
  double c[4];
  for (int k = 0; k < 4; ++k) c[k] = amp * nd(rng) / (2.0 * (k + 1));
  const double a = g.a();
  const double len = g.b() - g.a();
  return Field::sample(g, [&](double x) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += c[k] * std::sin((k + 1) * std::numbers::pi * (x - a) / len);
    return s;
  });
}

Field random_direction(std::mt19937_64& rng, const Grid1D& g) {
  std::normal_distribution<double> nd;
  Field v(g);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = nd(rng);
  return v;
}

Field shifted(const Field& u, double s, const Field& v) {
  Field out = u;
  out.axpy(s, v);
  return out;
}

}  // namespace

GradCheckReport gradient_check(const EnergyModel& E, const ConstraintModel& G, const GradCheckOptions& opts) {
  require(opts.pairs >= 1, "gradient_check: need at least one pair");
  require(E.grid() == G.grid(), "gradient_check: energy and constraint on different grids");
  const Grid1D& grid = E.grid();
  const double eps = 1e-5 * std::min(1.0, grid.h());
  std::mt19937_64 rng(opts.seed);
  GradCheckReport rep;
  rep.pairs = opts.pairs;
  for (std::size_t p = 0; p < opts.pairs; ++p) {
    Field u = random_state(rng, grid, opts.state_amplitude);
    for (int tries = 0; !E.admissible(u) && tries < 100; ++tries) u = random_state(rng, grid, opts.state_amplitude);
    require(E.admissible(u), "gradient_check: could not draw an admissible state");
    const Field v = random_direction(rng, grid);
    const Field w = random_direction(rng, grid);
    const Field up = shifted(u, eps, v);
    const Field um = shifted(u, -eps, v);

    const double e = E.energy(u);
    const double fd = (E.energy(up) - E.energy(um)) / (2.0 * eps);
    const double an = inner(E.h_gradient(u), v);
    rep.max_grad_error = std::max(rep.max_grad_error, std::abs(an - fd) / (1.0 + std::abs(e) + std::abs(fd)));

    const Field hv = E.hessian_apply(u, v);
    const double a = inner(hv, w);
    const double b = inner(v, E.hessian_apply(u, w));
    rep.max_symmetry_error =
        std::max(rep.max_symmetry_error, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}));

    const Field fdh = (1.0 / (2.0 * eps)) * (E.h_gradient(up) - E.h_gradient(um));
    rep.max_hessian_error = std::max(rep.max_hessian_error, norm(fdh - hv) / (1.0 + norm(hv)));

    if (G.m() > 0) {
      const std::vector<double> gp = G.value(up);
      const std::vector<double> gm = G.value(um);
      const std::vector<double> g0 = G.value(u);
      const std::vector<Field> grads = G.h_gradients(u);
      for (std::size_t k = 0; k < G.m(); ++k) {
        const double cfd = (gp[k] - gm[k]) / (2.0 * eps);
        const double can = inner(grads[k], v);
        rep.max_constraint_error =
            std::max(rep.max_constraint_error, std::abs(can - cfd) / (1.0 + std::abs(g0[k]) + std::abs(cfd)));
        const double ca = inner(G.hessian_apply(u, k, v), w);
        const double cb = inner(v, G.hessian_apply(u, k, w));
        const double den = std::max({std::abs(ca), std::abs(cb), 1e-300});
        // a vanishing constraint Hessian is trivially symmetric
        if (ca != cb) rep.max_constraint_symmetry_error = std::max(rep.max_constraint_symmetry_error, std::abs(ca - cb) / den);
      }
    }
  }
  rep.grad_ok = rep.max_grad_error <= opts.grad_tol;
  rep.symmetry_ok = rep.max_symmetry_error <= opts.symmetry_tol;
  rep.hessian_ok = rep.max_hessian_error <= opts.hessian_tol;
  rep.constraint_ok = rep.max_constraint_error <= opts.grad_tol && rep.max_constraint_symmetry_error <= opts.symmetry_tol;
  return rep;
}

}  // namespace lojalab
