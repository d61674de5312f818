#include <algorithm>
#include <cmath>
#include <sstream>

#include "lojalab/constraint_geometry.hpp"

namespace lojalab {

namespace {

Field column_field(const Grid1D& grid, const DenseMatrix& b, std::size_t j) {
  return Field(grid, b.column(j));
}

// a(k, j) = <grads[k], column j of b>
DenseMatrix directional(const std::vector<Field>& grads, const DenseMatrix& b, double h) {
  DenseMatrix a(grads.size(), b.cols());
  for (std::size_t k = 0; k < grads.size(); ++k) {
    const std::vector<double> r = transpose_times(b, grads[k].view());
    for (std::size_t j = 0; j < b.cols(); ++j) a(k, j) = h * r[j];
  }
  return a;
}

double min_singular(const DenseMatrix& a) {
  if (a.rows() == 0) return 0.0;
  const Svd s = svd_small(a);
  return s.s.back();
}

double max_abs(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

void check_omega(const ChartData& chart, std::span<const double> omega) {
  require(omega.size() == chart.dim0(), "chart coordinate has the wrong dimension");
}

DenseMatrix psi_prime_at(const ChartData& chart, const ConstraintModel& G, const Field& x) {
  const std::size_t m = chart.m();
  if (m == 0) return DenseMatrix(0, chart.dim0());
  const double h = x.grid().h();
  const std::vector<Field> grads = G.h_gradients(x);
  const DenseMatrix a = directional(grads, chart.V1, h);
  const double smin = min_singular(a);
  if (!(smin > 1e-10)) {
    std::ostringstream msg;
    msg << "dG/dv1 is singular at this chart point (min singular value " << smin << ")";
    fail(ErrorKind::chart_degeneracy, msg.str());
  }
  DenseMatrix c = directional(grads, chart.V0, h);
  DenseMatrix p = solve(a, c);
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j) p(i, j) = -p(i, j);
  return p;
}

// F'(omega) = V0^T W grad E + psi'^T V1^T W grad E
std::vector<double> pullback_grad_at(const ChartData& chart, const EnergyModel& E, const Field& x,
                                     const DenseMatrix& pp) {
  const double h = x.grid().h();
  const Field ge = E.h_gradient(x);
  std::vector<double> g = transpose_times(chart.V0, ge.view());
  for (double& v : g) v *= h;
  if (chart.m() > 0) {
    std::vector<double> b = transpose_times(chart.V1, ge.view());
    for (double& v : b) v *= h;
    const std::vector<double> extra = transpose_times(pp, b);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += extra[i];
  }
  return g;
}

// columns V0_j + V1 psi'(:, j), the image of the coordinate directions under phi'
DenseMatrix tangent_frame(const ChartData& chart, const DenseMatrix& pp) {
  DenseMatrix t = chart.V0;
  if (chart.m() == 0) return t;
  const DenseMatrix extra = chart.V1 * pp;
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) t(i, j) += extra(i, j);
  return t;
}

}  // namespace

Field ChartData::v0_field(std::size_t i) const { return column_field(u_bar.grid(), V0, i); }
Field ChartData::v1_field(std::size_t k) const { return column_field(u_bar.grid(), V1, k); }

Field ChartData::embed(std::span<const double> omega, std::span<const double> psi) const {
  require(omega.size() == dim0() && psi.size() == m(), "chart embed: coordinate dimension mismatch");
  Field x = u_bar;
  const std::vector<double> a = V0 * omega;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += a[i];
  if (m() > 0) {
    const std::vector<double> b = V1 * psi;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += b[i];
  }
  return x;
}

std::vector<double> ChartData::coordinates(const Field& u) const {
  require_same_grid(u, u_bar);
  const Field d = u - u_bar;
  std::vector<double> w = transpose_times(V0, d.view());
  for (double& v : w) v *= u_bar.grid().h();
  return w;
}

std::vector<double> ChartData::normal_coordinates(const Field& u) const {
  require_same_grid(u, u_bar);
  const Field d = u - u_bar;
  std::vector<double> w = transpose_times(V1, d.view());
  for (double& v : w) v *= u_bar.grid().h();
  return w;
}

ChartData build_chart(const ConstraintModel& G, const Field& u_bar, const ChartOptions& opts) {
  require(u_bar.grid() == G.grid(), "build_chart: base point on a different grid");
  require(opts.kernel_rel_tol > 0.0 && opts.newton_tol > 0.0 && opts.newton_max_iter >= 1,
          "build_chart: bad options");
  const std::size_t n = u_bar.size();
  const std::size_t m = G.m();
  const double h = u_bar.grid().h();
  const double resid = constraint_residual(G, u_bar);
  if (!(resid <= 1e-10 * (1.0 + G.scale()))) {
    std::ostringstream msg;
    msg << "chart base point is not on the constraint set (|G| = " << resid << ")";
    fail(ErrorKind::contract_violation, msg.str());
  }
  require(m < n, "build_chart: more constraints than unknowns");

  ChartData chart{u_bar, DenseMatrix(), DenseMatrix(), {}, 0.0, 0, 0.0};
  chart.newton_tol = opts.newton_tol * (1.0 + G.scale());
  chart.newton_max_iter = opts.newton_max_iter;
  const double inv_sqrt_h = 1.0 / std::sqrt(h);

  DenseMatrix q1(n, 0);
  if (m > 0) {
    const std::vector<Field> grads = G.h_gradients(u_bar);
    DenseMatrix j(m, n);
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t i = 0; i < n; ++i) j(k, i) = grads[k][i];
    const Svd s = svd_small(j);
    chart.split_singular_values = s.s;
    const double smax = s.s.front();
    const double smin = s.s.back();
    if (!(smax > 0.0) || smin < opts.kernel_rel_tol * smax) {
      std::ostringstream msg;
      msg << "G'(u_bar) is not surjective (singular values " << smax << " .. " << smin << ")";
      fail(ErrorKind::surjectivity_failure, msg.str());
    }
    q1 = s.V;
  }
  DenseMatrix q0 = orthonormal_complement(q1);
  chart.V1 = DenseMatrix(n, m);
  chart.V0 = DenseMatrix(n, n - m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) chart.V1(i, k) = q1(i, k) * inv_sqrt_h;
    for (std::size_t k = 0; k < n - m; ++k) chart.V0(i, k) = q0(i, k) * inv_sqrt_h;
  }

  double kappa = 1.0;
  if (m > 0) {
    const DenseMatrix a = directional(G.h_gradients(u_bar), chart.V1, h);
    const Svd s = svd_small(a);
    if (!(s.s.back() > 1e-10))
      fail(ErrorKind::surjectivity_failure, "dG/dv1 at the base point is numerically singular");
    kappa = s.s.front() / s.s.back();
  }
  chart.trust_radius = 10.0 * kappa * (1.0 + norm(u_bar));
  return chart;
}

std::vector<double> psi(const ChartData& chart, const ConstraintModel& G, std::span<const double> omega) {
  check_omega(chart, omega);
  const std::size_t m = chart.m();
  std::vector<double> s(m, 0.0);
  if (m == 0) return s;
  const double h = chart.u_bar.grid().h();
  bool polished = false;
  for (int it = 0; it <= chart.newton_max_iter; ++it) {
    const Field x = chart.embed(omega, s);
    const std::vector<double> r = G.value(x);
    const double res = max_abs(r);
    if (!std::isfinite(res)) fail(ErrorKind::chart_domain_exceeded, "constraint value is not finite");
    // once inside tolerance, one more Newton step brings the residual to roundoff
    if (res <= chart.newton_tol) {
      if (polished || res == 0.0) return s;
      polished = true;
    }
    const DenseMatrix a = directional(G.h_gradients(x), chart.V1, h);
    std::vector<double> rhs(m);
    for (std::size_t k = 0; k < m; ++k) rhs[k] = -r[k];
    std::vector<double> ds;
    try {
      ds = solve(a, rhs);
    } catch (const Error&) {
      fail(ErrorKind::chart_domain_exceeded, "dG/dv1 became singular during the psi solve");
    }
    for (std::size_t k = 0; k < m; ++k) s[k] += ds[k];
    if (polished) return s;
    if (norm2(s) > chart.trust_radius) {
      std::ostringstream msg;
      msg << "psi left the trust ball (|psi| = " << norm2(s) << " > " << chart.trust_radius << ")";
      fail(ErrorKind::chart_domain_exceeded, msg.str());
    }
  }
  fail(ErrorKind::chart_domain_exceeded, "psi Newton iteration did not converge");
}

Field phi(const ChartData& chart, const ConstraintModel& G, std::span<const double> omega) {
  const std::vector<double> s = psi(chart, G, omega);
  return chart.embed(omega, s);
}

DenseMatrix psi_prime(const ChartData& chart, const ConstraintModel& G, std::span<const double> omega) {
  return psi_prime_at(chart, G, phi(chart, G, omega));
}

double phi_prime_norm(const DenseMatrix& pp) {
  if (pp.rows() == 0 || pp.cols() == 0) return 1.0;
  const double s = spectral_norm(pp);
  return std::sqrt(1.0 + s * s);
}

TangentAngles tangent_identity_check(const ChartData& chart, const ConstraintModel& G,
                                     std::span<const double> omega) {
  const Field x = phi(chart, G, omega);
  const std::size_t n = x.size();
  const std::size_t m = chart.m();
  if (m == 0) return {};
  const DenseMatrix pp = psi_prime_at(chart, G, x);
  const std::vector<Field> grads = G.h_gradients(x);
  DenseMatrix j(m, n);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < n; ++i) j(k, i) = grads[k][i];
  const DenseMatrix r = svd_small(j).V;  // row space of G'(x)
  const DenseMatrix k = orthonormal_complement(r);
  const DenseMatrix q2 = orthonormalize_columns(tangent_frame(chart, pp));

  TangentAngles out;
  out.angle2 = std::asin(std::min(1.0, spectral_norm(r.transpose() * q2)));
  const DenseMatrix resid = k - q2 * (q2.transpose() * k);
  out.angle1 = std::asin(std::min(1.0, spectral_norm(resid)));
  return out;
}

double pullback_energy(const ChartData& chart, const EnergyModel& E, const ConstraintModel& G,
                       std::span<const double> omega) {
  return E.energy(phi(chart, G, omega));
}

std::vector<double> pullback_grad(const ChartData& chart, const EnergyModel& E, const ConstraintModel& G,
                                  std::span<const double> omega) {
  const Field x = phi(chart, G, omega);
  return pullback_grad_at(chart, E, x, psi_prime_at(chart, G, x));
}

double chart_fd_step(const ChartData& chart, std::span<const double> omega, double base) {
  const double h = chart.u_bar.grid().h();
  return base * (1.0 + norm2(omega)) * std::min(1.0, h * std::sqrt(h));
}

DenseMatrix pullback_hessian(const ChartData& chart, const EnergyModel& E, const ConstraintModel& G,
                             std::span<const double> omega_bar) {
  check_omega(chart, omega_bar);
  const std::size_t d = chart.dim0();
  const double delta = chart_fd_step(chart, omega_bar);
  DenseMatrix hmat(d, d);
  std::vector<double> w(omega_bar.begin(), omega_bar.end());
  for (std::size_t j = 0; j < d; ++j) {
    w[j] = omega_bar[j] + delta;
    const std::vector<double> gp = pullback_grad(chart, E, G, w);
    w[j] = omega_bar[j] - delta;
    const std::vector<double> gm = pullback_grad(chart, E, G, w);
    w[j] = omega_bar[j];
    for (std::size_t i = 0; i < d; ++i) hmat(i, j) = (gp[i] - gm[i]) / (2.0 * delta);
  }
  return hmat;
}

DenseMatrix projected_hessian(const ChartData& chart, const EnergyModel& E, const ConstraintModel& G,
                              std::span<const double> omega) {
  const std::size_t d = chart.dim0();
  const std::vector<double> zero(d, 0.0);
  if (omega.empty()) omega = zero;
  check_omega(chart, omega);
  const Field x = phi(chart, G, omega);
  const Grid1D& grid = x.grid();
  const double h = grid.h();
  const std::size_t m = chart.m();
  const DenseMatrix pp = psi_prime_at(chart, G, x);
  const DenseMatrix t = tangent_frame(chart, pp);

  std::vector<double> mu;
  if (m > 0) {
    const DenseMatrix a = directional(G.h_gradients(x), chart.V1, h);
    const Field ge = E.h_gradient(x);
    std::vector<double> b = transpose_times(chart.V1, ge.view());
    for (double& v : b) v *= h;
    mu = solve(a.transpose(), b);
  }

  DenseMatrix applied(x.size(), d);
  for (std::size_t j = 0; j < d; ++j) {
    const Field v = column_field(grid, t, j);
    Field w = E.hessian_apply(x, v);
    for (std::size_t k = 0; k < m; ++k) w.axpy(-mu[k], G.hessian_apply(x, k, v));
    applied.set_column(j, w.view());
  }
  DenseMatrix hmat = t.transpose() * applied;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      const double s = 0.5 * h * (hmat(i, j) + hmat(j, i));
      hmat(i, j) = s;
      hmat(j, i) = s;
    }
  return hmat;
}

ComparisonReport derivative_comparison(const ChartData& chart, const EnergyModel& E, const ConstraintModel& G,
                                       const std::vector<Field>& samples) {
  ComparisonReport rep;
  rep.samples.reserve(samples.size());
  for (const Field& u : samples) {
    const std::vector<double> omega = chart.coordinates(u);
    const Field x = phi(chart, G, omega);
    const DenseMatrix pp = psi_prime_at(chart, G, x);
    ComparisonSample s;
    s.pullback_grad_norm = norm2(pullback_grad_at(chart, E, x, pp));
    s.tangent_dual_norm = norm(project_tangent(E, G, u));
    s.phi_prime_norm = phi_prime_norm(pp);
    s.chart_mismatch = norm(x - u);
    rep.sup_phi_prime = std::max(rep.sup_phi_prime, s.phi_prime_norm);
    rep.samples.push_back(s);
  }
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const ComparisonSample& s = rep.samples[i];
    const double floor = 1e-13 * (1.0 + s.tangent_dual_norm + s.pullback_grad_norm);
    if (s.pullback_grad_norm > s.tangent_dual_norm * rep.sup_phi_prime * (1.0 + 1e-9) + floor)
      rep.upper_violations.push_back(i);
    if (s.tangent_dual_norm > 2.0 * s.pullback_grad_norm * (1.0 + 1e-9) + floor)
      rep.lower_violations.push_back(i);
  }
  return rep;
}

}  // namespace lojalab
