#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "lojalab/loja_analysis.hpp"

namespace lojalab {

namespace {

constexpr double kTiny = 1e-14;
constexpr std::uint64_t kDirectionSeed = 0x10a5eedULL;

std::vector<double> unit_gaussian(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> nd;
  std::vector<double> d(n);
  double s = 0.0;
  do {
    for (double& x : d) x = nd(rng);
    s = norm2(d);
  } while (s == 0.0);
  for (double& x : d) x /= s;
  return d;
}

double critical_tol(const EnergyModel& E, const Field& u, double tol) {
  return tol * (1.0 + norm(E.h_gradient(u)));
}

// max over directions d and amplitudes t of |F(t d)|^(1-theta) / |F'(t d)|, F(0) = 0
template <class EnergyFn, class GradFn>
double max_ratio(EnergyFn&& energy, GradFn&& grad, const std::vector<std::vector<double>>& dirs, double theta,
                 double sigma) {
  double best = 0.0;
  std::vector<double> x;
  for (const auto& d : dirs) {
    for (double t : {sigma, sigma / 10.0, sigma / 100.0}) {
      x.resize(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) x[i] = t * d[i];
      const double gap = std::abs(energy(x));
      const double g = norm2(grad(x));
      if (g > kTiny) best = std::max(best, std::pow(gap, 1.0 - theta) / g);
    }
  }
  return best;
}

}  // namespace

Field find_critical(const EnergyModel& E, const ConstraintModel& G, const Field& u0, const CriticalOptions& opts) {
  FlowOptions fo = opts.flow;
  fo.tol_pgrad = opts.flow_tol;
  const FlowTrace tr = run_flow(E, G, u0, fo);
  if (tr.status == FlowStatus::failed)
    fail(ErrorKind::search_failure, "gradient flow failed before the Newton phase (" + tr.failure_reason + ")");
  Field u = *tr.final_state;

  // chart at the flow's end point; Newton on F' with F'' assembled exactly
  const ChartData chart = build_chart(G, u);
  std::vector<double> w(chart.dim0(), 0.0);
  std::vector<double> g = pullback_grad(chart, E, G, w);
  double gnorm = norm2(g);
  for (int it = 0; it <= opts.newton_max_iter; ++it) {
    const double pg = norm(project_tangent(E, G, u));
    if (pg <= critical_tol(E, u, opts.tol)) return u;
    if (it == opts.newton_max_iter) break;
    std::vector<double> dw;
    try {
      dw = solve(projected_hessian(chart, E, G, w), g);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::contract_violation) throw;
      break;
    }
    bool improved = false;
    for (double alpha = 1.0; alpha >= 1.0 / 1024.0; alpha *= 0.5) {
      std::vector<double> trial = w;
      for (std::size_t i = 0; i < w.size(); ++i) trial[i] -= alpha * dw[i];
      try {
        const Field x = phi(chart, G, trial);
        if (!E.admissible(x)) continue;
        std::vector<double> gt = pullback_grad(chart, E, G, trial);
        if (norm2(gt) < gnorm) {
          w = std::move(trial);
          g = std::move(gt);
          gnorm = norm2(g);
          u = x;
          improved = true;
          break;
        }
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::chart_domain_exceeded && err.kind() != ErrorKind::chart_degeneracy) throw;
      }
    }
    if (!improved) break;
  }
  std::ostringstream msg;
  msg << "Newton polishing stalled with |P grad E| = " << norm(project_tangent(E, G, u)) << " (target "
      << critical_tol(E, u, opts.tol) << ")";
  fail(ErrorKind::search_failure, msg.str());
}

std::vector<Field> sample_near(const EnergyModel& E, const ConstraintModel& G, const Field& u_bar, double radius,
                               std::size_t count, std::uint64_t seed, SampleStats* stats) {
  require(radius > 0.0 && count >= 1, "sample_near: radius and count must be positive");
  const ChartData chart = build_chart(G, u_bar);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Field> out;
  out.reserve(count);
  SampleStats st{count, 0, 0};
  for (std::size_t i = 0; i < count; ++i) {
    const std::vector<double> d = unit_gaussian(rng, chart.dim0());
    const double amp = radius * std::pow(10.0, -2.0 * unif(rng));
    std::vector<double> w(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) w[j] = amp * d[j];
    const std::vector<double> zero(chart.m(), 0.0);
    try {
      Field u = retract(G, chart.embed(w, zero));
      if (!E.admissible(u) || norm(u - u_bar) > 1.01 * radius) {
        ++st.skipped;
        continue;
      }
      out.push_back(std::move(u));
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::retraction_failure) throw;
      ++st.skipped;
    }
  }
  st.accepted = out.size();
  if (stats) *stats = st;
  if (2 * out.size() < count) {
    std::ostringstream msg;
    msg << "only " << out.size() << " of " << count << " samples could be placed on the constraint set";
    fail(ErrorKind::retraction_failure, msg.str());
  }
  return out;
}

LojaFit fit_exponent_from(std::span<const double> gaps, std::span<const double> grad_norms) {
  require(gaps.size() == grad_norms.size(), "fit_exponent: length mismatch");
  std::vector<double> lx, ly, gap, gn;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double e = std::abs(gaps[i]);
    if (e > kTiny && grad_norms[i] > kTiny) {
      gap.push_back(e);
      gn.push_back(grad_norms[i]);
      lx.push_back(std::log(e));
      ly.push_back(std::log(grad_norms[i]));
    }
  }
  if (gap.size() < 8)
    fail(ErrorKind::ill_conditioned_fit, "need at least 8 samples with nonzero gap and gradient, have " +
                                             std::to_string(gap.size()));
  LojaFit f;
  f.n_samples = gap.size();
  f.emin = *std::min_element(gap.begin(), gap.end());
  f.emax = *std::max_element(gap.begin(), gap.end());
  if (f.emax < 10.0 * f.emin) {
    std::ostringstream msg;
    msg << "energy gaps span less than a decade (" << f.emin << " .. " << f.emax << ")";
    fail(ErrorKind::ill_conditioned_fit, msg.str());
  }
  const LineFit lf = linfit(lx, ly);
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.r2 = lf.r2;
  f.theta = 1.0 - lf.slope;
  for (std::size_t i = 0; i < gap.size(); ++i) f.C = std::max(f.C, std::pow(gap[i], 1.0 - f.theta) / gn[i]);
  f.in_range_flag = f.theta > 0.0 && f.theta <= 0.5 + 1e-9;
  return f;
}

namespace {

void gaps_and_grads(const EnergyModel& E, const ConstraintModel& G, const Field& u_bar,
                    const std::vector<Field>& samples, bool refined, std::vector<double>& gaps,
                    std::vector<double>& grads) {
  const double e0 = E.energy(u_bar);
  gaps.clear();
  grads.clear();
  for (const Field& u : samples) {
    gaps.push_back(E.energy(u) - e0);
    grads.push_back(refined ? norm(project_tangent(E, G, u)) : norm(E.h_gradient(u)));
  }
}

}  // namespace

LojaFit fit_exponent(const EnergyModel& E, const ConstraintModel& G, const Field& u_bar,
                     const std::vector<Field>& samples, bool refined) {
  std::vector<double> gaps, grads;
  gaps_and_grads(E, G, u_bar, samples, refined, gaps, grads);
  return fit_exponent_from(gaps, grads);
}

double constant_at(const EnergyModel& E, const ConstraintModel& G, const Field& u_bar,
                   const std::vector<Field>& samples, double theta, bool refined) {
  require(theta > 0.0 && theta <= 0.5, "constant_at: theta must lie in (0, 1/2]");
  std::vector<double> gaps, grads;
  gaps_and_grads(E, G, u_bar, samples, refined, gaps, grads);
  double c = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i)
    if (grads[i] > kTiny) c = std::max(c, std::pow(std::abs(gaps[i]), 1.0 - theta) / grads[i]);
  return c;
}

std::vector<std::vector<double>> constant_search_directions(std::size_t N, std::size_t random) {
  std::vector<std::vector<double>> dirs;
  dirs.reserve(N + random);
  for (std::size_t k = 0; k < N; ++k) {
    std::vector<double> e(N, 0.0);
    e[k] = 1.0;
    dirs.push_back(std::move(e));
  }
  std::mt19937_64 rng(kDirectionSeed + N);
  for (std::size_t i = 0; i < random; ++i) dirs.push_back(unit_gaussian(rng, N));
  return dirs;
}

double best_constant(const SeqQuadModel& model, double theta, double sigma) {
  require(theta > 0.0 && theta <= 0.5, "best_constant: theta must lie in (0, 1/2]");
  require(sigma > 0.0, "best_constant: sigma must be positive");
  return max_ratio([&](std::span<const double> x) { return seq_quad_energy(model, x); },
                   [&](std::span<const double> x) { return seq_quad_gradient(model, x); },
                   constant_search_directions(model.N), theta, sigma);
}

double best_constant_chart(const SeqQuadModel& model, double theta, double sigma) {
  require(theta > 0.0 && theta <= 0.5, "best_constant: theta must lie in (0, 1/2]");
  require(sigma > 0.0, "best_constant: sigma must be positive");
  std::vector<double> mu = model.lambda;
  for (double& m : mu) m *= 0.5;
  const auto [E, G] = constraint_hessian_example_model(model.N, mu);
  const Field origin(G->grid());
  const ChartData chart = build_chart(*G, origin);
  // express the x' search directions in chart coordinates
  std::vector<std::vector<double>> dirs;
  for (const auto& d : constant_search_directions(model.N)) {
    Field x(G->grid());
    for (std::size_t k = 0; k < d.size(); ++k) x[k + 1] = d[k];
    dirs.push_back(chart.coordinates(x));
  }
  const double e0 = E->energy(origin);
  return max_ratio([&](std::span<const double> w) { return pullback_energy(chart, *E, *G, w) - e0; },
                   [&](std::span<const double> w) { return pullback_grad(chart, *E, *G, w); }, dirs, theta,
                   sigma);
}

BlowupRoute blowup_route_from_string(const std::string& name) {
  if (name == "direct") return BlowupRoute::direct;
  if (name == "chart") return BlowupRoute::chart;
  fail(ErrorKind::config_error, "unknown sweep route '" + name + "' (direct | chart)");
}

std::string to_string(BlowupRoute r) { return r == BlowupRoute::direct ? "direct" : "chart"; }

std::vector<BlowupRow> blowup_sweep(const std::vector<std::size_t>& Ns, LambdaRule rule, double theta, double sigma,
                                    BlowupRoute route, int threads) {
  require(!Ns.empty(), "blowup_sweep: empty N list");
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    require(Ns[i] >= 1, "blowup_sweep: N must be >= 1");
    require(i == 0 || Ns[i] > Ns[i - 1], "blowup_sweep: N list must be strictly ascending");
  }
  std::vector<BlowupRow> rows(Ns.size());
  auto work = [&](std::size_t i) {
    const SeqQuadModel m = SeqQuadModel::with_rule(Ns[i], rule);
    rows[i].N = Ns[i];
    rows[i].C = route == BlowupRoute::direct ? best_constant(m, theta, sigma) : best_constant_chart(m, theta, sigma);
  };
  const std::size_t nt = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, Ns.size());
  if (nt == 1) {
    for (std::size_t i = 0; i < Ns.size(); ++i) work(i);
  } else {
    // each row is computed independently; rows land in their own slot
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(nt);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nt; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = next++; i < Ns.size(); i = next++) work(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  for (std::size_t i = 1; i < rows.size(); ++i) rows[i].ratio = rows[i].C / rows[i - 1].C;
  return rows;
}

HessianReport hessian_report(const ChartData& chart, const EnergyModel& E, const ConstraintModel& G,
                             double kernel_rel) {
  const std::vector<double> origin(chart.dim0(), 0.0);
  DenseMatrix h = pullback_hessian(chart, E, G, origin);
  HessianReport rep;
  const std::size_t d = h.rows();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) rep.asymmetry = std::max(rep.asymmetry, std::abs(h(i, j) - h(j, i)));
  if (rep.asymmetry > 1e-6 * std::max(1.0, h.max_abs())) {
    std::ostringstream msg;
    msg << "pullback Hessian is not symmetric (max asymmetry " << rep.asymmetry << ")";
    fail(ErrorKind::numerical_failure, msg.str());
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double s = 0.5 * (h(i, j) + h(j, i));
      h(i, j) = s;
      h(j, i) = s;
    }
  rep.eigenvalues = sym_eigs(h).values;
  for (double v : rep.eigenvalues) rep.spectral_radius = std::max(rep.spectral_radius, std::abs(v));
  for (double v : rep.eigenvalues)
    if (std::abs(v) < kernel_rel * rep.spectral_radius) ++rep.kernel_dim;
  return rep;
}

}  // namespace lojalab
