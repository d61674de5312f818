// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lojalab/experiment.hpp"
#include "lojalab/grad_check.hpp"

using namespace lojalab;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// -- 1 ----------------------------------------------------------------------

Outcome exact_gradients() {
  const Grid1D g(0.0, 1.0, 99);
  struct Case {
    std::string name;
    EnergyPtr E;
    ConstraintPtr G;
  };
  std::vector<Case> cases{
      {"revolution", revolution_model(g), revolution_volume_constraint(g, pi)},
      {"graph_area", graph_area_model(g), integral_constraint(g, ScalarFunction::cube(), 0.0)},
      {"allen_cahn", allen_cahn_model(g), mass_constraint(g, 0.0)},
  };
  const auto sq = seq_quad_model(SeqQuadModel::with_rule(12, LambdaRule::geometric));
  cases.push_back({"seq_quad", sq, no_constraint(sq->grid())});
  const auto [ex_e, ex_g] =
      constraint_hessian_example_model(12, SeqQuadModel::with_rule(12, LambdaRule::inverse_square).lambda);
  cases.push_back({"constraint_hessian_example", ex_e, ex_g});

  Outcome out{true, ""};
  double worst_grad = 0.0, worst_sym = 0.0;
  for (const Case& c : cases) {
    GradCheckOptions opts;
    opts.pairs = 100;
    opts.seed = 2024;
    const GradCheckReport r = gradient_check(*c.E, *c.G, opts);
    worst_grad = std::max({worst_grad, r.max_grad_error, r.max_constraint_error});
    worst_sym = std::max({worst_sym, r.max_symmetry_error, r.max_constraint_symmetry_error});
    if (!(r.grad_ok && r.symmetry_ok && r.constraint_ok)) {
      out.pass = false;
      out.detail += c.name + " failed; ";
    }
  }
  out.detail += "5 models x 100 pairs, max grad err " + fmt("%.2e", worst_grad) + ", max symmetry err " +
                fmt("%.2e", worst_sym);
  return out;
}

// -- 2 ----------------------------------------------------------------------

struct Smooth {
  double A = 0.1;
  double B = 0.05;
  double u(double x) const { return A * std::sin(pi * x) + B * std::sin(2 * pi * x); }
  double du(double x) const { return A * pi * std::cos(pi * x) + 2 * pi * B * std::cos(2 * pi * x); }
  double ddu(double x) const { return -A * pi * pi * std::sin(pi * x) - 4 * pi * pi * B * std::sin(2 * pi * x); }
};

Outcome continuum_order() {
  const Smooth s;
  struct Case {
    const char* name;
    EnergyPtr (*make)(const Grid1D&);
    std::function<double(double)> exact;
  };
  const std::vector<Case> cases{
      {"graph_area", graph_area_model,
       [&](double x) { return -s.ddu(x) / std::pow(1 + s.du(x) * s.du(x), 1.5); }},
      {"allen_cahn", allen_cahn_model,
       [&](double x) { return -s.ddu(x) + s.u(x) * s.u(x) * s.u(x) - s.u(x); }},
      {"revolution", revolution_model,
       [&](double x) {
         const double p = s.du(x);
         const double w = std::sqrt(1 + p * p);
         return 2 * pi * (w - (p * p / w + (1 + s.u(x)) * s.ddu(x) / (w * w * w)));
       }},
  };
  Outcome out{true, ""};
  for (const Case& c : cases) {
    double e[3];
    const std::size_t ns[3] = {99, 199, 399};
    for (int i = 0; i < 3; ++i) {
      const Grid1D g(0.0, 1.0, ns[i]);
      const Field grad = c.make(g)->h_gradient(Field::sample(g, [&](double x) { return s.u(x); }));
      e[i] = 0.0;
      for (std::size_t k = 0; k < grad.size(); ++k) e[i] = std::max(e[i], std::abs(grad[k] - c.exact(g.node(k))));
    }
    const double order = std::min(std::log2(e[0] / e[1]), std::log2(e[1] / e[2]));
    out.pass = out.pass && order >= 1.9;
    out.detail += std::string(c.name) + " order " + fmt("%.3f", order) + "  ";
  }
  return out;
}

// -- 3 ----------------------------------------------------------------------

Outcome constraint_preservation() {
  const Grid1D g(0.0, 1.0, 99);
  struct Case {
    const char* name;
    EnergyPtr E;
    ConstraintPtr G;
    double scale;
    double t_max;
  };
  // t_max is set so that each run takes well over 1e4 explicit steps
  const std::vector<Case> cases{{"cylinder", revolution_model(g), revolution_volume_constraint(g, pi), pi, 0.1},
                                {"allen_cahn", allen_cahn_model(g), mass_constraint(g, 0.0), 0.0, 0.5}};
  Outcome out{true, ""};
  for (const Case& c : cases) {
    FlowOptions opts;
    opts.record_every = 1;
    opts.tol_pgrad = 1e-300;
    opts.t_max = c.t_max;
    const Field u0 = Field::sample(g, [](double x) { return 1e-2 * std::sin(2 * pi * x); });
    const FlowTrace tr = run_flow(*c.E, *c.G, u0, opts);
    double worst = 0.0;
    for (const FlowRecord& r : tr.rows)
      for (double v : r.constraints) worst = std::max(worst, std::abs(v));
    const bool ok = tr.status != FlowStatus::failed && tr.steps >= 10000 && worst <= 1e-8 * (1 + c.scale);
    out.pass = out.pass && ok;
    out.detail += std::string(c.name) + ": " + std::to_string(tr.steps) + " steps, max|G| " + fmt("%.2e", worst) + "  ";
  }
  return out;
}

// -- 4 ----------------------------------------------------------------------

Outcome nondegenerate_minima() {
  const Grid1D g(0.0, 1.0, 199);
  struct Case {
    const char* name;
    EnergyPtr E;
    ConstraintPtr G;
    double sample_radius;
  };
  // the cylinder's quadratic regime is narrower: samples stay within 1e-4
  const std::vector<Case> cases{{"allen_cahn", allen_cahn_model(g), mass_constraint(g, 0.0), 1e-2},
                                {"cylinder", revolution_model(g), revolution_volume_constraint(g, pi), 1e-4}};
  Outcome out{true, ""};
  for (const Case& c : cases) {
    const Field u0 = Field::sample(g, [](double x) { return 1e-2 * std::sin(2 * pi * x); });
    FlowOptions opts;
    opts.record_every = 10;
    opts.t_max = 20.0;
    const FlowTrace tr = run_flow(*c.E, *c.G, u0, opts);
    const bool converged = tr.status == FlowStatus::converged;
    const Field u_star = find_critical(*c.E, *c.G, *tr.final_state);
    const HessianReport hr = hessian_report(build_chart(*c.G, u_star), *c.E, *c.G);
    const double mu1 = hr.eigenvalues.front();
    const DecayFit decay = fit_decay_rate(tr, c.E->energy(u_star));
    const double rel = std::abs(decay.rate - 2 * mu1) / (2 * mu1);
    const auto samples = sample_near(*c.E, *c.G, u_star, c.sample_radius, 64, 17);
    const LojaFit fit = fit_exponent(*c.E, *c.G, u_star, samples);
    const bool ok = converged && fit.theta >= 0.45 && fit.theta <= 0.55 && rel <= 0.10;
    out.pass = out.pass && ok;
    out.detail += std::string(c.name) + ": " + to_string(tr.status) + ", theta " + fmt("%.4f", fit.theta) +
                  ", decay " + fmt("%.4g", decay.rate) + " vs 2mu1 " + fmt("%.4g", 2 * mu1) + "  ";
  }
  return out;
}

// -- 5 ----------------------------------------------------------------------

Outcome degenerate_exponents() {
  Outcome out{true, ""};
  for (int p : {2, 3}) {
    const auto e = monomial_model(p);
    const auto c = no_constraint(e->grid());
    const Field origin(e->grid());
    const auto samples = sample_near(*e, *c, origin, 0.5, 64, 5);
    const LojaFit f = fit_exponent(*e, *c, origin, samples);
    const double expect = 1.0 / (2 * p);
    out.pass = out.pass && std::abs(f.theta - expect) <= 1e-3;
    out.detail += "x^" + std::to_string(2 * p) + ": theta " + fmt("%.6f", f.theta) + "  ";
  }
  return out;
}

// -- 6 ----------------------------------------------------------------------

std::vector<std::size_t> two_to_twenty() {
  std::vector<std::size_t> Ns;
  for (std::size_t n = 2; n <= 20; ++n) Ns.push_back(n);
  return Ns;
}

Outcome counterexample_blowup() {
  const auto rows = blowup_sweep(two_to_twenty(), LambdaRule::geometric, 0.5, 0.1);
  double worst_rel = 0.0, worst_ratio = 0.0;
  bool increasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double expect = std::pow(2.0, (static_cast<double>(rows[i].N) - 1) / 2.0);
    worst_rel = std::max(worst_rel, std::abs(rows[i].C - expect) / expect);
    if (i > 0 && !(rows[i].C > rows[i - 1].C)) increasing = false;
    if (i >= 2) worst_ratio = std::max(worst_ratio, std::abs(rows[i].C / rows[i - 2].C - 2.0));
  }
  return {worst_rel <= 1e-6 && increasing && worst_ratio <= 1e-6,
          "N=2..20: max rel err " + fmt("%.2e", worst_rel) + ", max |C_{N+2}/C_N - 2| " + fmt("%.2e", worst_ratio) +
              (increasing ? ", strictly increasing" : ", NOT increasing") + ", C_20 " + fmt("%.6f", rows.back().C)};
}

// -- 7 ----------------------------------------------------------------------

struct ChartAudit {
  double angle = 0.0;
  double psi_fd = 0.0;
  double lower = INFINITY;
};

void audit_chart(const ChartData& ch, const ConstraintModel& G, const std::vector<std::vector<double>>& omegas,
                 ChartAudit& a) {
  for (const auto& w : omegas) {
    const TangentAngles t = tangent_identity_check(ch, G, w);
    a.angle = std::max({a.angle, t.angle1, t.angle2});
    const DenseMatrix pp = psi_prime(ch, G, w);
    const double step = chart_fd_step(ch, w);
    for (std::size_t j = 0; j < ch.dim0(); ++j) {
      auto wp = w, wm = w;
      wp[j] += step;
      wm[j] -= step;
      const auto p = psi(ch, G, wp);
      const auto m = psi(ch, G, wm);
      for (std::size_t k = 0; k < ch.m(); ++k)
        a.psi_fd = std::max(a.psi_fd, std::abs((p[k] - m[k]) / (2 * step) - pp(k, j)) / (1 + std::abs(pp(k, j))));
    }
    // |(id + psi')y| / |y| over random y
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd;
    for (int r = 0; r < 10; ++r) {
      std::vector<double> y(ch.dim0());
      for (double& v : y) v = nd(rng);
      const std::vector<double> py = pp * std::span<const double>(y);
      const double ny = norm2(y);
      a.lower = std::min(a.lower, std::sqrt(ny * ny + norm2(py) * norm2(py)) / ny);
    }
  }
}

Outcome chart_machinery() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ud(-0.35, 0.35);

  const auto [se, sg] = sphere_toy_model(3, 1.0);
  const ChartData sph = build_chart(*sg, Field(sg->grid(), {0.0, 0.0, 1.0}));
  std::vector<std::vector<double>> sw;
  double psi_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::vector<double> w{ud(rng), ud(rng)};
    sw.push_back(w);
    const double r2 = w[0] * w[0] + w[1] * w[1];
    const double closed = sph.V1(2, 0) * (std::sqrt(1 - r2) - 1);
    psi_err = std::max(psi_err, std::abs(psi(sph, *sg, w)[0] - closed));
  }
  ChartAudit a;
  audit_chart(sph, *sg, sw, a);

  const Grid1D g(0.0, 1.0, 49);
  const auto vol = revolution_volume_constraint(g, pi);
  const ChartData vc = build_chart(*vol, Field(g));
  std::vector<std::vector<double>> vw;
  std::normal_distribution<double> nd;
  for (int t = 0; t < 5; ++t) {
    std::vector<double> w(vc.dim0());
    for (double& v : w) v = nd(rng);
    const double s = 1e-2 / norm2(w);
    for (double& v : w) v *= s;
    vw.push_back(w);
  }
  audit_chart(vc, *vol, vw, a);

  const bool ok = psi_err <= 1e-10 && a.angle <= 1e-6 && a.psi_fd <= 1e-6 && a.lower >= 0.5;
  return {ok, "sphere psi err " + fmt("%.2e", psi_err) + ", max angle " + fmt("%.2e", a.angle) + ", psi' FD err " +
                  fmt("%.2e", a.psi_fd) + ", min |phi'y|/|y| " + fmt("%.4f", a.lower)};
}

// -- 8 ----------------------------------------------------------------------

Outcome derivative_bounds() {
  const Grid1D g(0.0, 1.0, 99);
  const auto e = revolution_model(g);
  const auto c = revolution_volume_constraint(g, pi);
  const Field u0(g);
  const ChartData ch = build_chart(*c, u0);
  const auto samples = sample_near(*e, *c, u0, 1e-2, 50, 31);
  const ComparisonReport rep = derivative_comparison(ch, *e, *c, samples);
  return {rep.ok() && rep.samples.size() == 50,
          std::to_string(rep.samples.size()) + " samples, upper violations " +
              std::to_string(rep.upper_violations.size()) + ", lower violations " +
              std::to_string(rep.lower_violations.size()) + ", sup|phi'| " + fmt("%.6f", rep.sup_phi_prime)};
}

// -- 9 ----------------------------------------------------------------------

Outcome pullback_example() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(-0.5, 0.5);
  double worst = 0.0;
  for (std::size_t N : {2u, 5u, 10u, 20u}) {
    const SeqQuadModel m = SeqQuadModel::with_rule(N, LambdaRule::geometric);
    const auto [e, c] = constraint_hessian_example_model(N, m.lambda);
    const ChartData ch = build_chart(*c, Field(c->grid()));
    for (int t = 0; t < 10; ++t) {
      std::vector<double> w(N);
      for (double& v : w) v = ud(rng);
      const Field x = phi(ch, *c, w);
      double expect = 0.0;
      for (std::size_t k = 0; k < N; ++k) expect += m.lambda[k] * x[k + 1] * x[k + 1];
      worst = std::max(worst, std::abs(pullback_energy(ch, *e, *c, w) - expect));
    }
  }
  const auto Ns = two_to_twenty();
  const auto direct = blowup_sweep(Ns, LambdaRule::geometric, 0.5, 0.1);
  const auto chart = blowup_sweep(Ns, LambdaRule::geometric, 0.5, 0.1, BlowupRoute::chart);
  double worst_c = 0.0;
  for (std::size_t i = 0; i < Ns.size(); ++i)
    worst_c = std::max(worst_c, std::abs(chart[i].C - direct[i].C) / direct[i].C);
  return {worst <= 1e-10 && worst_c <= 1e-8,
          "pullback err " + fmt("%.2e", worst) + ", chart vs direct constants rel err " + fmt("%.2e", worst_c)};
}

// -- 10 ---------------------------------------------------------------------

int cli(const std::vector<std::string>& args) {
  std::vector<std::string> a{"loja_lab"};
  a.insert(a.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : a) argv.push_back(s.data());
  std::ostringstream o, e;
  return run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "lojalab_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  struct Run {
    const char* command;
    const char* config;
    const char* output;
  };
  const std::vector<Run> runs{
      {"flow",
       R"({"model":"allen_cahn","grid":{"n":99},"constraint":{"kind":"mass"},
           "initial":{"kind":"sine","amplitude":0.01,"mode":2}})",
       "trace.csv"},
      {"loja-fit",
       R"({"model":"allen_cahn","grid":{"n":99},"constraint":{"kind":"mass"},
           "analysis":{"seed":5,"radius":0.01,"count":64}})",
       "fit.jsonl"},
      {"counterexample",
       R"({"model":"constraint_hessian_example","model_params":{"Ns":[2,4,8,16]},"analysis":{"theta_grid":[0.5]}})",
       "sweep.csv"},
      {"chart-check",
       R"({"model":"revolution","grid":{"n":49},"constraint":{"kind":"volume","nu":3.141592653589793},
           "analysis":{"seed":8,"radius":1e-3,"count":20}})",
       "checks.jsonl"},
      {"grad-check", R"({"model":"graph_area","analysis":{"seed":4,"count":20}})", "checks.jsonl"},
  };
  int identical = 0;
  std::string bad;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path cfg = root / ("c" + std::to_string(i) + ".json");
    std::ofstream(cfg) << runs[i].config;
    std::string first;
    bool same = true;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / ("o" + std::to_string(i) + "_" + std::to_string(rep));
      const int code = cli({runs[i].command, "--config", cfg.string(), "--out", out.string()});
      const std::string text = slurp(out / runs[i].output);
      if (code != exit_ok || text.empty()) same = false;
      if (rep == 0) first = text;
      else same = same && text == first;
    }
    if (same) ++identical;
    else bad += std::string(runs[i].command) + " ";
  }
  fs::remove_all(root);
  return {identical == static_cast<int>(runs.size()),
          std::to_string(identical) + "/" + std::to_string(runs.size()) + " commands byte-identical" +
              (bad.empty() ? "" : " (differs: " + bad + ")")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "exact gradients and Hessian symmetry", 10, exact_gradients},
      {2, "continuum consistency order >= 1.9", 30, continuum_order},
      {3, "constraint preservation over 1e4+ steps", 120, constraint_preservation},
      {4, "convergence and exponent at nondegenerate minima", 120, nondegenerate_minima},
      {5, "degenerate exponent recovery", 1, degenerate_exponents},
      {6, "counterexample blow-up C_N = 2^((N-1)/2)", 5, counterexample_blowup},
      {7, "chart machinery", 10, chart_machinery},
      {8, "two-sided derivative bounds near the cylinder", 30, derivative_bounds},
      {9, "pullback of the R x R^N example", 5, pullback_example},
      {10, "determinism of CLI outputs", 60, determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] %2d %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
