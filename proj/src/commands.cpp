#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "lojalab/experiment.hpp"
#include "lojalab/grad_check.hpp"

#ifndef LOJALAB_VERSION
#define LOJALAB_VERSION "0.0.0"
#endif

namespace lojalab {

namespace {

using json = nlohmann::json;

std::ostream& log_of(const RunContext& ctx) {
  static std::ostringstream sink;
  return ctx.log ? *ctx.log : sink;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::contract_violation, "cannot write " + path.string());
  os << content;
}

std::string jsonl(const std::vector<json>& records) {
  std::string out;
  for (const json& r : records) out += r.dump() + "\n";
  return out;
}

json to_json(const LojaFit& f) {
  return json{{"theta", f.theta},         {"C", f.C},         {"slope", f.slope},
              {"intercept", f.intercept}, {"r2", f.r2},       {"n_samples", f.n_samples},
              {"emin", f.emin},           {"emax", f.emax},   {"in_range_flag", f.in_range_flag}};
}

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Two stacked polylines: energy and log10 pgrad_norm against t.
std::string trace_svg(const FlowTrace& trace) {
  const double W = 640.0, H = 200.0, pad = 30.0;
  std::vector<double> t, e, g;
  for (const FlowRecord& r : trace.rows) {
    t.push_back(r.t);
    e.push_back(r.energy);
    g.push_back(std::log10(std::max(r.pgrad_norm, 1e-300)));
  }
  auto panel = [&](const std::vector<double>& y, double y0, const char* label, const char* colour) {
    std::ostringstream os;
    os << std::setprecision(6);
    const double tmax = t.empty() || t.back() <= 0.0 ? 1.0 : t.back();
    double lo = y.empty() ? 0.0 : *std::min_element(y.begin(), y.end());
    double hi = y.empty() ? 1.0 : *std::max_element(y.begin(), y.end());
    if (hi - lo < 1e-300) hi = lo + 1.0;
    os << "<text x=\"" << pad << "\" y=\"" << y0 + 15 << "\" font-size=\"12\">" << label << "</text>\n";
    os << "<rect x=\"" << pad << "\" y=\"" << y0 + pad << "\" width=\"" << W - 2 * pad << "\" height=\""
       << H - 2 * pad << "\" fill=\"none\" stroke=\"#888\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" points=\"";
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double px = pad + (W - 2 * pad) * t[i] / tmax;
      const double py = y0 + H - pad - (H - 2 * pad) * (y[i] - lo) / (hi - lo);
      os << px << "," << py << " ";
    }
    os << "\"/>\n";
    return os.str();
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << 2 * H << "\">\n";
  svg << panel(e, 0.0, "energy vs t", "#1f77b4");
  svg << panel(g, H, "log10 pgrad_norm vs t", "#d62728");
  svg << "</svg>\n";
  return svg.str();
}

std::uint64_t seed_of(const ExperimentConfig& cfg) {
  if (!cfg.analysis.seed) fail(ErrorKind::config_error, "field 'analysis.seed': required by this command");
  return *cfg.analysis.seed;
}

// Reference point moved onto the constraint set.
Field on_manifold(const Problem& pb) {
  if (constraint_residual(*pb.G, pb.reference) <= 1e-13 * (1.0 + pb.G->scale())) return pb.reference;
  return retract(*pb.G, pb.reference);
}

Field critical_point(const ExperimentConfig& cfg, const Problem& pb) {
  CriticalOptions opts;
  opts.flow = cfg.flow;
  const Field start = pb.initial ? *pb.initial : on_manifold(pb);
  return find_critical(*pb.E, *pb.G, start, opts);
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::numerical_failure, "sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

int cmd_flow(const ExperimentConfig& cfg, const RunContext& ctx) {
  const Problem pb = build_problem(cfg);
  if (!pb.initial) fail(ErrorKind::config_error, "field 'initial': required by flow");
  const FlowTrace trace = run_flow(*pb.E, *pb.G, *pb.initial, cfg.flow);
  std::ostringstream csv;
  trace.write_csv(csv);
  write_file(ctx.out_dir / "trace.csv", csv.str());
  if (cfg.output.emit_svg) write_file(ctx.out_dir / "trace.svg", trace_svg(trace));
  std::ostream& log = log_of(ctx);
  log << "flow: " << to_string(trace.status) << " after " << trace.steps << " steps";
  if (!trace.rows.empty()) log << ", pgrad_norm " << trace.rows.back().pgrad_norm;
  if (!trace.failure_reason.empty()) log << " (" << trace.failure_reason << ")";
  log << "\n";
  switch (trace.status) {
    case FlowStatus::converged: return exit_ok;
    case FlowStatus::t_max_reached: return exit_t_max;
    default: return exit_failure;
  }
}

int cmd_loja_fit(const ExperimentConfig& cfg, const RunContext& ctx) {
  const std::uint64_t seed = seed_of(cfg);
  const Problem pb = build_problem(cfg);
  const Field u_bar = critical_point(cfg, pb);
  SampleStats stats;
  const std::vector<Field> samples =
      sample_near(*pb.E, *pb.G, u_bar, cfg.analysis.radius, cfg.analysis.count, seed, &stats);

  std::vector<json> records;
  records.push_back(json{{"record", "critical"},
                         {"energy", pb.E->energy(u_bar)},
                         {"pgrad_norm", norm(project_tangent(*pb.E, *pb.G, u_bar))},
                         {"samples_requested", stats.requested},
                         {"samples_accepted", stats.accepted},
                         {"samples_skipped", stats.skipped}});
  const LojaFit refined = fit_exponent(*pb.E, *pb.G, u_bar, samples, true);
  json r = to_json(refined);
  r["record"] = "fit_refined";
  records.push_back(r);
  try {
    json p = to_json(fit_exponent(*pb.E, *pb.G, u_bar, samples, false));
    p["record"] = "fit_plain";
    records.push_back(p);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ill_conditioned_fit) throw;
    records.push_back(json{{"record", "fit_plain"}, {"error", e.what()}});
  }
  for (double theta : cfg.analysis.theta_grid) {
    json c{{"record", "constant"}, {"theta", theta}, {"C", constant_at(*pb.E, *pb.G, u_bar, samples, theta, true)}};
    if (cfg.model == "seq_quad" || cfg.model == "constraint_hessian_example") {
      const SeqQuadModel m = SeqQuadModel::with_rule(cfg.params.N, lambda_rule_from_string(cfg.params.lambda_rule));
      c["C_best"] = cfg.model == "seq_quad" ? best_constant(m, theta, cfg.analysis.radius)
                                            : best_constant_chart(m, theta, cfg.analysis.radius);
    }
    records.push_back(c);
  }
  write_file(ctx.out_dir / "fit.jsonl", jsonl(records));
  log_of(ctx) << "loja-fit: theta " << refined.theta << ", C " << refined.C << ", in range "
              << (refined.in_range_flag ? "yes" : "no") << "\n";
  return exit_ok;
}

int cmd_counterexample(const ExperimentConfig& cfg, const RunContext& ctx) {
  BlowupRoute route;
  if (cfg.model == "seq_quad") route = BlowupRoute::direct;
  else if (cfg.model == "constraint_hessian_example") route = BlowupRoute::chart;
  else fail(ErrorKind::config_error, "field 'model': counterexample needs seq_quad or constraint_hessian_example");
  if (cfg.params.Ns.empty()) fail(ErrorKind::config_error, "field 'model_params.Ns': required and non-empty");
  if (cfg.analysis.theta_grid.size() != 1)
    fail(ErrorKind::config_error, "field 'analysis.theta_grid': counterexample takes a single theta");
  const std::vector<BlowupRow> rows =
      blowup_sweep(cfg.params.Ns, lambda_rule_from_string(cfg.params.lambda_rule), cfg.analysis.theta_grid.front(),
                   cfg.analysis.radius, route, ctx.threads);
  std::string csv = "N,C,ratio\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    csv += std::to_string(rows[i].N) + "," + fmt17(rows[i].C) + "," + (i == 0 ? "" : fmt17(rows[i].ratio)) + "\n";
  write_file(ctx.out_dir / "sweep.csv", csv);
  log_of(ctx) << "counterexample: " << rows.size() << " rows, C_max " << rows.back().C << "\n";
  return exit_ok;
}

int cmd_chart_check(const ExperimentConfig& cfg, const RunContext& ctx) {
  const std::uint64_t seed = seed_of(cfg);
  const Problem pb = build_problem(cfg);
  std::vector<json> records;
  try {
    const Field base = on_manifold(pb);
    const ChartData base_chart = build_chart(*pb.G, base);
    (void)base_chart;
    const Field u_bar = critical_point(cfg, pb);
    const ChartData chart = build_chart(*pb.G, u_bar);
    const std::vector<Field> samples =
        sample_near(*pb.E, *pb.G, u_bar, cfg.analysis.radius, cfg.analysis.count, seed);

    double max_angle = 0.0, max_psi_fd = 0.0, min_lower = INFINITY;
    const std::size_t checked = std::min<std::size_t>(5, samples.size());
    for (std::size_t s = 0; s < checked; ++s) {
      const std::vector<double> omega = chart.coordinates(samples[s]);
      const TangentAngles a = tangent_identity_check(chart, *pb.G, omega);
      max_angle = std::max({max_angle, a.angle1, a.angle2});

      const DenseMatrix pp = psi_prime(chart, *pb.G, omega);
      const double step = chart_fd_step(chart, omega);
      for (std::size_t j = 0; j < chart.dim0(); ++j) {
        std::vector<double> op = omega, om = omega;
        op[j] += step;
        om[j] -= step;
        const std::vector<double> p = psi(chart, *pb.G, op);
        const std::vector<double> m = psi(chart, *pb.G, om);
        for (std::size_t k = 0; k < chart.m(); ++k) {
          const double fd = (p[k] - m[k]) / (2.0 * step);
          max_psi_fd = std::max(max_psi_fd, std::abs(fd - pp(k, j)) / (1.0 + std::abs(pp(k, j))));
        }
      }
      // |(id + psi')y|^2 = |y|^2 + |psi' y|^2 in orthonormal coordinates
      DenseMatrix gram = pp.transpose() * pp;
      for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) += 1.0;
      if (gram.rows() > 0) min_lower = std::min(min_lower, std::sqrt(sym_eigs(gram).values.front()));
    }
    if (!std::isfinite(min_lower)) min_lower = 1.0;
    records.push_back(json{{"check", "tangent_identity"}, {"samples", checked}, {"max_angle", max_angle},
                           {"pass", max_angle <= 1e-6}});
    records.push_back(json{{"check", "psi_prime_fd"}, {"samples", checked}, {"max_rel_error", max_psi_fd},
                           {"pass", max_psi_fd <= 1e-6}});
    records.push_back(json{{"check", "phi_prime_lower_bound"}, {"samples", checked}, {"min_ratio", min_lower},
                           {"pass", min_lower >= 0.5}});

    const ComparisonReport cmp = derivative_comparison(chart, *pb.E, *pb.G, samples);
    records.push_back(json{{"check", "derivative_comparison"},
                           {"samples", cmp.samples.size()},
                           {"sup_phi_prime", cmp.sup_phi_prime},
                           {"upper_violations", cmp.upper_violations.size()},
                           {"lower_violations", cmp.lower_violations.size()},
                           {"pass", cmp.ok()}});

    const HessianReport hr = hessian_report(chart, *pb.E, *pb.G, cfg.analysis.kernel_rel);
    records.push_back(json{{"check", "hessian"},
                           {"eigenvalues", hr.eigenvalues},
                           {"kernel_dim", hr.kernel_dim},
                           {"index_zero_analog", hr.index_zero_analog},
                           {"asymmetry", hr.asymmetry},
                           {"spectral_radius", hr.spectral_radius},
                           {"pass", true}});
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::surjectivity_failure || e.kind() == ErrorKind::chart_degeneracy ||
        e.kind() == ErrorKind::constraint_degeneracy) {
      log_of(ctx) << "chart-check: surjectivity hypothesis on the constraint derivative fails: " << e.what() << "\n";
      records.push_back(json{{"check", "surjectivity"}, {"pass", false}, {"error", e.what()}});
      write_file(ctx.out_dir / "checks.jsonl", jsonl(records));
      return exit_failure;
    }
    throw;
  }
  write_file(ctx.out_dir / "checks.jsonl", jsonl(records));
  const bool all = std::all_of(records.begin(), records.end(), [](const json& r) { return r.at("pass").get<bool>(); });
  log_of(ctx) << "chart-check: " << (all ? "all checks pass" : "some checks fail") << "\n";
  return all ? exit_ok : exit_failure;
}

int cmd_grad_check(const ExperimentConfig& cfg, const RunContext& ctx) {
  GradCheckOptions opts;
  opts.seed = seed_of(cfg);
  opts.pairs = cfg.analysis.count;
  const Problem pb = build_problem(cfg);
  const GradCheckReport rep = gradient_check(*pb.E, *pb.G, opts);
  const json r{{"check", "gradients"},
               {"model", pb.E->name()},
               {"constraint", pb.G->name()},
               {"pairs", rep.pairs},
               {"max_grad_error", rep.max_grad_error},
               {"max_symmetry_error", rep.max_symmetry_error},
               {"max_hessian_error", rep.max_hessian_error},
               {"max_constraint_error", rep.max_constraint_error},
               {"max_constraint_symmetry_error", rep.max_constraint_symmetry_error},
               {"pass", rep.ok()}};
  write_file(ctx.out_dir / "checks.jsonl", jsonl({r}));
  log_of(ctx) << "grad-check: " << (rep.ok() ? "pass" : "fail") << ", max gradient error " << rep.max_grad_error
              << "\n";
  return rep.ok() ? exit_ok : exit_failure;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"loja_lab: constrained gradient flows and Lojasiewicz exponent experiments", "loja_lab"};
  app.set_version_flag("--version", std::string(LOJALAB_VERSION));
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const ExperimentConfig&, const RunContext&);
  };
  const Sub subs[] = {
      {"flow", "Run the projected gradient flow and write trace.csv", cmd_flow},
      {"loja-fit", "Fit the gradient-inequality exponent near a critical point", cmd_loja_fit},
      {"counterexample", "Sweep the best constants of the truncated sequence examples", cmd_counterexample},
      {"chart-check", "Audit the constraint chart near the reference point", cmd_chart_check},
      {"grad-check", "Finite-difference audit of gradients and Hessians", cmd_grad_check},
  };
  std::string config_path, out_dir;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }
  const Sub* chosen = nullptr;
  for (const Sub& s : subs)
    if (app.got_subcommand(s.name)) chosen = &s;

  const auto t0 = std::chrono::steady_clock::now();
  std::string text;
  ExperimentConfig cfg;
  RunContext ctx;
  ctx.log = &err;
  try {
    std::ifstream is(config_path, std::ios::binary);
    if (!is) fail(ErrorKind::config_error, "cannot read config file " + config_path);
    std::ostringstream ss;
    ss << is.rdbuf();
    text = ss.str();
    cfg = parse_config(text);
    const std::string dir = out_dir.empty() ? cfg.output.dir : out_dir;
    if (dir.empty()) fail(ErrorKind::config_error, "field 'output.dir': required unless --out is given");
    ctx.out_dir = dir;
    if (const char* env = std::getenv("LOJA_LAB_THREADS")) {
      char* end = nullptr;
      const long n = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || n < 1 || n > 1024)
        fail(ErrorKind::config_error, "LOJA_LAB_THREADS must be an integer in [1, 1024]");
      ctx.threads = static_cast<int>(n);
    }
    std::filesystem::create_directories(ctx.out_dir);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  }

  int code = exit_failure;
  std::string message;
  try {
    code = chosen->fn(cfg, ctx);
  } catch (const Error& e) {
    code = e.kind() == ErrorKind::config_error ? exit_config : exit_failure;
    message = std::string(to_string(e.kind())) + ": " + e.what();
    err << chosen->name << ": " << message << "\n";
  } catch (const std::exception& e) {
    message = e.what();
    err << chosen->name << ": " << message << "\n";
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest{{"command", chosen->name},
                {"config_sha256", sha256_hex(text)},
                {"version", LOJALAB_VERSION},
                {"wall_time_s", wall},
                {"exit_code", code},
                {"threads", ctx.threads}};
  if (!message.empty()) manifest["error"] = message;
  try {
    write_file(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const Error& e) {
    err << e.what() << "\n";
  }
  return code;
}

}  // namespace lojalab
