#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "lojalab/experiment.hpp"

namespace lojalab {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  fail(ErrorKind::config_error, "field '" + field + "': " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Rejects keys outside `allowed` and gives typed access to the rest.
class Section {
 public:
  Section(const json& j, std::string path, std::initializer_list<const char*> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_.empty() ? "<root>" : path_, "expected an object");
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        bad(join(path_, key), "unknown field");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string field(const char* key) const { return join(path_, key); }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) bad(field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad(field(key), "must be finite");
    return d;
  }

  double positive(const char* key, double fallback) const {
    const double d = number(key, fallback);
    if (!(d > 0.0)) bad(field(key), "must be positive");
    return d;
  }

  std::uint64_t uinteger(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      bad(field(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) bad(field(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) bad(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const char* key) const {
    const json& v = j_.at(key);
    if (!v.is_array()) bad(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const json& x : v) {
      if (!x.is_number()) bad(field(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<std::size_t> counts(const char* key) const {
    const json& v = j_.at(key);
    if (!v.is_array()) bad(field(key), "expected an array of positive integers");
    std::vector<std::size_t> out;
    for (const json& x : v) {
      if (!x.is_number_integer() || x.get<std::int64_t>() < 1) bad(field(key), "expected an array of positive integers");
      out.push_back(x.get<std::size_t>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

const std::vector<std::string> kModels{"revolution", "graph_area", "allen_cahn", "seq_quad",
                                       "constraint_hessian_example", "monomial", "sphere"};

bool grid_model(const std::string& m) { return m == "revolution" || m == "graph_area" || m == "allen_cahn"; }

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config_error, std::string("config is not valid JSON: ") + e.what());
  }
  const Section root(doc, "", {"model", "grid", "constraint", "model_params", "initial", "flow", "analysis", "output"});
  ExperimentConfig cfg;
  if (!root.has("model")) bad("model", "required");
  cfg.model = root.string("model", "");
  if (std::find(kModels.begin(), kModels.end(), cfg.model) == kModels.end())
    bad("model", "unknown model '" + cfg.model + "'");

  if (root.has("grid")) {
    const Section s(root.raw("grid"), "grid", {"a", "b", "n"});
    GridSpec g;
    g.a = s.number("a", g.a);
    g.b = s.number("b", g.b);
    g.n = s.uinteger("n", g.n);
    if (g.n < 3) bad("grid.n", "must be at least 3");
    if (!(g.a < g.b)) bad("grid.b", "must exceed grid.a");
    cfg.grid = g;
  }
  if (grid_model(cfg.model) && !cfg.grid) cfg.grid = GridSpec{};
  if (!grid_model(cfg.model) && cfg.grid) bad("grid", "model '" + cfg.model + "' lives on a coordinate space");

  if (root.has("constraint")) {
    const Section s(root.raw("constraint"), "constraint", {"kind", "g", "target", "nu"});
    ConstraintSpec c;
    c.kind = s.string("kind", c.kind);
    if (c.kind != "none" && c.kind != "mass" && c.kind != "volume" && c.kind != "integral")
      bad("constraint.kind", "expected none | mass | volume | integral");
    c.g = s.string("g", c.g);
    if (s.has("g") && c.kind != "integral") bad("constraint.g", "only used by integral constraints");
    c.target = s.number("target", c.target);
    if (s.has("nu")) c.nu = s.number("nu", 0.0);
    if (c.kind == "volume" && !c.nu) bad("constraint.nu", "required for volume constraints");
    if (c.kind != "volume" && c.nu) bad("constraint.nu", "only used by volume constraints");
    if (c.kind == "volume" && s.has("target")) bad("constraint.target", "volume constraints take nu");
    if (c.kind == "integral") {
      try {
        (void)ScalarFunction::named(c.g);
      } catch (const Error&) {
        bad("constraint.g", "unknown function '" + c.g + "' (identity | square | cube)");
      }
    }
    cfg.constraint = c;
  }
  if (cfg.constraint && cfg.constraint->kind != "none") {
    if (!grid_model(cfg.model)) bad("constraint", "model '" + cfg.model + "' brings its own constraint or none");
    if (cfg.constraint->kind == "volume" && cfg.model != "revolution")
      bad("constraint.kind", "volume constraints belong to the revolution model");
    if (cfg.model == "revolution" && cfg.constraint->kind != "volume")
      bad("constraint.kind", "the revolution model supports the volume constraint only");
  }

  if (root.has("model_params")) {
    const Section s(root.raw("model_params"), "model_params", {"N", "lambda_rule", "p", "dim", "radius", "Ns"});
    ModelParams& p = cfg.params;
    p.N = s.uinteger("N", 0);
    p.lambda_rule = s.string("lambda_rule", p.lambda_rule);
    try {
      (void)lambda_rule_from_string(p.lambda_rule);
    } catch (const Error&) {
      bad("model_params.lambda_rule", "expected geometric | inverse_square");
    }
    p.p = static_cast<int>(s.uinteger("p", 2));
    if (p.p < 1) bad("model_params.p", "must be >= 1");
    p.dim = s.uinteger("dim", p.dim);
    p.radius = s.positive("radius", p.radius);
    if (s.has("Ns")) {
      p.Ns = s.counts("Ns");
      if (p.Ns.empty()) bad("model_params.Ns", "must not be empty");
      for (std::size_t i = 1; i < p.Ns.size(); ++i)
        if (p.Ns[i] <= p.Ns[i - 1]) bad("model_params.Ns", "must be strictly ascending");
    }
  }
  if ((cfg.model == "seq_quad" || cfg.model == "constraint_hessian_example") && cfg.params.N == 0 &&
      cfg.params.Ns.empty())
    bad("model_params.N", "required for model '" + cfg.model + "'");
  if (cfg.model == "sphere" && cfg.params.dim < 2) bad("model_params.dim", "must be at least 2");

  if (root.has("initial")) {
    const Section s(root.raw("initial"), "initial", {"kind", "amplitude", "mode", "value", "values"});
    InitialSpec in;
    in.kind = s.string("kind", in.kind);
    if (in.kind != "zero" && in.kind != "sine" && in.kind != "constant" && in.kind != "point")
      bad("initial.kind", "expected zero | sine | constant | point");
    in.amplitude = s.number("amplitude", 0.0);
    in.mode = static_cast<int>(s.uinteger("mode", 1));
    if (in.mode < 1) bad("initial.mode", "must be >= 1");
    in.value = s.number("value", 0.0);
    if (s.has("values")) in.values = s.numbers("values");
    if (in.kind == "point" && in.values.empty()) bad("initial.values", "required for kind 'point'");
    if (in.kind == "sine" && !grid_model(cfg.model)) bad("initial.kind", "sine profiles need a grid model");
    cfg.initial = in;
  }

  if (root.has("flow")) {
    const Section s(root.raw("flow"), "flow",
                    {"dt_max", "cfl_coeff", "tol_pgrad", "t_max", "retract_every", "record_every", "max_steps"});
    FlowOptions& f = cfg.flow;
    f.dt_max = s.positive("dt_max", f.dt_max);
    f.cfl_coeff = s.positive("cfl_coeff", f.cfl_coeff);
    f.tol_pgrad = s.positive("tol_pgrad", f.tol_pgrad);
    f.t_max = s.positive("t_max", f.t_max);
    f.retract_every = static_cast<int>(s.uinteger("retract_every", 1));
    if (f.retract_every < 1) bad("flow.retract_every", "must be >= 1");
    f.record_every = static_cast<int>(s.uinteger("record_every", static_cast<std::uint64_t>(f.record_every)));
    if (f.record_every < 1) bad("flow.record_every", "must be >= 1");
    f.max_steps = s.uinteger("max_steps", f.max_steps);
    if (f.max_steps < 1) bad("flow.max_steps", "must be >= 1");
  }

  if (root.has("analysis")) {
    const Section s(root.raw("analysis"), "analysis", {"radius", "count", "seed", "theta_grid", "kernel_rel"});
    AnalysisSpec& a = cfg.analysis;
    a.radius = s.positive("radius", a.radius);
    a.count = s.uinteger("count", a.count);
    if (a.count < 1) bad("analysis.count", "must be >= 1");
    if (s.has("seed")) a.seed = s.uinteger("seed", 0);
    if (s.has("theta_grid")) {
      a.theta_grid = s.numbers("theta_grid");
      if (a.theta_grid.empty()) bad("analysis.theta_grid", "must not be empty");
      for (double t : a.theta_grid)
        if (!(t > 0.0 && t <= 0.5)) bad("analysis.theta_grid", "values must lie in (0, 0.5]");
    }
    a.kernel_rel = s.positive("kernel_rel", a.kernel_rel);
  }

  if (root.has("output")) {
    const Section s(root.raw("output"), "output", {"dir", "emit_svg"});
    cfg.output.dir = s.string("dir", "");
    cfg.output.emit_svg = s.boolean("emit_svg", false);
  }
  cfg.canonical = doc.dump();
  return cfg;
}

Problem build_problem(const ExperimentConfig& cfg) {
  Problem pb;
  const std::string& m = cfg.model;
  if (grid_model(m)) {
    const GridSpec& gs = *cfg.grid;
    const Grid1D grid(gs.a, gs.b, gs.n);
    pb.E = m == "revolution" ? revolution_model(grid) : m == "graph_area" ? graph_area_model(grid) : allen_cahn_model(grid);
    const ConstraintSpec c = cfg.constraint.value_or(ConstraintSpec{});
    if (c.kind == "mass") pb.G = mass_constraint(grid, c.target);
    else if (c.kind == "volume") pb.G = revolution_volume_constraint(grid, *c.nu);
    else if (c.kind == "integral") pb.G = integral_constraint(grid, ScalarFunction::named(c.g), c.target);
    else pb.G = no_constraint(grid);
    pb.reference = Field(grid);
  } else if (m == "seq_quad") {
    pb.E = seq_quad_model(SeqQuadModel::with_rule(std::max<std::size_t>(cfg.params.N, 1),
                                                  lambda_rule_from_string(cfg.params.lambda_rule)));
    pb.G = no_constraint(pb.E->grid());
    pb.reference = Field(pb.E->grid());
  } else if (m == "constraint_hessian_example") {
    const std::size_t N = std::max<std::size_t>(cfg.params.N, 1);
    auto [e, g] = constraint_hessian_example_model(
        N, SeqQuadModel::with_rule(N, lambda_rule_from_string(cfg.params.lambda_rule)).lambda);
    pb.E = e;
    pb.G = g;
    pb.reference = Field(pb.E->grid());
  } else if (m == "monomial") {
    pb.E = monomial_model(cfg.params.p);
    pb.G = no_constraint(pb.E->grid());
    pb.reference = Field(pb.E->grid());
  } else {
    auto [e, g] = sphere_toy_model(cfg.params.dim, cfg.params.radius);
    pb.E = e;
    pb.G = g;
    Field top(pb.E->grid());
    top[top.size() - 1] = cfg.params.radius;
    pb.reference = top;
  }

  if (cfg.initial) {
    const InitialSpec& in = *cfg.initial;
    const Grid1D& grid = pb.E->grid();
    if (in.kind == "zero") {
      pb.initial = Field(grid);
    } else if (in.kind == "constant") {
      pb.initial = Field::constant(grid, in.value);
    } else if (in.kind == "sine") {
      const double a = grid.a();
      const double len = grid.b() - grid.a();
      pb.initial = Field::sample(
          grid, [&](double x) { return in.amplitude * std::sin(in.mode * std::numbers::pi * (x - a) / len); });
    } else {
      if (in.values.size() != grid.n())
        bad("initial.values", "expected " + std::to_string(grid.n()) + " entries for this model");
      pb.initial = Field(grid, in.values);
    }
    if (!pb.E->admissible(*pb.initial)) bad("initial", "initial state lies outside the energy's domain");
  }
  return pb;
}

}  // namespace lojalab
