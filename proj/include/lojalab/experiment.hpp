#pragma once

// JSON experiment configuration and the commands of the loja_lab runner.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lojalab/loja_analysis.hpp"

namespace lojalab {

struct GridSpec {
  double a = 0.0;
  double b = 1.0;
  std::size_t n = 99;
};

struct ConstraintSpec {
  std::string kind = "none";  // none | mass | volume | integral
  std::string g = "identity";
  double target = 0.0;
  std::optional<double> nu;
};

struct ModelParams {
  std::size_t N = 0;
  std::string lambda_rule = "geometric";
  int p = 2;
  std::size_t dim = 3;
  double radius = 1.0;
  std::vector<std::size_t> Ns;
};

struct InitialSpec {
  std::string kind = "zero";  // zero | sine | constant | point
  double amplitude = 0.0;
  int mode = 1;
  double value = 0.0;
  std::vector<double> values;
};

struct AnalysisSpec {
  double radius = 1e-2;
  std::size_t count = 64;
  std::optional<std::uint64_t> seed;
  std::vector<double> theta_grid{0.5};
  double kernel_rel = 1e-6;
};

struct OutputSpec {
  std::string dir;
  bool emit_svg = false;
};

struct ExperimentConfig {
  std::string model;
  std::optional<GridSpec> grid;
  std::optional<ConstraintSpec> constraint;
  ModelParams params;
  std::optional<InitialSpec> initial;
  FlowOptions flow;
  AnalysisSpec analysis;
  OutputSpec output;
  std::string canonical;  // sorted-key dump of the parsed document
};

/// Parses and validates a config document. Unknown fields, wrong types and
/// invalid values throw config_error naming the field.
ExperimentConfig parse_config(const std::string& text);

struct Problem {
  EnergyPtr E;
  ConstraintPtr G;
  Field reference{Grid1D::coordinates(1)};  // the critical point analyses start from
  std::optional<Field> initial;
};

/// Instantiates the configured model and constraint; config_error on an
/// unsupported combination.
Problem build_problem(const ExperimentConfig& cfg);

enum ExitCode : int { exit_ok = 0, exit_t_max = 2, exit_failure = 3, exit_config = 64 };

struct RunContext {
  std::filesystem::path out_dir;
  int threads = 1;
  std::ostream* log = nullptr;
};

int cmd_flow(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_loja_fit(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_counterexample(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_chart_check(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_grad_check(const ExperimentConfig& cfg, const RunContext& ctx);

/// Entry point shared by the executable and the tests.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

std::string sha256_hex(const std::string& data);

}  // namespace lojalab
