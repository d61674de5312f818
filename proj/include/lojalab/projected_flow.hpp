#pragma once

// Explicit Euler integration of the constrained gradient flow
//   du/dt = -(grad E - sum lambda_k grad G_k)
// with a Newton retraction back onto {G = 0} after each step.

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lojalab/constraint_geometry.hpp"

namespace lojalab {

struct FlowOptions {
  double dt_max = 1e-3;
  double cfl_coeff = 0.2;
  double tol_pgrad = 1e-8;
  double t_max = 10.0;
  int retract_every = 1;
  int record_every = 100;
  bool keep_snapshots = false;
  std::size_t max_steps = 5'000'000;

  void validate() const;
};

enum class FlowStatus { converged, t_max_reached, failed };
const char* to_string(FlowStatus s);

struct FlowRecord {
  std::size_t step = 0;
  double t = 0.0;
  double energy = 0.0;
  std::vector<double> constraints;
  double pgrad_norm = 0.0;
};

struct FlowTrace {
  std::vector<FlowRecord> rows;
  std::vector<Field> snapshots;  // parallel to rows when keep_snapshots is set
  std::optional<Field> final_state;
  FlowStatus status = FlowStatus::failed;
  std::string failure_reason;
  std::size_t steps = 0;
  std::size_t rejections = 0;

  std::size_t m() const { return rows.empty() ? 0 : rows.front().constraints.size(); }
  /// step,t,energy,constraint_0..,pgrad_norm with 17 significant digits.
  void write_csv(std::ostream& os) const;
};

/// Time step from the CFL rule: min(dt_max, cfl * h^2 / stiffness).
double cfl_time_step(const EnergyModel& E, const Field& u, const FlowOptions& opts);

/// One explicit step u - dt * P grad E followed by retraction. Throws
/// step_rejection when the result leaves the energy's domain.
Field step(const EnergyModel& E, const ConstraintModel& G, const Field& u, double dt, bool retract_after = true);

FlowTrace run_flow(const EnergyModel& E, const ConstraintModel& G, const Field& u0, const FlowOptions& opts);

struct DecayFit {
  double rate = 0.0;  // E - E* ~ exp(-rate t)
  double r2 = 0.0;
  std::size_t points = 0;
  double gap_lo = 0.0;
  double gap_hi = 0.0;
};

/// Exponential decay rate of E(t) - e_star over the rows whose gap lies in
/// [lo, hi] * (1 + |e_star|). Throws ill_conditioned_fit with fewer than 3 rows.
DecayFit fit_decay_rate(const FlowTrace& trace, double e_star, double lo = 1e-10, double hi = 1e-9);

}  // namespace lojalab
