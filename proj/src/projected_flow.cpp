#include <cmath>
#include <cstdio>
#include <sstream>

#include "lojalab/projected_flow.hpp"

namespace lojalab {

namespace {

constexpr double kDtMin = 1e-12;

FlowRecord make_record(const EnergyModel& E, const ConstraintModel& G, const Field& u, std::size_t step, double t,
                       double pgrad) {
  return {step, t, E.energy(u), G.value(u), pgrad};
}

}  // namespace

void FlowOptions::validate() const {
  require(dt_max > 0.0 && cfl_coeff > 0.0 && tol_pgrad > 0.0 && t_max > 0.0,
          "flow options: dt_max, cfl_coeff, tol_pgrad and t_max must be positive");
  require(retract_every >= 1 && record_every >= 1 && max_steps >= 1,
          "flow options: retract_every, record_every and max_steps must be >= 1");
}

const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::converged: return "converged";
    case FlowStatus::t_max_reached: return "t_max_reached";
    case FlowStatus::failed: return "failed";
  }
  return "unknown";
}

void FlowTrace::write_csv(std::ostream& os) const {
  os << "step,t,energy";
  for (std::size_t k = 0; k < m(); ++k) os << ",constraint_" << k;
  os << ",pgrad_norm\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << ',' << buf;
  };
  for (const FlowRecord& r : rows) {
    os << r.step;
    put(r.t);
    put(r.energy);
    for (double c : r.constraints) put(c);
    put(r.pgrad_norm);
    os << '\n';
  }
}

double cfl_time_step(const EnergyModel& E, const Field& u, const FlowOptions& opts) {
  const double h = u.grid().h();
  const double a = E.stiffness(u);
  require(a > 0.0 && std::isfinite(a), "energy stiffness must be positive");
  return std::min(opts.dt_max, opts.cfl_coeff * h * h / a);
}

Field step(const EnergyModel& E, const ConstraintModel& G, const Field& u, double dt, bool retract_after) {
  require(dt > 0.0, "step: dt must be positive");
  require(E.admissible(u), "step: start point outside the energy's domain");
  Field next = u;
  next.axpy(-dt, project_tangent(E, G, u));
  if (retract_after) next = retract(G, next);
  if (!next.all_finite() || !E.admissible(next)) {
    std::ostringstream msg;
    msg << "step with dt = " << dt << " leaves the admissible set";
    fail(ErrorKind::step_rejection, msg.str());
  }
  return next;
}

FlowTrace run_flow(const EnergyModel& E, const ConstraintModel& G, const Field& u0, const FlowOptions& opts) {
  opts.validate();
  require(u0.grid() == E.grid() && u0.grid() == G.grid(), "run_flow: field, energy and constraint grids differ");
  FlowTrace trace;
  Field u = retract(G, u0);
  require(E.admissible(u), "run_flow: initial state outside the energy's domain");

  double t = 0.0;
  double dt_scale = 1.0;
  double pgrad = norm(project_tangent(E, G, u));
  double energy = E.energy(u);
  std::size_t last_recorded = 0;
  auto record = [&](std::size_t k) {
    trace.rows.push_back(make_record(E, G, u, k, t, pgrad));
    if (opts.keep_snapshots) trace.snapshots.push_back(u);
    last_recorded = k;
  };
  record(0);

  std::size_t k = 0;
  for (;;) {
    if (pgrad <= opts.tol_pgrad) {
      trace.status = FlowStatus::converged;
      break;
    }
    if (t >= opts.t_max) {
      trace.status = FlowStatus::t_max_reached;
      break;
    }
    if (k >= opts.max_steps) {
      trace.status = FlowStatus::failed;
      trace.failure_reason = "step budget exhausted";
      break;
    }
    const bool do_retract = (k + 1) % static_cast<std::size_t>(opts.retract_every) == 0;
    const double dt_rule = cfl_time_step(E, u, opts);
    bool accepted = false;
    while (!accepted) {
      const double dt = std::min(dt_rule * dt_scale, opts.t_max - t);
      if (dt < kDtMin && dt < opts.t_max - t) break;
      try {
        Field next = step(E, G, u, dt, do_retract);
        const double e_next = E.energy(next);
        if (e_next > energy + 1e-12 * (1.0 + std::abs(energy))) fail(ErrorKind::step_rejection, "energy increased");
        u = std::move(next);
        energy = e_next;
        t += dt;
        accepted = true;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::step_rejection && err.kind() != ErrorKind::retraction_failure) throw;
        ++trace.rejections;
        dt_scale *= 0.5;
      }
    }
    if (!accepted) {
      trace.status = FlowStatus::failed;
      trace.failure_reason = "stiffness";
      break;
    }
    ++k;
    pgrad = norm(project_tangent(E, G, u));
    if (k % static_cast<std::size_t>(opts.record_every) == 0) record(k);
  }
  if (last_recorded != k) record(k);
  trace.steps = k;
  trace.final_state = u;
  return trace;
}

DecayFit fit_decay_rate(const FlowTrace& trace, double e_star, double lo, double hi) {
  require(lo > 0.0 && hi > lo, "fit_decay_rate: need 0 < lo < hi");
  const double s = 1.0 + std::abs(e_star);
  std::vector<double> ts, ys;
  for (const FlowRecord& r : trace.rows) {
    const double gap = r.energy - e_star;
    if (gap >= lo * s && gap <= hi * s) {
      ts.push_back(r.t);
      ys.push_back(std::log(gap));
    }
  }
  if (ts.size() < 3)
    fail(ErrorKind::ill_conditioned_fit,
         "only " + std::to_string(ts.size()) + " trace rows in the decay window; record more often");
  const LineFit f = linfit(ts, ys);
  return {-f.slope, f.r2, ts.size(), lo * s, hi * s};
}

}  // namespace lojalab
