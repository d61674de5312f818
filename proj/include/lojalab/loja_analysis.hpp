#pragma once

// Empirical Lojasiewicz analysis near a critical point: polishing the
// critical point, sampling the constraint set around it, fitting the exponent
// and constant of |E - E(u_bar)|^(1-theta) <= C |P grad E|, and the blow-up of
// the best constant for the sequence-space counterexamples.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lojalab/constraint_geometry.hpp"
#include "lojalab/projected_flow.hpp"

namespace lojalab {

struct CriticalOptions {
  FlowOptions flow;          // tol_pgrad is overridden by flow_tol
  double flow_tol = 1e-6;
  double tol = 1e-12;        // relative to 1 + |grad E|
  int newton_max_iter = 100;
};

/// Gradient flow to a coarse tolerance, then damped Newton on the pullback
/// gradient in a chart at the flow's end point.
Field find_critical(const EnergyModel& E, const ConstraintModel& G, const Field& u0,
                    const CriticalOptions& opts = {});

struct SampleStats {
  std::size_t requested = 0;
  std::size_t accepted = 0;
  std::size_t skipped = 0;
};

/// Points of M near u_bar: random unit directions in ker G'(u_bar) with
/// log-uniform amplitudes in [radius/100, radius], retracted onto M.
std::vector<Field> sample_near(const EnergyModel& E, const ConstraintModel& G, const Field& u_bar, double radius,
                               std::size_t count, std::uint64_t seed, SampleStats* stats = nullptr);

struct LojaFit {
  double theta = 0.0;
  double C = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n_samples = 0;
  double emin = 0.0;
  double emax = 0.0;
  bool in_range_flag = false;
};

/// Regression of log|grad| on log|gap| over the usable pairs.
LojaFit fit_exponent_from(std::span<const double> gaps, std::span<const double> grad_norms);

/// Refined fit (projected gradient) or, with refined = false, the plain fit
/// against the full gradient.
LojaFit fit_exponent(const EnergyModel& E, const ConstraintModel& G, const Field& u_bar,
                     const std::vector<Field>& samples, bool refined = true);

/// max over samples of gap^(1-theta) / |grad| for a fixed theta.
double constant_at(const EnergyModel& E, const ConstraintModel& G, const Field& u_bar,
                   const std::vector<Field>& samples, double theta, bool refined = true);

/// Coordinate directions followed by `random` seeded unit directions in R^N.
std::vector<std::vector<double>> constant_search_directions(std::size_t N, std::size_t random = 200);

/// Best constant of the sequence model at the origin over the search
/// directions and amplitudes sigma, sigma/10, sigma/100.
double best_constant(const SeqQuadModel& model, double theta, double sigma);

enum class BlowupRoute { direct, chart };
BlowupRoute blowup_route_from_string(const std::string& name);
std::string to_string(BlowupRoute r);

/// Same search on the pullback of the R x R^N example with weights lambda/2,
/// whose chart energy is the sequence model's.
double best_constant_chart(const SeqQuadModel& model, double theta, double sigma);

struct BlowupRow {
  std::size_t N = 0;
  double C = 0.0;
  double ratio = 0.0;  // C / previous row's C; 0 on the first row
};

std::vector<BlowupRow> blowup_sweep(const std::vector<std::size_t>& Ns, LambdaRule rule, double theta, double sigma,
                                    BlowupRoute route = BlowupRoute::direct, int threads = 1);

struct HessianReport {
  std::vector<double> eigenvalues;  // ascending
  std::size_t kernel_dim = 0;
  bool index_zero_analog = true;
  double asymmetry = 0.0;           // max |H - H^T| of the finite-difference matrix
  double spectral_radius = 0.0;
};

/// Spectrum of the pullback Hessian at a critical point; eigenvalues below
/// kernel_rel * spectral radius in magnitude count toward the kernel.
HessianReport hessian_report(const ChartData& chart, const EnergyModel& E, const ConstraintModel& G,
                             double kernel_rel = 1e-6);

}  // namespace lojalab
