#pragma once

// Finite-difference audit of an energy/constraint pair at random states.

#include <cstddef>
#include <cstdint>

#include "lojalab/energy_models.hpp"

namespace lojalab {

struct GradCheckOptions {
  std::size_t pairs = 100;
  std::uint64_t seed = 1;
  double state_amplitude = 0.2;  // size of the random base states u
  double grad_tol = 1e-6;
  double symmetry_tol = 1e-9;
  double hessian_tol = 1e-5;
};

struct GradCheckReport {
  std::size_t pairs = 0;
  double max_grad_error = 0.0;        // |<grad E, v> - FD| / (1 + |E| + |FD|)
  double max_symmetry_error = 0.0;    // |<Hv, w> - <v, Hw>| / max(|.|, 1e-300)
  double max_hessian_error = 0.0;     // |FD of grad - Hv| / (1 + |Hv|)
  double max_constraint_error = 0.0;  // gradient check on every constraint component
  double max_constraint_symmetry_error = 0.0;
  bool grad_ok = false;
  bool symmetry_ok = false;
  bool hessian_ok = false;
  bool constraint_ok = false;

  bool ok() const { return grad_ok && symmetry_ok && hessian_ok && constraint_ok; }
};

/// Central differences with step 1e-5 * min(1, h) along random directions v,
/// at random admissible states (smooth profiles on grids, Gaussian points on
/// coordinate spaces).
GradCheckReport gradient_check(const EnergyModel& E, const ConstraintModel& G, const GradCheckOptions& opts = {});

}  // namespace lojalab
