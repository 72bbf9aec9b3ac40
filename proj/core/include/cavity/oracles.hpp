#pragma once

// Brute-force cross-checks of the closed-form model. These integrate the
// noiseless mean-field equations of the bosonized atom-cavity system with a
// fixed-step RK4 scheme and share no code path with model.cpp.

#include "cavity/params.hpp"

namespace cavity {

struct MeanFieldState {
  Complex a_mean;
  ComplexVector sigma_mean;
};

/// Relaxation of the mean fields from zero amplitude up to t_final.
MeanFieldState ode_steady_state(const ModelParams& params,
                                const AtomConfiguration& config,
                                double t_final);

struct DraggedAtomResult {
  Vector lag_force;       // velocity-odd part of the force lag, per atom
  Vector x0;
  Vector velocity;
  double t_center = 0.0;  // x(t) = x0 + v (t - t_center)
  double window_begin = 0.0;
  double window_end = 0.0;
  std::size_t steps = 0;

  Vector positions_at(double t) const { return x0 + velocity * (t - t_center); }
};

// Atoms follow prescribed straight paths through x0, centred on the
// averaging window (final 25% of t_final). The lag is the mean force minus
// the frozen-position steady-state force at the same instant, averaged over
// the window and antisymmetrised in v. Compare with the window average of
// beta(x(t)) v. Throws kNotConverged if a restart from a different initial
// internal state disagrees by more than 1% over the final 10%.
DraggedAtomResult dragged_atom_force(const ModelParams& params,
                                     const Vector& x0, const Vector& velocity,
                                     double t_final);

/// Default run length used by the friction checks: 200 / min(kappa, gamma).
double default_drag_time(const ModelParams& params);

/// Expansion of the closed-form potential to second order in gamma/delta_a
/// at delta_c = U0 - kappa (throws kInvalidArgument otherwise).
double potential_series(const ModelParams& params,
                        const AtomConfiguration& config);

}  // namespace cavity
