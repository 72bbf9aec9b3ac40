#pragma once

#include "cavity/params.hpp"

#include <utility>

namespace cavity {

// Second-order expansion of the friction and diffusion matrices about the
// all-antinode configuration, for displacements x_k << 1/k_C:
//
//   beta_km ~ beta0 x_k^2 delta_km + beta1 x_k x_m
//   D_km    ~ (d0 + d0_self x_k^2 + d0_collective sum_l x_l^2) delta_km
//             + d1 x_k x_m
//
// Everything is evaluated with the trap-site determinant D'_0.  The
// collective term comes from the shift of |D'|^2 with the summed couplings.
struct SmallOscillationCoefficients {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double d0 = 0.0;
  double d0_self = 0.0;
  double d0_collective = 0.0;
  double d1 = 0.0;
};

SmallOscillationCoefficients small_oscillation_coefficients(
    const ModelParams& params);

/// (friction, diffusion) from the expansion at the given displacements.
std::pair<Matrix, Matrix> small_oscillation_matrices(
    const SmallOscillationCoefficients& coeffs, const Vector& displacements);

}  // namespace cavity
