#pragma once

// Closed-form steady-state quantities of N two-level atoms in a driven,
// lossy standing-wave cavity: internal amplitudes, potential, force,
// friction and diffusion matrices. All functions are pure.

#include "cavity/params.hpp"

#include <optional>

namespace cavity {

struct InternalState {
  Complex a_mean;            // <a>
  ComplexVector sigma_mean;  // <sigma_k>
  Vector saturation;         // |<sigma_k>|^2
};

struct FieldResponse {
  Complex bloch_det;
  Complex a_mean;
  ComplexVector sigma_mean;
  Vector saturation;
  double potential = 0.0;   // NaN on the singular arctangent branch
  Vector force;
  Matrix friction;          // beta, multiplies p/M
  Matrix diffusion;         // cavity part plus spontaneous-emission diagonal
};

struct OperatingPoint {
  double u0 = 0.0;           // light shift per atom
  double gamma0 = 0.0;       // resonance broadening per atom
  double u = 0.0;            // U0 * sum f^2
  double gamma_broad = 0.0;  // Gamma0 * sum f^2
  std::optional<double> trap_omega;   // empty for blue detuning
  std::optional<double> trap_period;
};

/// (i dC - kappa)(i dA - gamma) + sum_l g(x_l)^2
Complex bloch_determinant(const ModelParams& params,
                          const AtomConfiguration& config);

/// The same determinant assembled from the shifted, broadened resonance
/// (i dA - gamma) [i(dC - U) - (kappa + Gamma)].
Complex bloch_determinant_resonance_form(const ModelParams& params,
                                         const AtomConfiguration& config);

/// Throws kDegenerateDeterminant if |D'| is below the numeric floor.
InternalState steady_internal(const ModelParams& params,
                              const AtomConfiguration& config);

/// Closed-form potential (units hbar*gamma). Throws kSingularBranch when
/// dA*kappa + dC*gamma vanishes.
double potential(const ModelParams& params, const AtomConfiguration& config);

// Dipole force using <a^dag a> = |<a>|^2, which makes it exactly -grad V.
Vector force(const ModelParams& params, const AtomConfiguration& config);

// Constant-intensity reference force. Sign follows the large-detuning
// limit of force() at dC - U = -kappa (high-field seeking for dA < 0).
Vector large_detuning_force(const ModelParams& params,
                            const AtomConfiguration& config);

Matrix friction_matrix(const ModelParams& params,
                       const AtomConfiguration& config);

/// Diffusion matrix including the spontaneous-emission diagonal. Throws
/// kNotPositiveSemidefinite if an eigenvalue is below -1e-9 * trace.
Matrix diffusion_matrix(const ModelParams& params,
                        const AtomConfiguration& config);

/// Everything above at one configuration, sharing intermediate terms.
/// The diffusion matrix is not PSD-checked here; sample_kicks does that.
FieldResponse field_response(const ModelParams& params,
                             const AtomConfiguration& config);

OperatingPoint operating_point(const ModelParams& params,
                               const AtomConfiguration& config);

/// sqrt(2 |dA| sat k_C^2 / M) with sat taken at the all-antinode
/// configuration. Throws kInvalidForBlueDetuning for dA >= 0.
double trap_omega(const ModelParams& params);
double trap_period(const ModelParams& params);

/// N*U0 - kappa
double cooling_detuning(const ModelParams& params);
ModelParams with_cooling_detuning(ModelParams params);

/// Pump amplitude giving trap-site saturation `target_sat` (0..0.1) for the
/// current delta_c.
double pump_for_saturation(const ModelParams& params, double target_sat);
ModelParams with_saturation(ModelParams params, double target_sat);

inline constexpr double kSaturationCeiling = 0.1;
inline constexpr double kPsdRelativeTolerance = 1e-9;

}  // namespace cavity
