#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <numbers>

namespace cavity {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXd;

// Natural units throughout: hbar = gamma = k_C = 1, k_A = k_C.
// Positions are in 1/k_C, momenta in hbar*k_C, times in 1/gamma.

/// Physical constants and operating point of the driven cavity.
struct ModelParams {
  double gamma = 1.0;          // atomic half-linewidth (the unit rate)
  double kappa = 0.5;          // cavity field decay rate
  double g0 = 5.0;             // peak atom-field coupling
  double delta_a = -50.0;      // pump-atom detuning, negative is red
  double delta_c = 0.0;        // pump-cavity detuning
  double eta = 0.0;            // pump amplitude
  std::size_t n_atoms = 2;
  double recoil_ratio = 1.29e-3;   // omega_rec / gamma (Rb-85 D2)
  double u2bar = 2.0 / 5.0;        // angular emission factor

  // Throws Error(kInvalidArgument) when an invariant is broken.
  void validate() const;

  double mass() const noexcept { return 1.0 / (2.0 * recoil_ratio); }
};

// Reference operating points used throughout the tests. Both return
// delta_c = 0 and eta = 0; see with_cooling_detuning / with_saturation.
ModelParams garching_point(std::size_t n_atoms = 2);
ModelParams improved_point(std::size_t n_atoms = 2);

/// Axial positions of the atoms.
struct AtomConfiguration {
  Vector positions;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(positions.size());
  }

  static AtomConfiguration antinodes(std::size_t n) {
    return {Vector::Zero(static_cast<Eigen::Index>(n))};
  }
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kWavelength = 2.0 * kPi;   // lambda in units of 1/k_C

// gamma of the Rb-85 D2 line in rad/s, used to quote times in microseconds.
inline constexpr double kGammaRb85 = 2.0 * kPi * 3.0e6;

inline double to_microseconds(double t_natural, double gamma_si = kGammaRb85) {
  return t_natural / gamma_si * 1.0e6;
}

inline double from_microseconds(double t_us, double gamma_si = kGammaRb85) {
  return t_us * 1.0e-6 * gamma_si;
}

}  // namespace cavity
