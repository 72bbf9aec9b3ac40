#include "cavity/small_oscillation.hpp"

#include "cavity/model.hpp"

namespace cavity {

SmallOscillationCoefficients small_oscillation_coefficients(
    const ModelParams& params) {
  const Complex det =
      bloch_determinant(params, AtomConfiguration::antinodes(params.n_atoms));
  const double det2 = std::norm(det);
  const double eta2 = params.eta * params.eta;
  const double g02 = params.g0 * params.g0;
  const double g04 = g02 * g02;
  const double n = static_cast<double>(params.n_atoms);
  const Complex i{0.0, 1.0};
  const Complex atom = i * params.delta_a - params.gamma;
  const Complex chi = (i * params.delta_a + params.gamma) / atom;
  const Complex bracket =
      2.0 * (1.0 + chi) * (atom * atom - n * g02) + (1.0 + 3.0 * chi) * det;
  const double b = params.delta_a * params.kappa + params.delta_c * params.gamma;

  SmallOscillationCoefficients c;
  c.beta0 = 4.0 * params.gamma * params.delta_a * eta2 * g02 /
            (det2 * (params.delta_a * params.delta_a +
                     params.gamma * params.gamma));
  c.beta1 = 2.0 * eta2 * g04 / det2 * std::imag(bracket / (det * det));
  const double dipole = 2.0 * params.gamma * eta2 * g02 / det2;
  c.d0 = dipole * params.u2bar;
  c.d0_self = dipole * (1.0 - params.u2bar);
  c.d0_collective = c.d0 * 2.0 * det.real() * g02 / det2;
  c.d1 = 8.0 * eta2 * g04 * params.delta_a * b / (det2 * det2);
  return c;
}

std::pair<Matrix, Matrix> small_oscillation_matrices(
    const SmallOscillationCoefficients& c, const Vector& x) {
  const auto n = x.size();
  const double r2 = x.squaredNorm();
  Matrix beta = c.beta1 * x * x.transpose();
  Matrix diff = c.d1 * x * x.transpose();
  for (Eigen::Index k = 0; k < n; ++k) {
    beta(k, k) += c.beta0 * x[k] * x[k];
    diff(k, k) += c.d0 + c.d0_self * x[k] * x[k] + c.d0_collective * r2;
  }
  return {beta, diff};
}

}  // namespace cavity
