#include "cavity/model.hpp"

#include "cavity/errors.hpp"

#include <cmath>
#include <string>

namespace cavity {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kDeterminantFloor = 1e-14;

// Position-dependent couplings and the Bloch determinant. Shared by all the
// observables so field_response() evaluates the trigonometry once.
struct Geometry {
  Vector g;        // g(x_k)
  Vector dg;       // dg/dx
  Vector dg2;      // d(g^2)/dx
  double sum_g2 = 0.0;
  Complex det;
  double det_abs2 = 0.0;
};

void check_config(const ModelParams& params, const AtomConfiguration& config) {
  if (config.size() != params.n_atoms) {
    throw Error(ErrorCode::kInvalidArgument,
                "configuration has " + std::to_string(config.size()) +
                    " atoms, params expect " + std::to_string(params.n_atoms));
  }
  if (!config.positions.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "non-finite atomic position");
  }
}

Geometry make_geometry(const ModelParams& params,
                       const AtomConfiguration& config) {
  params.validate();
  check_config(params, config);
  const auto n = static_cast<Eigen::Index>(params.n_atoms);
  Geometry geo;
  geo.g.resize(n);
  geo.dg.resize(n);
  geo.dg2.resize(n);
  const double g0 = params.g0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double x = config.positions[k];
    const double c = std::cos(x);
    const double s = std::sin(x);
    geo.g[k] = g0 * c;
    geo.dg[k] = -g0 * s;
    geo.dg2[k] = -2.0 * g0 * g0 * s * c;
    geo.sum_g2 += geo.g[k] * geo.g[k];
  }
  geo.det = (kI * params.delta_c - params.kappa) *
                (kI * params.delta_a - params.gamma) +
            geo.sum_g2;
  geo.det_abs2 = std::norm(geo.det);
  return geo;
}

void require_regular(const ModelParams& params, const Geometry& geo) {
  const double scale =
      (std::abs(params.delta_c) + params.kappa) *
          (std::abs(params.delta_a) + params.gamma) +
      geo.sum_g2;
  if (!(std::abs(geo.det) > kDeterminantFloor * scale)) {
    throw Error(ErrorCode::kDegenerateDeterminant,
                "|D'| below numeric floor");
  }
}

double arctan_denominator(const ModelParams& p) {
  return p.delta_a * p.kappa + p.delta_c * p.gamma;
}

bool singular_branch(const ModelParams& p) {
  const double b = arctan_denominator(p);
  const double scale =
      std::abs(p.delta_a) * p.kappa + std::abs(p.delta_c) * p.gamma;
  return std::abs(b) <= 1e-14 * scale;
}

double potential_from(const ModelParams& p, const Geometry& geo) {
  const double b = arctan_denominator(p);
  const double a = p.gamma * p.kappa - p.delta_a * p.delta_c + geo.sum_g2;
  return p.delta_a * p.eta * p.eta / b * std::atan(a / b);
}

Vector force_from(const ModelParams& p, const Geometry& geo) {
  // -dA/(dA^2+gamma^2) |a|^2 grad g^2 with |a|^2 = eta^2 (dA^2+gamma^2)/|D'|^2
  const double scale = -p.delta_a * p.eta * p.eta / geo.det_abs2;
  return scale * geo.dg2;
}

Matrix friction_from(const ModelParams& p, const Geometry& geo) {
  const auto n = geo.g.size();
  const double eta2 = p.eta * p.eta;
  const Complex atom = kI * p.delta_a - p.gamma;
  const Complex chi = (kI * p.delta_a + p.gamma) / atom;
  const Complex bracket = 2.0 * (1.0 + chi) * (atom * atom - geo.sum_g2) +
                          (1.0 + 3.0 * chi) * geo.det;
  const double interaction =
      eta2 / (2.0 * geo.det_abs2) * std::imag(bracket / (geo.det * geo.det));
  const double self = 4.0 * eta2 / geo.det_abs2 * p.gamma * p.delta_a /
                      (p.delta_a * p.delta_a + p.gamma * p.gamma);

  Matrix beta(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    beta(k, k) = self * geo.dg[k] * geo.dg[k] +
                 interaction * geo.dg2[k] * geo.dg2[k];
    for (Eigen::Index m = k + 1; m < n; ++m) {
      beta(k, m) = interaction * geo.dg2[k] * geo.dg2[m];
      beta(m, k) = beta(k, m);
    }
  }
  return beta;
}

Matrix diffusion_from(const ModelParams& p, const Geometry& geo) {
  const auto n = geo.g.size();
  const double eta2 = p.eta * p.eta;
  const double self = 2.0 * eta2 * p.gamma / geo.det_abs2;
  const double interaction =
      2.0 * eta2 * p.delta_a * arctan_denominator(p) /
      (geo.det_abs2 * geo.det_abs2);
  // k_A = k_C = 1
  const double spontaneous = self * p.u2bar;

  Matrix d(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    d(k, k) = self * geo.dg[k] * geo.dg[k] +
              interaction * geo.dg2[k] * geo.dg2[k] +
              spontaneous * geo.g[k] * geo.g[k];
    for (Eigen::Index m = k + 1; m < n; ++m) {
      d(k, m) = interaction * geo.dg2[k] * geo.dg2[m];
      d(m, k) = d(k, m);
    }
  }
  return d;
}

void check_psd(const Matrix& d) {
  const double trace = d.trace();
  if (d.size() == 0 || trace == 0.0) {
    if (d.cwiseAbs().maxCoeff() == 0.0) return;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(d, Eigen::EigenvaluesOnly);
  const double lowest = solver.eigenvalues().minCoeff();
  if (lowest < -kPsdRelativeTolerance * std::abs(trace)) {
    throw Error(ErrorCode::kNotPositiveSemidefinite,
                "diffusion eigenvalue " + std::to_string(lowest) +
                    " with trace " + std::to_string(trace));
  }
}

}  // namespace

Complex bloch_determinant(const ModelParams& params,
                          const AtomConfiguration& config) {
  return make_geometry(params, config).det;
}

Complex bloch_determinant_resonance_form(const ModelParams& params,
                                         const AtomConfiguration& config) {
  const auto op = operating_point(params, config);
  const Complex atom = kI * params.delta_a - params.gamma;
  return atom * (kI * (params.delta_c - op.u) - (params.kappa + op.gamma_broad));
}

InternalState steady_internal(const ModelParams& params,
                              const AtomConfiguration& config) {
  const Geometry geo = make_geometry(params, config);
  require_regular(params, geo);
  InternalState out;
  out.a_mean = params.eta * (params.gamma - kI * params.delta_a) / geo.det;
  out.sigma_mean = (-params.eta / geo.det) * geo.g.cast<Complex>();
  out.saturation = out.sigma_mean.cwiseAbs2();
  return out;
}

double potential(const ModelParams& params, const AtomConfiguration& config) {
  const Geometry geo = make_geometry(params, config);
  if (singular_branch(params)) {
    throw Error(ErrorCode::kSingularBranch,
                "delta_a*kappa + delta_c*gamma = 0");
  }
  return potential_from(params, geo);
}

Vector force(const ModelParams& params, const AtomConfiguration& config) {
  const Geometry geo = make_geometry(params, config);
  require_regular(params, geo);
  return force_from(params, geo);
}

Vector large_detuning_force(const ModelParams& params,
                            const AtomConfiguration& config) {
  const Geometry geo = make_geometry(params, config);
  if (params.delta_a == 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "large-detuning force needs delta_a != 0");
  }
  const double scale = -params.eta * params.eta /
                       (2.0 * params.delta_a * params.kappa * params.kappa);
  return scale * geo.dg2;
}

Matrix friction_matrix(const ModelParams& params,
                       const AtomConfiguration& config) {
  const Geometry geo = make_geometry(params, config);
  require_regular(params, geo);
  return friction_from(params, geo);
}

Matrix diffusion_matrix(const ModelParams& params,
                        const AtomConfiguration& config) {
  const Geometry geo = make_geometry(params, config);
  require_regular(params, geo);
  Matrix d = diffusion_from(params, geo);
  check_psd(d);
  return d;
}

FieldResponse field_response(const ModelParams& params,
                             const AtomConfiguration& config) {
  const Geometry geo = make_geometry(params, config);
  require_regular(params, geo);
  FieldResponse out;
  out.bloch_det = geo.det;
  out.a_mean = params.eta * (params.gamma - kI * params.delta_a) / geo.det;
  out.sigma_mean = (-params.eta / geo.det) * geo.g.cast<Complex>();
  out.saturation = out.sigma_mean.cwiseAbs2();
  out.potential = singular_branch(params) ? std::nan("")
                                          : potential_from(params, geo);
  out.force = force_from(params, geo);
  out.friction = friction_from(params, geo);
  out.diffusion = diffusion_from(params, geo);
  return out;
}

OperatingPoint operating_point(const ModelParams& params,
                               const AtomConfiguration& config) {
  params.validate();
  check_config(params, config);
  OperatingPoint op;
  const double denom =
      params.delta_a * params.delta_a + params.gamma * params.gamma;
  op.u0 = params.delta_a * params.g0 * params.g0 / denom;
  op.gamma0 = params.gamma * params.g0 * params.g0 / denom;
  const double sum_f2 = config.positions.array().cos().square().sum();
  op.u = op.u0 * sum_f2;
  op.gamma_broad = op.gamma0 * sum_f2;
  if (params.delta_a < 0.0) {
    op.trap_omega = trap_omega(params);
    op.trap_period = 2.0 * kPi / *op.trap_omega;
  }
  return op;
}

double trap_omega(const ModelParams& params) {
  if (params.delta_a >= 0.0) {
    throw Error(ErrorCode::kInvalidForBlueDetuning,
                "trap frequency needs delta_a < 0");
  }
  const auto internal =
      steady_internal(params, AtomConfiguration::antinodes(params.n_atoms));
  const double sat = internal.saturation[0];
  return std::sqrt(2.0 * std::abs(params.delta_a) * sat / params.mass());
}

double trap_period(const ModelParams& params) {
  return 2.0 * kPi / trap_omega(params);
}

double cooling_detuning(const ModelParams& params) {
  const double u0 = params.delta_a * params.g0 * params.g0 /
                    (params.delta_a * params.delta_a +
                     params.gamma * params.gamma);
  return static_cast<double>(params.n_atoms) * u0 - params.kappa;
}

ModelParams with_cooling_detuning(ModelParams params) {
  params.delta_c = cooling_detuning(params);
  return params;
}

double pump_for_saturation(const ModelParams& params, double target_sat) {
  if (!(target_sat >= 0.0 && target_sat <= kSaturationCeiling)) {
    throw Error(ErrorCode::kInvalidArgument,
                "target saturation must lie in [0, 0.1]");
  }
  if (params.g0 <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "pump_for_saturation needs g0 > 0");
  }
  params.validate();
  const Complex det =
      bloch_determinant(params, AtomConfiguration::antinodes(params.n_atoms));
  // |sigma|^2 = eta^2 g0^2 / |D'|^2 at an antinode
  return std::sqrt(target_sat) * std::abs(det) / params.g0;
}

ModelParams with_saturation(ModelParams params, double target_sat) {
  params.eta = pump_for_saturation(params, target_sat);
  return params;
}

}  // namespace cavity
