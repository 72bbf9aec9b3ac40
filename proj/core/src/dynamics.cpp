#include "cavity/dynamics.hpp"

#include "cavity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cavity {

namespace {

constexpr double kRoundoffFloor = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void check_weight(double y, const char* name) {
  if (!(y >= 0.0 && y <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must lie in [0, 1]");
  }
}

double clamp_eigenvalue(double lambda, double trace) {
  const double scale = std::abs(trace);
  if (lambda < -kPsdRelativeTolerance * scale) {
    throw Error(ErrorCode::kNotPositiveSemidefinite,
                "diffusion eigenvalue " + std::to_string(lambda) +
                    " with trace " + std::to_string(trace));
  }
  // Negative values inside the tolerance band, and round-off-sized
  // positive ones, are treated as exact zeros.
  return lambda <= kRoundoffFloor * scale ? 0.0 : lambda;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

void MixingWeights::validate() const {
  check_weight(y_force, "y_force");
  check_weight(y_friction, "y_friction");
  check_weight(y_diffusion, "y_diffusion");
}

void IntegratorConfig::validate(const ModelParams& params) const {
  if (!(std::isfinite(dt) && dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must be > 0");
  }
  if (!(std::isfinite(duration) && duration >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "duration must be >= 0");
  }
  if (noise_substeps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "noise_substeps must be >= 1");
  }
  if (sample_stride < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sample_stride must be >= 1");
  }
  if (params.delta_a < 0.0 && params.eta > 0.0 && params.g0 > 0.0) {
    const double limit =
        trap_period(params) / static_cast<double>(kMinStepsPerTrapPeriod);
    if (dt > limit * (1.0 + 1e-12)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "dt = " + std::to_string(dt) +
                      " exceeds trap_period/100 = " + std::to_string(limit));
    }
  }
}

IntegratorConfig IntegratorConfig::for_trap(const ModelParams& params,
                                            double duration,
                                            std::uint64_t seed,
                                            std::size_t steps_per_period,
                                            std::size_t samples_per_period) {
  if (steps_per_period < kMinStepsPerTrapPeriod || samples_per_period < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "need >= 100 steps and >= 1 sample per trap period");
  }
  IntegratorConfig cfg;
  cfg.dt = trap_period(params) / static_cast<double>(steps_per_period);
  cfg.duration = duration;
  cfg.rng_seed = seed;
  cfg.sample_stride = std::max<std::size_t>(
      1, steps_per_period / samples_per_period);
  return cfg;
}

Vector sample_kicks(const Matrix& d_total, double dt, RandomStream& rng,
                    std::size_t substeps) {
  const auto n = d_total.rows();
  const double trace = d_total.trace();

  // Standard normals, each the scaled sum of `substeps` draws.
  Vector xi = Vector::Zero(n);
  for (std::size_t j = 0; j < substeps; ++j)
    for (Eigen::Index k = 0; k < n; ++k) xi[k] += rng.normal();
  if (substeps > 1) xi /= std::sqrt(static_cast<double>(substeps));

  if (n == 1) {
    const double lambda = clamp_eigenvalue(d_total(0, 0), trace);
    return Vector::Constant(1, std::sqrt(lambda * dt) * xi[0]);
  }
  if (n == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver;
    solver.computeDirect(Eigen::Matrix2d(d_total));
    const Eigen::Vector2d lambda = solver.eigenvalues();
    const double s0 = std::sqrt(clamp_eigenvalue(lambda[0], trace) * dt);
    const double s1 = std::sqrt(clamp_eigenvalue(lambda[1], trace) * dt);
    return solver.eigenvectors().col(0) * (s0 * xi[0]) +
           solver.eigenvectors().col(1) * (s1 * xi[1]);
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(d_total);
  for (Eigen::Index k = 0; k < n; ++k) {
    xi[k] *= std::sqrt(clamp_eigenvalue(solver.eigenvalues()[k], trace) * dt);
  }
  return solver.eigenvectors() * xi;
}

FieldResponse apply_mixing(const FieldResponse& full,
                           const MixingWeights& weights,
                           const ModelParams& params,
                           const AtomConfiguration& config) {
  weights.validate();
  if (weights.is_identity()) return full;
  FieldResponse out = full;
  if (weights.y_force != 1.0) {
    const Vector f0 = large_detuning_force(params, config);
    out.force = weights.y_force * full.force + (1.0 - weights.y_force) * f0;
  }
  const auto n = full.friction.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index m = 0; m < n; ++m) {
      if (k == m) continue;
      out.friction(k, m) = weights.y_friction * full.friction(k, m);
      out.diffusion(k, m) = weights.y_diffusion * full.diffusion(k, m);
    }
  }
  return out;
}

StepOutcome step(const PhaseSpaceState& state, const ModelParams& params,
                 const MixingWeights& weights, const IntegratorConfig& cfg,
                 RandomStream& rng) {
  const AtomConfiguration config{state.positions};
  const FieldResponse response =
      apply_mixing(field_response(params, config), weights, params, config);

  const double mass = params.mass();
  const double dt = cfg.dt;
  const Vector velocity = state.momenta / mass;

  StepOutcome out;
  out.saturation_max = response.saturation.maxCoeff();
  out.adiabaticity_violated =
      velocity.cwiseAbs().maxCoeff() >
      cfg.adiabaticity_factor * std::min(params.kappa, params.gamma);

  out.state.momenta = state.momenta +
                      (response.force + response.friction * velocity) * dt;
  if (cfg.noise) out.state.momenta += sample_kicks(response.diffusion, dt, rng, cfg.noise_substeps);
  out.state.positions = state.positions + out.state.momenta * (dt / mass);
  out.state.time = state.time + dt;

  if (!out.state.positions.allFinite() || !out.state.momenta.allFinite()) {
    throw Error(ErrorCode::kNonFiniteState,
                "non-finite phase-space point at t = " +
                    std::to_string(out.state.time));
  }
  return out;
}

PhaseSpaceState TrajectoryRecord::state(std::size_t sample) const {
  PhaseSpaceState s;
  s.time = times[sample];
  s.positions = Eigen::Map<const Vector>(
      positions.data() + sample * n_atoms, static_cast<Eigen::Index>(n_atoms));
  s.momenta = Eigen::Map<const Vector>(
      momenta.data() + sample * n_atoms, static_cast<Eigen::Index>(n_atoms));
  return s;
}

void TrajectoryRecord::append(const PhaseSpaceState& s, double sat_max,
                              bool flag) {
  times.push_back(s.time);
  positions.insert(positions.end(), s.positions.data(),
                   s.positions.data() + s.positions.size());
  momenta.insert(momenta.end(), s.momenta.data(),
                 s.momenta.data() + s.momenta.size());
  saturation_max.push_back(sat_max);
  adiabatic_flag.push_back(flag ? 1 : 0);
}

TrajectoryRecord run_trajectory(const PhaseSpaceState& initial,
                                const ModelParams& params,
                                const MixingWeights& weights,
                                const IntegratorConfig& cfg) {
  params.validate();
  weights.validate();
  cfg.validate(params);
  const auto n = static_cast<Eigen::Index>(params.n_atoms);
  if (initial.positions.size() != n || initial.momenta.size() != n) {
    throw Error(ErrorCode::kInvalidArgument,
                "initial state does not match n_atoms");
  }
  if (!initial.positions.allFinite() || !initial.momenta.allFinite()) {
    throw Error(ErrorCode::kNonFiniteState, "non-finite initial state");
  }

  TrajectoryRecord record;
  record.params = params;
  record.weights = weights;
  record.config = cfg;
  record.n_atoms = params.n_atoms;

  const auto total_steps =
      static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));
  const std::size_t n_samples = total_steps / cfg.sample_stride + 1;
  record.times.reserve(n_samples);
  record.positions.reserve(n_samples * params.n_atoms);
  record.momenta.reserve(n_samples * params.n_atoms);
  record.saturation_max.reserve(n_samples);
  record.adiabatic_flag.reserve(n_samples);

  const double mass = params.mass();
  const double adiabatic_limit =
      cfg.adiabaticity_factor * std::min(params.kappa, params.gamma);
  const double breach_level = kSaturationCeiling * (1.0 + 1e-9);
  {
    const auto r = field_response(params, AtomConfiguration{initial.positions});
    const bool flag =
        (initial.momenta / mass).cwiseAbs().maxCoeff() > adiabatic_limit;
    record.append(initial, r.saturation.maxCoeff(), flag);
  }

  RandomStream rng(cfg.rng_seed);
  PhaseSpaceState state = initial;
  double interval_sat = 0.0;
  bool interval_flag = false;
  try {
    for (std::size_t s = 1; s <= total_steps; ++s) {
      StepOutcome out = step(state, params, weights, cfg, rng);
      out.state.time = initial.time + static_cast<double>(s) * cfg.dt;
      if (out.adiabaticity_violated) ++record.adiabaticity_violations;
      if (out.saturation_max > breach_level) ++record.saturation_breaches;
      interval_sat = std::max(interval_sat, out.saturation_max);
      interval_flag = interval_flag || out.adiabaticity_violated;
      state = std::move(out.state);
      if (s % cfg.sample_stride == 0) {
        record.append(state, interval_sat, interval_flag);
        interval_sat = 0.0;
        interval_flag = false;
      }
    }
  } catch (const Error& e) {
    record.completed = false;
    record.status = e.what();
  }
  return record;
}

PhaseSpaceState random_initial_state(const ModelParams& params,
                                     std::uint64_t seed, double temperature) {
  if (!(temperature >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
  RandomStream rng(seed);
  const auto n = static_cast<Eigen::Index>(params.n_atoms);
  PhaseSpaceState s;
  s.positions.resize(n);
  s.momenta.resize(n);
  const double sigma_p = std::sqrt(params.mass() * temperature);
  for (Eigen::Index k = 0; k < n; ++k) s.positions[k] = kWavelength * rng.uniform();
  for (Eigen::Index k = 0; k < n; ++k) s.momenta[k] = sigma_p * rng.normal();
  return s;
}

}  // namespace cavity
