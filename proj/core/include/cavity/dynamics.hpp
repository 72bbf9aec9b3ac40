#pragma once

// Stochastic integration of the coupled semiclassical Langevin equations
//   dx_k = p_k/M dt
//   dp_k = (f_k + sum_m beta_km p_m/M) dt + dW_k,   <dW dW^T> = D dt
// with the field response frozen over each step.

#include "cavity/model.hpp"
#include "cavity/params.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace cavity {

/// Deterministic Gaussian/uniform source; one per trajectory.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// splitmix64-based stream splitting: distinct indices give decorrelated
// seeds for the same master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

struct PhaseSpaceState {
  double time = 0.0;
  Vector positions;
  Vector momenta;
};

/// Continuous ablation of the interaction channels; 1 keeps a channel,
/// 0 removes its atom-atom part.
struct MixingWeights {
  double y_force = 1.0;
  double y_friction = 1.0;
  double y_diffusion = 1.0;

  void validate() const;
  bool is_identity() const noexcept {
    return y_force == 1.0 && y_friction == 1.0 && y_diffusion == 1.0;
  }
};

struct IntegratorConfig {
  double dt = 0.01;
  double duration = 0.0;
  std::size_t sample_stride = 1;
  std::uint64_t rng_seed = 0;
  double adiabaticity_factor = 0.3;
  bool noise = true;   // false forces D = 0
  // Each kick is driven by the normalised sum of this many standard
  // normals, so (dt, 2) follows the same Brownian path as (dt/2, 1).
  std::size_t noise_substeps = 1;

  // dt > 0, duration >= 0, stride >= 1, and dt <= trap_period/100 whenever
  // the parameters describe a red-detuned, pumped trap.
  void validate(const ModelParams& params) const;

  /// dt = trap_period / steps_per_period, stride giving at least
  /// samples_per_period samples per trap period.
  static IntegratorConfig for_trap(const ModelParams& params, double duration,
                                   std::uint64_t seed,
                                   std::size_t steps_per_period = 100,
                                   std::size_t samples_per_period = 16);
};

inline constexpr std::size_t kMinStepsPerTrapPeriod = 100;

/// Zero-mean Gaussian vector with covariance d_total*dt, using the symmetric
/// eigen-factorization. Eigenvalues in [-1e-9 trace, 0) are clamped.
Vector sample_kicks(const Matrix& d_total, double dt, RandomStream& rng,
                    std::size_t substeps = 1);

FieldResponse apply_mixing(const FieldResponse& full,
                           const MixingWeights& weights,
                           const ModelParams& params,
                           const AtomConfiguration& config);

struct StepOutcome {
  PhaseSpaceState state;
  double saturation_max = 0.0;        // at the pre-step configuration
  bool adiabaticity_violated = false;
};

// Symplectic Euler-Maruyama: the momentum is advanced with the pre-step
// response, then the position with the new momentum. Throws
// kNonFiniteState if the result is not finite.
StepOutcome step(const PhaseSpaceState& state, const ModelParams& params,
                 const MixingWeights& weights, const IntegratorConfig& cfg,
                 RandomStream& rng);

/// Sampled trajectory, stored column-wise (sample-major, atom-minor).
struct TrajectoryRecord {
  ModelParams params;
  MixingWeights weights;
  IntegratorConfig config;
  std::size_t n_atoms = 0;

  std::vector<double> times;
  std::vector<double> positions;
  std::vector<double> momenta;
  std::vector<double> saturation_max;       // max over the stride interval
  std::vector<std::uint8_t> adiabatic_flag; // any violation in the interval

  std::size_t adiabaticity_violations = 0;  // counted per step
  std::size_t saturation_breaches = 0;      // counted per step
  bool completed = true;
  std::string status = "ok";

  std::size_t size() const noexcept { return times.size(); }
  double position(std::size_t sample, std::size_t atom) const {
    return positions[sample * n_atoms + atom];
  }
  double momentum(std::size_t sample, std::size_t atom) const {
    return momenta[sample * n_atoms + atom];
  }
  PhaseSpaceState state(std::size_t sample) const;
  void append(const PhaseSpaceState& s, double sat_max, bool flag);
};

TrajectoryRecord run_trajectory(const PhaseSpaceState& initial,
                                const ModelParams& params,
                                const MixingWeights& weights,
                                const IntegratorConfig& cfg);

/// Positions uniform over one wavelength, momenta Gaussian at
/// `temperature` (units hbar*gamma; default is the Doppler temperature).
PhaseSpaceState random_initial_state(const ModelParams& params,
                                     std::uint64_t seed,
                                     double temperature = 1.0);

// CSV with '#' header lines carrying the parameter snapshot.
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record);
TrajectoryRecord read_trajectory_csv(std::istream& in);

}  // namespace cavity
