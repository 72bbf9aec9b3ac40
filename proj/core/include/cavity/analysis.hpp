#pragma once

// Observables extracted from sampled trajectories: folded coordinates,
// oscillator phases, phase-difference statistics and temperature.

#include "cavity/dynamics.hpp"
#include "cavity/params.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cavity {

/// RMS deviation of a flat |dphi| distribution from 90 degrees (90/sqrt 3).
inline constexpr double kFlatWidthDeg = 51.96;
inline constexpr double kUsableNoiseDeg = 10.0;
inline constexpr double kDefaultTransientFraction = 0.2;

/// Displacement from the nearest antinode, in [-pi/2, pi/2).
double fold_position(double x);

/// Wrap an angle in degrees into (-180, 180].
double wrap_degrees(double deg);

/// Phase in degrees, (-180, 180], of x(t) = A cos(omega t + phi) at the
/// sample instant. Throws kZeroAmplitude when x and p are both zero.
double oscillator_phase(double x_folded, double p, double trap_omega,
                        double mass);

struct AngularHistogram {
  double lower = -180.0;
  double upper = 180.0;
  std::vector<std::size_t> counts;
  std::size_t total = 0;

  static AngularHistogram full_circle(double bin_width_deg = 5.0);
  static AngularHistogram half_circle(double bin_width_deg = 5.0);

  double bin_width() const {
    return (upper - lower) / static_cast<double>(counts.size());
  }
  double bin_center(std::size_t i) const {
    return lower + (static_cast<double>(i) + 0.5) * bin_width();
  }
  void add(double deg);
  void merge(const AngularHistogram& other);
};

struct CorrelationReport {
  double s = 0.0;                 // kFlatWidthDeg - w (NaN for one atom)
  double w = 0.0;
  double noise_strength = 0.0;    // kFlatWidthDeg - w_noise
  double w_noise = 0.0;
  bool usable = false;            // noise_strength <= 10 deg
  Vector temperature;             // per atom, hbar*gamma
  double mean_temperature = 0.0;
  std::size_t samples = 0;        // retained post-transient samples
  std::size_t zero_amplitude_skips = 0;
  std::size_t trajectories = 0;
  std::vector<AngularHistogram> phase_histograms;  // one per atom
  AngularHistogram phase_difference;               // full circle
  AngularHistogram abs_phase_difference;           // [0, 180]
};

struct AnalysisOptions {
  double transient_fraction = kDefaultTransientFraction;
};

// Running sums for S, noise and temperature. Merging is associative, so a
// trajectory ensemble can be pooled in any grouping.
class CorrelationAccumulator {
 public:
  explicit CorrelationAccumulator(std::size_t n_atoms);

  /// Adds the post-transient samples of one trajectory. Throws kNotTrapped
  /// if the parameters give no trap frequency.
  void add(const TrajectoryRecord& record, const AnalysisOptions& options = {});
  void merge(const CorrelationAccumulator& other);
  CorrelationReport report() const;

 private:
  std::size_t n_atoms_;
  double sum_pair_sq_ = 0.0;
  std::size_t pair_count_ = 0;
  double sum_noise_sq_ = 0.0;
  std::size_t noise_count_ = 0;
  Vector sum_p2_;
  double mass_ = 1.0;
  std::size_t samples_ = 0;
  std::size_t temperature_samples_ = 0;
  std::size_t skips_ = 0;
  std::size_t trajectories_ = 0;
  std::vector<AngularHistogram> phase_;
  AngularHistogram diff_ = AngularHistogram::full_circle();
  AngularHistogram abs_diff_ = AngularHistogram::half_circle();
};

CorrelationReport correlation_report(const TrajectoryRecord& record,
                                     const AnalysisOptions& options = {});
CorrelationReport pooled_report(std::span<const TrajectoryRecord> records,
                                const AnalysisOptions& options = {});

/// <p_k^2>/M over the post-transient samples.
Vector temperature(const TrajectoryRecord& record,
                   const AnalysisOptions& options = {});

/// Flat key-value JSON text.
std::string report_json(const CorrelationReport& report);
/// Two columns: bin_center_deg,count
void write_histogram_csv(std::ostream& out, const AngularHistogram& hist);

}  // namespace cavity
