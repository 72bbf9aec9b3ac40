#include "cavity/analysis.hpp"

#include "cavity/errors.hpp"
#include "cavity/format.hpp"
#include "cavity/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace cavity {

namespace {

constexpr double kRadToDeg = 180.0 / kPi;

std::size_t first_retained(const TrajectoryRecord& r, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "transient fraction must lie in [0, 1)");
  }
  return static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(r.size())));
}

double checked_trap_omega(const ModelParams& params) {
  double omega = 0.0;
  try {
    omega = trap_omega(params);
  } catch (const Error& e) {
    throw Error(ErrorCode::kNotTrapped, e.what());
  }
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw Error(ErrorCode::kNotTrapped, "trap frequency is zero");
  }
  return omega;
}

}  // namespace

double fold_position(double x) {
  return x - kPi * std::floor((x + 0.5 * kPi) / kPi);
}

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w > 180.0) w -= 360.0;
  if (w <= -180.0) w += 360.0;
  return w;
}

double oscillator_phase(double x_folded, double p, double trap_omega,
                        double mass) {
  if (!(trap_omega > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "trap_omega must be > 0");
  }
  if (x_folded == 0.0 && p == 0.0) {
    throw Error(ErrorCode::kZeroAmplitude, "phase undefined at rest");
  }
  // + 0.0 turns -0.0 into +0.0 so atan2 never returns -pi
  const double quadrature = -p / (mass * trap_omega) + 0.0;
  return wrap_degrees(std::atan2(quadrature, x_folded) * kRadToDeg);
}

AngularHistogram AngularHistogram::full_circle(double width) {
  AngularHistogram h;
  h.lower = -180.0;
  h.upper = 180.0;
  h.counts.assign(static_cast<std::size_t>(std::lround(360.0 / width)), 0);
  return h;
}

AngularHistogram AngularHistogram::half_circle(double width) {
  AngularHistogram h;
  h.lower = 0.0;
  h.upper = 180.0;
  h.counts.assign(static_cast<std::size_t>(std::lround(180.0 / width)), 0);
  return h;
}

void AngularHistogram::add(double deg) {
  const double pos = (deg - lower) / bin_width();
  auto bin = static_cast<long>(std::floor(pos));
  bin = std::clamp<long>(bin, 0, static_cast<long>(counts.size()) - 1);
  ++counts[static_cast<std::size_t>(bin)];
  ++total;
}

void AngularHistogram::merge(const AngularHistogram& other) {
  if (other.counts.size() != counts.size() || other.lower != lower) {
    throw Error(ErrorCode::kInvalidArgument, "histogram layouts differ");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  total += other.total;
}

CorrelationAccumulator::CorrelationAccumulator(std::size_t n_atoms)
    : n_atoms_(n_atoms),
      sum_p2_(Vector::Zero(static_cast<Eigen::Index>(n_atoms))),
      phase_(n_atoms, AngularHistogram::full_circle()) {}

void CorrelationAccumulator::add(const TrajectoryRecord& r,
                                 const AnalysisOptions& options) {
  if (r.n_atoms != n_atoms_) {
    throw Error(ErrorCode::kInvalidArgument, "atom count mismatch");
  }
  const double omega = checked_trap_omega(r.params);
  mass_ = r.params.mass();
  const std::size_t start = first_retained(r, options.transient_fraction);
  std::vector<double> phi(n_atoms_);

  for (std::size_t i = start; i < r.size(); ++i) {
    for (std::size_t k = 0; k < n_atoms_; ++k) {
      sum_p2_[static_cast<Eigen::Index>(k)] += r.momentum(i, k) * r.momentum(i, k);
    }
    ++temperature_samples_;

    bool defined = true;
    for (std::size_t k = 0; k < n_atoms_ && defined; ++k) {
      const double xf = fold_position(r.position(i, k));
      if (xf == 0.0 && r.momentum(i, k) == 0.0) {
        defined = false;
      } else {
        phi[k] = oscillator_phase(xf, r.momentum(i, k), omega, mass_);
      }
    }
    if (!defined) {
      ++skips_;
      continue;
    }
    ++samples_;
    for (std::size_t k = 0; k < n_atoms_; ++k) {
      phase_[k].add(phi[k]);
      const double a = std::abs(phi[k]);
      const double dev = std::min(a, 180.0 - a);
      sum_noise_sq_ += dev * dev;
      ++noise_count_;
      for (std::size_t m = k + 1; m < n_atoms_; ++m) {
        const double d = wrap_degrees(phi[k] - phi[m]);
        diff_.add(d);
        abs_diff_.add(std::abs(d));
        const double dev90 = std::abs(d) - 90.0;
        sum_pair_sq_ += dev90 * dev90;
        ++pair_count_;
      }
    }
  }
  ++trajectories_;
}

void CorrelationAccumulator::merge(const CorrelationAccumulator& o) {
  if (o.n_atoms_ != n_atoms_) {
    throw Error(ErrorCode::kInvalidArgument, "atom count mismatch");
  }
  sum_pair_sq_ += o.sum_pair_sq_;
  pair_count_ += o.pair_count_;
  sum_noise_sq_ += o.sum_noise_sq_;
  noise_count_ += o.noise_count_;
  sum_p2_ += o.sum_p2_;
  if (o.trajectories_ > 0) mass_ = o.mass_;
  samples_ += o.samples_;
  temperature_samples_ += o.temperature_samples_;
  skips_ += o.skips_;
  trajectories_ += o.trajectories_;
  for (std::size_t k = 0; k < n_atoms_; ++k) phase_[k].merge(o.phase_[k]);
  diff_.merge(o.diff_);
  abs_diff_.merge(o.abs_diff_);
}

CorrelationReport CorrelationAccumulator::report() const {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CorrelationReport rep;
  rep.w = pair_count_ ? std::sqrt(sum_pair_sq_ / static_cast<double>(pair_count_))
                      : nan;
  rep.s = kFlatWidthDeg - rep.w;
  rep.w_noise = noise_count_
                    ? std::sqrt(sum_noise_sq_ / static_cast<double>(noise_count_))
                    : nan;
  rep.noise_strength = kFlatWidthDeg - rep.w_noise;
  rep.usable = rep.noise_strength <= kUsableNoiseDeg;
  rep.temperature = temperature_samples_
                        ? Vector(sum_p2_ / (mass_ * static_cast<double>(
                                                        temperature_samples_)))
                        : Vector::Constant(sum_p2_.size(), nan);
  rep.mean_temperature = rep.temperature.size() ? rep.temperature.mean() : nan;
  rep.samples = samples_;
  rep.zero_amplitude_skips = skips_;
  rep.trajectories = trajectories_;
  rep.phase_histograms = phase_;
  rep.phase_difference = diff_;
  rep.abs_phase_difference = abs_diff_;
  return rep;
}

CorrelationReport correlation_report(const TrajectoryRecord& record,
                                     const AnalysisOptions& options) {
  CorrelationAccumulator acc(record.n_atoms);
  acc.add(record, options);
  return acc.report();
}

CorrelationReport pooled_report(std::span<const TrajectoryRecord> records,
                                const AnalysisOptions& options) {
  if (records.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no trajectories to pool");
  }
  CorrelationAccumulator acc(records.front().n_atoms);
  for (const auto& r : records) acc.add(r, options);
  return acc.report();
}

Vector temperature(const TrajectoryRecord& record,
                   const AnalysisOptions& options) {
  const std::size_t start = first_retained(record, options.transient_fraction);
  if (start >= record.size()) {
    throw Error(ErrorCode::kInvalidArgument, "empty post-transient segment");
  }
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(record.n_atoms));
  for (std::size_t i = start; i < record.size(); ++i) {
    for (std::size_t k = 0; k < record.n_atoms; ++k) {
      sum[static_cast<Eigen::Index>(k)] +=
          record.momentum(i, k) * record.momentum(i, k);
    }
  }
  return sum / (record.params.mass() * static_cast<double>(record.size() - start));
}

std::string report_json(const CorrelationReport& rep) {
  // NaN is not valid JSON; one-atom runs have no S, reported as null.
  auto num = [](double v) -> nlohmann::ordered_json {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["units"] = "hbar = gamma = k_C = 1; angles in degrees; T in hbar*gamma";
  j["S"] = num(rep.s);
  j["W"] = num(rep.w);
  j["noise_strength"] = num(rep.noise_strength);
  j["W_noise"] = num(rep.w_noise);
  j["usable"] = rep.usable;
  j["mean_temperature"] = num(rep.mean_temperature);
  for (Eigen::Index k = 0; k < rep.temperature.size(); ++k) {
    j["temperature_" + std::to_string(k + 1)] = num(rep.temperature[k]);
  }
  j["samples"] = rep.samples;
  j["zero_amplitude_skips"] = rep.zero_amplitude_skips;
  j["trajectories"] = rep.trajectories;
  return j.dump(2);
}

void write_histogram_csv(std::ostream& out, const AngularHistogram& hist) {
  out << "bin_center_deg,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out << format_double(hist.bin_center(i)) << ',' << hist.counts[i] << '\n';
  }
}

}  // namespace cavity
