#pragma once

// Batch engine behind the CLI: single cells, (kappa, g0) scans per
// delta_a, and mixing-weight ablation sweeps.

#include "cavity/analysis.hpp"
#include "cavity/dynamics.hpp"
#include "cavity/params.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace cavity {

/// 1 ms at the Rb-85 linewidth, in units of 1/gamma.
inline constexpr double kOneMillisecond = 1.0e-3 * kGammaRb85;
inline constexpr double kDefaultTargetSaturation = 0.1;

struct CellSpec {
  double kappa = 0.1;
  double g0 = 10.0;
  double delta_a = -1.0e4;
  std::size_t n_atoms = 2;
  std::size_t seeds = 4;
  double duration = kOneMillisecond;
  double target_sat = kDefaultTargetSaturation;
  MixingWeights weights;
  std::uint64_t seed = 1;
  double recoil_ratio = 1.29e-3;
  double u2bar = 2.0 / 5.0;
  double dt = 0.0;                    // 0 selects trap_period / steps_per_period
  std::size_t steps_per_period = 100;
  std::size_t samples_per_period = 16;
  double transient_fraction = kDefaultTransientFraction;
  double initial_temperature = 1.0;
  std::size_t noise_substeps = 1;

  /// Physical parameters with delta_c = N U0 - kappa and eta set from
  /// target_sat.
  ModelParams params() const;
  IntegratorConfig integrator(std::uint64_t trajectory_seed) const;
};

struct CellResult {
  bool ok = false;
  std::string reason;       // failure description when !ok
  double s = 0.0;
  double noise = 0.0;
  double temperature = 0.0; // mean over atoms
  bool usable = false;
  CorrelationReport report;
  std::size_t adiabaticity_violations = 0;
  std::size_t saturation_breaches = 0;
};

/// Seed of trajectory `index` within a cell; the initial state and the
/// kick stream use separate derived seeds.
std::uint64_t trajectory_seed(std::uint64_t cell_seed, std::size_t index);

/// Trajectory `index` of a cell, exactly as run_cell integrates it.
TrajectoryRecord simulate_trajectory(const CellSpec& spec, std::size_t index);

/// Runs spec.seeds trajectories and pools them. Never throws for physics
/// failures; they are reported through CellResult::ok / reason.
CellResult run_cell(const CellSpec& spec, std::size_t workers = 1);

/// Runs fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

struct ScanGrid {
  std::vector<double> kappa;
  std::vector<double> g0;
  std::vector<double> delta_a;

  static std::vector<double> log_axis(double lo, double hi, std::size_t n);
  static ScanGrid defaults();
  void validate() const;
  std::size_t cells_per_slice() const { return kappa.size() * g0.size(); }
};

/// Seed of cell `index` (slice-major, then g0 row, then kappa column).
std::uint64_t cell_seed(std::uint64_t master, std::size_t index);

struct ScanResult {
  ScanGrid grid;
  // cells[slice][row * kappa.size() + col], row indexes g0.
  std::vector<std::vector<CellResult>> cells;
};

/// `base` supplies everything but kappa, g0 and delta_a; its seed is the
/// master seed.
ScanResult scan(const ScanGrid& grid, const CellSpec& base,
                std::size_t workers = 1);

enum class Observable { kS, kNoise, kTemperature };
std::string observable_name(Observable obs);

/// Whitespace matrix, rows g0 and columns kappa, NaN for failed cells.
void write_grid(std::ostream& out, const ScanResult& result, std::size_t slice,
                Observable obs);

enum class MixingAxis { kForce, kFriction, kDiffusion };
std::string axis_name(MixingAxis axis);
MixingAxis parse_axis(const std::string& name);

struct AblationRow {
  double y = 0.0;
  CellResult cell;
};

/// Sweeps one weight over `steps` evenly spaced values from 0 to 1, the
/// other two held at 1. Every row reuses the base seed.
std::vector<AblationRow> ablate(const CellSpec& base, MixingAxis axis,
                                std::size_t steps, std::size_t workers = 1);

void write_ablation_table(std::ostream& out, MixingAxis axis,
                          const std::vector<AblationRow>& rows);

/// Spearman rank correlation; ties get mean ranks.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

/// Ordered key = value lines describing a run.
using Manifest = std::vector<std::pair<std::string, std::string>>;

Manifest cell_manifest(const CellSpec& spec);
void write_manifest(std::ostream& out, const Manifest& manifest);

inline constexpr const char* kUnitHeader =
    "# units: hbar = gamma = k_C = 1; times 1/gamma, positions 1/k_C, "
    "momenta hbar k_C, temperature hbar gamma, angles degrees";

/// Writes one grid file per delta_a and observable, scan.log and
/// manifest.txt into out_dir. Returns the paths written.
std::vector<std::filesystem::path> write_scan_outputs(
    const std::filesystem::path& out_dir, const ScanResult& result,
    const CellSpec& base);

std::string version_string();

}  // namespace cavity
