#include "cavity/harness.hpp"

#include "cavity/errors.hpp"
#include "cavity/format.hpp"
#include "cavity/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#ifndef CAVITY_VERSION
#define CAVITY_VERSION "unknown"
#endif

namespace cavity {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

double observable_value(const CellResult& c, Observable obs) {
  if (!c.ok) return std::numeric_limits<double>::quiet_NaN();
  switch (obs) {
    case Observable::kS: return c.s;
    case Observable::kNoise: return c.noise;
    case Observable::kTemperature: return c.temperature;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string grid_file_name(Observable obs, double delta_a) {
  return observable_name(obs) + "_dA" + format_double(delta_a) + ".dat";
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mean_rank;
    i = j + 1;
  }
  return r;
}

}  // namespace

ModelParams CellSpec::params() const {
  ModelParams p;
  p.kappa = kappa;
  p.g0 = g0;
  p.delta_a = delta_a;
  p.n_atoms = n_atoms;
  p.recoil_ratio = recoil_ratio;
  p.u2bar = u2bar;
  p.validate();
  return with_saturation(with_cooling_detuning(p), target_sat);
}

IntegratorConfig CellSpec::integrator(std::uint64_t trajectory_seed) const {
  const ModelParams p = params();
  IntegratorConfig cfg = IntegratorConfig::for_trap(
      p, duration, trajectory_seed, steps_per_period, samples_per_period);
  if (dt > 0.0) {
    // Keep the same physical sampling interval when dt is overridden.
    const double sample_dt = cfg.dt * static_cast<double>(cfg.sample_stride);
    cfg.dt = dt;
    cfg.sample_stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(sample_dt / dt)));
  }
  cfg.noise_substeps = noise_substeps;
  cfg.validate(p);
  return cfg;
}

std::uint64_t trajectory_seed(std::uint64_t cell_seed, std::size_t index) {
  return derive_seed(cell_seed, index);
}

TrajectoryRecord simulate_trajectory(const CellSpec& spec, std::size_t index) {
  spec.weights.validate();
  const ModelParams params = spec.params();
  const std::uint64_t seed = trajectory_seed(spec.seed, index);
  const PhaseSpaceState init = random_initial_state(
      params, derive_seed(seed, 0), spec.initial_temperature);
  return run_trajectory(init, params, spec.weights,
                        spec.integrator(derive_seed(seed, 1)));
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

CellResult run_cell(const CellSpec& spec, std::size_t workers) {
  CellResult out;
  try {
    if (spec.seeds < 1) {
      throw Error(ErrorCode::kInvalidArgument, "seeds must be >= 1");
    }
    spec.weights.validate();
    const ModelParams params = spec.params();
    trap_omega(params);  // kNotTrapped-style failure before any work
    AnalysisOptions options;
    options.transient_fraction = spec.transient_fraction;

    std::vector<CorrelationAccumulator> acc(spec.seeds,
                                            CorrelationAccumulator(spec.n_atoms));
    std::vector<std::string> failure(spec.seeds);
    std::vector<std::size_t> adiab(spec.seeds, 0), breaches(spec.seeds, 0);
    parallel_for(spec.seeds, workers, [&](std::size_t j) {
      try {
        const TrajectoryRecord rec = simulate_trajectory(spec, j);
        adiab[j] = rec.adiabaticity_violations;
        breaches[j] = rec.saturation_breaches;
        if (!rec.completed) {
          failure[j] = "trajectory " + std::to_string(j) + ": " + rec.status;
          return;
        }
        acc[j].add(rec, options);
      } catch (const std::exception& e) {
        failure[j] = "trajectory " + std::to_string(j) + ": " + e.what();
      }
    });
    for (std::size_t j = 0; j < spec.seeds; ++j) {
      out.adiabaticity_violations += adiab[j];
      out.saturation_breaches += breaches[j];
      if (!failure[j].empty() && out.reason.empty()) out.reason = failure[j];
    }
    if (!out.reason.empty()) return out;
    for (std::size_t j = 1; j < spec.seeds; ++j) acc[0].merge(acc[j]);
    out.report = acc[0].report();
    out.s = out.report.s;
    out.noise = out.report.noise_strength;
    out.temperature = out.report.mean_temperature;
    out.usable = out.report.usable;
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.reason = e.what();
  }
  return out;
}

std::vector<double> ScanGrid::log_axis(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi >= lo) || n < 1 || (n > 1 && hi == lo)) {
    throw Error(ErrorCode::kInvalidArgument, "bad log axis");
  }
  std::vector<double> axis(n);
  if (n == 1) {
    axis[0] = lo;
    return axis;
  }
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    axis[i] = lo * std::exp(step * static_cast<double>(i));
  axis[n - 1] = hi;
  return axis;
}

ScanGrid ScanGrid::defaults() {
  ScanGrid g;
  g.kappa = log_axis(1.0 / 50.0, 5.0, 12);
  g.g0 = log_axis(1.0, 100.0, 12);
  g.delta_a = {-50.0, -100.0, -500.0, -1000.0, -5000.0, -1.0e4};
  return g;
}

void ScanGrid::validate() const {
  auto increasing = [](const std::vector<double>& v) {
    if (v.empty()) return false;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] > v[i - 1])) return false;
    return true;
  };
  if (!increasing(kappa) || !increasing(g0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "scan axes must be non-empty and strictly increasing");
  }
  if (delta_a.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no delta_a values");
  }
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t index) {
  return master + static_cast<std::uint64_t>(index) * kGolden;
}

ScanResult scan(const ScanGrid& grid, const CellSpec& base,
                std::size_t workers) {
  grid.validate();
  ScanResult result;
  result.grid = grid;
  const std::size_t per_slice = grid.cells_per_slice();
  const std::size_t total = per_slice * grid.delta_a.size();
  std::vector<CellResult> flat(total);
  parallel_for(total, workers, [&](std::size_t idx) {
    const std::size_t slice = idx / per_slice;
    const std::size_t row = (idx % per_slice) / grid.kappa.size();
    const std::size_t col = idx % grid.kappa.size();
    CellSpec spec = base;
    spec.delta_a = grid.delta_a[slice];
    spec.g0 = grid.g0[row];
    spec.kappa = grid.kappa[col];
    spec.seed = cell_seed(base.seed, idx);
    flat[idx] = run_cell(spec, 1);
  });
  result.cells.resize(grid.delta_a.size());
  for (std::size_t s = 0; s < grid.delta_a.size(); ++s) {
    result.cells[s].assign(
        std::make_move_iterator(flat.begin() + static_cast<std::ptrdiff_t>(s * per_slice)),
        std::make_move_iterator(flat.begin() + static_cast<std::ptrdiff_t>((s + 1) * per_slice)));
  }
  return result;
}

std::string observable_name(Observable obs) {
  switch (obs) {
    case Observable::kS: return "S";
    case Observable::kNoise: return "noise";
    case Observable::kTemperature: return "T";
  }
  return "?";
}

void write_grid(std::ostream& out, const ScanResult& result, std::size_t slice,
                Observable obs) {
  const ScanGrid& g = result.grid;
  out << kUnitHeader << '\n';
  out << "# observable = " << observable_name(obs) << '\n';
  out << "# delta_a = " << format_double(g.delta_a.at(slice)) << '\n';
  out << "# rows: g0 = " << join(g.g0) << '\n';
  out << "# cols: kappa = " << join(g.kappa) << '\n';
  const auto& cells = result.cells.at(slice);
  for (std::size_t r = 0; r < g.g0.size(); ++r) {
    for (std::size_t c = 0; c < g.kappa.size(); ++c) {
      if (c) out << ' ';
      out << format_double(observable_value(cells[r * g.kappa.size() + c], obs));
    }
    out << '\n';
  }
}

std::string axis_name(MixingAxis axis) {
  switch (axis) {
    case MixingAxis::kForce: return "y_force";
    case MixingAxis::kFriction: return "y_friction";
    case MixingAxis::kDiffusion: return "y_diffusion";
  }
  return "?";
}

MixingAxis parse_axis(const std::string& name) {
  if (name == "force" || name == "y_force" || name == "F") return MixingAxis::kForce;
  if (name == "friction" || name == "y_friction" || name == "beta")
    return MixingAxis::kFriction;
  if (name == "diffusion" || name == "y_diffusion" || name == "D")
    return MixingAxis::kDiffusion;
  throw Error(ErrorCode::kInvalidArgument, "unknown mixing axis: " + name);
}

std::vector<AblationRow> ablate(const CellSpec& base, MixingAxis axis,
                                std::size_t steps, std::size_t workers) {
  if (steps < 2) {
    throw Error(ErrorCode::kInvalidArgument, "ablation needs >= 2 steps");
  }
  std::vector<AblationRow> rows(steps);
  parallel_for(steps, workers, [&](std::size_t i) {
    const double y = static_cast<double>(i) / static_cast<double>(steps - 1);
    CellSpec spec = base;
    spec.weights = MixingWeights{};
    switch (axis) {
      case MixingAxis::kForce: spec.weights.y_force = y; break;
      case MixingAxis::kFriction: spec.weights.y_friction = y; break;
      case MixingAxis::kDiffusion: spec.weights.y_diffusion = y; break;
    }
    rows[i].y = y;
    rows[i].cell = run_cell(spec, 1);
  });
  return rows;
}

void write_ablation_table(std::ostream& out, MixingAxis axis,
                          const std::vector<AblationRow>& rows) {
  out << kUnitHeader << '\n';
  out << "# " << axis_name(axis) << " S noise T usable\n";
  for (const auto& r : rows) {
    out << format_double(r.y) << ' ' << format_double(observable_value(r.cell, Observable::kS))
        << ' ' << format_double(observable_value(r.cell, Observable::kNoise)) << ' '
        << format_double(observable_value(r.cell, Observable::kTemperature)) << ' '
        << (r.cell.ok ? (r.cell.usable ? "1" : "0") : "nan") << '\n';
  }
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "spearman needs paired samples");
  }
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

Manifest cell_manifest(const CellSpec& s) {
  return {
      {"seed", std::to_string(s.seed)},
      {"kappa", format_double(s.kappa)},
      {"g0", format_double(s.g0)},
      {"delta-a", format_double(s.delta_a)},
      {"atoms", std::to_string(s.n_atoms)},
      {"seeds", std::to_string(s.seeds)},
      {"duration", format_double(s.duration)},
      {"dt", format_double(s.dt)},
      {"target-sat", format_double(s.target_sat)},
      {"y-force", format_double(s.weights.y_force)},
      {"y-friction", format_double(s.weights.y_friction)},
      {"y-diffusion", format_double(s.weights.y_diffusion)},
      {"recoil-ratio", format_double(s.recoil_ratio)},
      {"u2bar", format_double(s.u2bar)},
      {"steps-per-period", std::to_string(s.steps_per_period)},
      {"samples-per-period", std::to_string(s.samples_per_period)},
      {"transient", format_double(s.transient_fraction)},
      {"initial-temperature", format_double(s.initial_temperature)},
      {"noise-substeps", std::to_string(s.noise_substeps)},
  };
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  for (const auto& [k, v] : manifest) out << k << " = " << v << '\n';
}

std::vector<std::filesystem::path> write_scan_outputs(
    const std::filesystem::path& out_dir, const ScanResult& result,
    const CellSpec& base) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const ScanGrid& g = result.grid;
  std::vector<fs::path> written;
  constexpr Observable kAll[] = {Observable::kS, Observable::kNoise,
                                 Observable::kTemperature};
  for (std::size_t s = 0; s < g.delta_a.size(); ++s) {
    for (Observable obs : kAll) {
      const fs::path path = out_dir / grid_file_name(obs, g.delta_a[s]);
      std::ofstream f(path);
      if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
      write_grid(f, result, s, obs);
      written.push_back(path);
    }
  }

  const fs::path log_path = out_dir / "scan.log";
  {
    std::ofstream log(log_path);
    if (!log) throw Error(ErrorCode::kIo, "cannot write " + log_path.string());
    std::size_t failed = 0;
    const std::size_t per_slice = g.cells_per_slice();
    for (std::size_t s = 0; s < g.delta_a.size(); ++s) {
      for (std::size_t i = 0; i < per_slice; ++i) {
        const CellResult& c = result.cells[s][i];
        const std::size_t row = i / g.kappa.size(), col = i % g.kappa.size();
        std::ostringstream where;
        where << "delta_a=" << format_double(g.delta_a[s])
              << " g0=" << format_double(g.g0[row])
              << " kappa=" << format_double(g.kappa[col]);
        if (!c.ok) {
          ++failed;
          log << "FAILED " << where.str() << ": " << c.reason << '\n';
        } else if (c.adiabaticity_violations || c.saturation_breaches) {
          log << "WARN " << where.str()
              << ": adiabaticity_violations=" << c.adiabaticity_violations
              << " saturation_breaches=" << c.saturation_breaches << '\n';
        }
      }
    }
    log << "cells=" << per_slice * g.delta_a.size() << " failed=" << failed
        << '\n';
  }
  written.push_back(log_path);

  const fs::path manifest_path = out_dir / "manifest.txt";
  {
    std::ofstream m(manifest_path);
    if (!m) throw Error(ErrorCode::kIo, "cannot write " + manifest_path.string());
    m << kUnitHeader << '\n';
    m << "# version = " << version_string() << '\n';
    Manifest entries = cell_manifest(base);
    entries.erase(std::remove_if(entries.begin(), entries.end(),
                                 [](const auto& kv) {
                                   return kv.first == "kappa" || kv.first == "g0" ||
                                          kv.first == "delta-a";
                                 }),
                  entries.end());
    entries.emplace_back("kappa-values", join(g.kappa));
    entries.emplace_back("g0-values", join(g.g0));
    entries.emplace_back("delta-a-values", join(g.delta_a));
    write_manifest(m, entries);
    const std::size_t per_slice = g.cells_per_slice();
    for (std::size_t s = 0; s < g.delta_a.size(); ++s) {
      for (std::size_t i = 0; i < per_slice; ++i) {
        const std::size_t idx = s * per_slice + i;
        m << "# cell " << idx << ": seed=" << cell_seed(base.seed, idx)
          << " row=" << i / g.kappa.size() << " col=" << i % g.kappa.size()
          << " files=" << grid_file_name(Observable::kS, g.delta_a[s]) << ','
          << grid_file_name(Observable::kNoise, g.delta_a[s]) << ','
          << grid_file_name(Observable::kTemperature, g.delta_a[s]) << '\n';
      }
    }
  }
  written.push_back(manifest_path);
  return written;
}

std::string version_string() { return CAVITY_VERSION; }

}  // namespace cavity
