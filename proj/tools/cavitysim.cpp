// cavitysim: single runs, scans, ablation sweeps and the oracle suite.

#include "cavity/analysis.hpp"
#include "cavity/errors.hpp"
#include "cavity/format.hpp"
#include "cavity/harness.hpp"
#include "cavity/model.hpp"
#include "cavity/verification.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace cavity;

namespace {

struct Options {
  CellSpec cell;
  std::string out_dir;
  std::string input;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  // scan axes
  double kappa_min = 1.0 / 50.0, kappa_max = 5.0;
  double g0_min = 1.0, g0_max = 100.0;
  std::size_t grid_steps = 12;
  std::vector<double> kappa_values, g0_values;
  std::vector<double> delta_a_values = ScanGrid::defaults().delta_a;
  // ablation
  std::string axis = "friction";
  std::size_t ablate_steps = 6;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return f;
}

void print_cell(std::ostream& os, const CellResult& r) {
  if (!r.ok) {
    os << "failed: " << r.reason << '\n';
    return;
  }
  os << "S = " << format_double(r.s) << " deg, noise = " << format_double(r.noise)
     << " deg, T = " << format_double(r.temperature) << " hbar*gamma, usable = "
     << (r.usable ? "yes" : "no") << ", samples = " << r.report.samples << '\n';
}

int cmd_simulate(const Options& o) {
  const TrajectoryRecord rec = simulate_trajectory(o.cell, 0);
  if (o.out_dir.empty()) {
    write_trajectory_csv(std::cout, rec);
  } else {
    fs::create_directories(o.out_dir);
    auto f = open_out(fs::path(o.out_dir) / "trajectory.csv");
    write_trajectory_csv(f, rec);
    auto m = open_out(fs::path(o.out_dir) / "manifest.txt");
    m << kUnitHeader << "\n# version = " << version_string() << '\n';
    write_manifest(m, cell_manifest(o.cell));
    std::cerr << "wrote " << rec.size() << " samples to "
              << (fs::path(o.out_dir) / "trajectory.csv").string() << '\n';
  }
  if (!rec.completed) {
    std::cerr << "trajectory stopped early: " << rec.status << '\n';
    return 2;
  }
  return 0;
}

int cmd_analyze(const Options& o) {
  std::ifstream in(o.input);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + o.input);
  const TrajectoryRecord rec = read_trajectory_csv(in);
  AnalysisOptions opt;
  opt.transient_fraction = o.cell.transient_fraction;
  const CorrelationReport rep = correlation_report(rec, opt);
  const std::string json = report_json(rep);
  std::cout << json << '\n';
  if (!o.out_dir.empty()) {
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    open_out(dir / "report.json") << json << '\n';
    for (std::size_t k = 0; k < rep.phase_histograms.size(); ++k) {
      auto f = open_out(dir / ("phi" + std::to_string(k + 1) + ".csv"));
      write_histogram_csv(f, rep.phase_histograms[k]);
    }
    if (rec.n_atoms > 1) {
      auto f = open_out(dir / "dphi.csv");
      write_histogram_csv(f, rep.phase_difference);
      auto g = open_out(dir / "abs_dphi.csv");
      write_histogram_csv(g, rep.abs_phase_difference);
    }
  }
  return 0;
}

ScanGrid grid_from(const Options& o) {
  ScanGrid g;
  g.kappa = o.kappa_values.empty()
                ? ScanGrid::log_axis(o.kappa_min, o.kappa_max, o.grid_steps)
                : o.kappa_values;
  g.g0 = o.g0_values.empty() ? ScanGrid::log_axis(o.g0_min, o.g0_max, o.grid_steps)
                             : o.g0_values;
  g.delta_a = o.delta_a_values;
  g.validate();
  return g;
}

int cmd_scan(const Options& o) {
  const ScanGrid grid = grid_from(o);
  const fs::path dir = o.out_dir.empty() ? fs::path("scan_out") : fs::path(o.out_dir);
  std::cerr << "scanning " << grid.cells_per_slice() * grid.delta_a.size()
            << " cells on " << o.workers << " worker(s)\n";
  const ScanResult result = scan(grid, o.cell, o.workers);
  for (const auto& p : write_scan_outputs(dir, result, o.cell))
    std::cout << p.string() << '\n';
  return 0;
}

int cmd_cell(const Options& o) {
  const CellResult r = run_cell(o.cell, o.workers);
  print_cell(std::cout, r);
  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    open_out(fs::path(o.out_dir) / "report.json") << report_json(r.report) << '\n';
  }
  return r.ok ? 0 : 2;
}

int cmd_ablate(const Options& o) {
  const MixingAxis axis = parse_axis(o.axis);
  const auto rows = ablate(o.cell, axis, o.ablate_steps, o.workers);
  write_ablation_table(std::cout, axis, rows);
  std::vector<double> y, s;
  for (const auto& r : rows) {
    if (!r.cell.ok) continue;
    y.push_back(r.y);
    s.push_back(r.cell.s);
  }
  if (y.size() >= 2) {
    std::cout << "# spearman(" << axis_name(axis) << ", S) = "
              << format_double(spearman(y, s)) << '\n';
  }
  if (!o.out_dir.empty()) {
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    auto f = open_out(dir / ("ablation_" + axis_name(axis) + ".dat"));
    write_ablation_table(f, axis, rows);
    auto m = open_out(dir / "manifest.txt");
    m << kUnitHeader << "\n# version = " << version_string() << '\n';
    Manifest entries = cell_manifest(o.cell);
    entries.emplace_back("axis", o.axis);
    entries.emplace_back("steps", std::to_string(o.ablate_steps));
    write_manifest(m, entries);
  }
  return 0;
}

int cmd_verify() {
  const auto checks = run_verification();
  std::size_t width = 0;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS  " : "FAIL  ") << std::left
              << std::setw(static_cast<int>(width)) << c.name << "  " << c.detail
              << '\n';
    all = all && c.passed;
  }
  std::cout << (all ? "all checks passed" : "some checks FAILED") << '\n';
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical simulator of atoms in a driven standing-wave cavity"};
  app.set_version_flag("--version", version_string());
  app.set_config("--config", "", "key = value file; command-line flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();
  app.require_subcommand(1);

  Options o;
  CellSpec& c = o.cell;
  app.add_option("--kappa", c.kappa, "cavity decay rate (gamma)")->capture_default_str();
  app.add_option("--g0", c.g0, "peak coupling (gamma)")->capture_default_str();
  app.add_option("--delta-a", c.delta_a, "atom-pump detuning (gamma)")->capture_default_str();
  app.add_option("--atoms", c.n_atoms, "number of atoms")->capture_default_str();
  app.add_option("--duration", c.duration, "run length per trajectory (1/gamma)")
      ->capture_default_str();
  app.add_option("--dt", c.dt, "time step (1/gamma); 0 = trap period / steps-per-period")
      ->capture_default_str();
  app.add_option("--seed", c.seed, "master seed")->capture_default_str();
  app.add_option("--seeds", c.seeds, "trajectories per cell")->capture_default_str();
  app.add_option("--target-sat", c.target_sat, "trap-site saturation setting the pump")
      ->capture_default_str();
  app.add_option("--y-force", c.weights.y_force, "force mixing weight")->capture_default_str();
  app.add_option("--y-friction", c.weights.y_friction, "cross-friction weight")
      ->capture_default_str();
  app.add_option("--y-diffusion", c.weights.y_diffusion, "cross-diffusion weight")
      ->capture_default_str();
  app.add_option("--recoil-ratio", c.recoil_ratio, "omega_rec / gamma")->capture_default_str();
  app.add_option("--u2bar", c.u2bar, "angular emission factor")->capture_default_str();
  app.add_option("--steps-per-period", c.steps_per_period)->capture_default_str();
  app.add_option("--samples-per-period", c.samples_per_period)->capture_default_str();
  app.add_option("--transient", c.transient_fraction, "discarded leading fraction")
      ->capture_default_str();
  app.add_option("--initial-temperature", c.initial_temperature, "hbar*gamma")
      ->capture_default_str();
  app.add_option("--noise-substeps", c.noise_substeps)->capture_default_str();
  app.add_option("--out-dir", o.out_dir, "output directory");
  app.add_option("--workers", o.workers, "worker threads")->capture_default_str();

  app.add_option("--kappa-min", o.kappa_min)->capture_default_str();
  app.add_option("--kappa-max", o.kappa_max)->capture_default_str();
  app.add_option("--g0-min", o.g0_min)->capture_default_str();
  app.add_option("--g0-max", o.g0_max)->capture_default_str();
  app.add_option("--grid-steps", o.grid_steps, "points per log axis")->capture_default_str();
  app.add_option("--kappa-values", o.kappa_values, "explicit kappa axis");
  app.add_option("--g0-values", o.g0_values, "explicit g0 axis");
  app.add_option("--delta-a-values", o.delta_a_values, "detunings to scan");
  app.add_option("--axis", o.axis, "ablation axis: force, friction, diffusion")
      ->capture_default_str();
  app.add_option("--steps", o.ablate_steps, "ablation points from 0 to 1")
      ->capture_default_str();
  app.add_option("--input", o.input, "trajectory CSV for analyze");

  auto* simulate = app.add_subcommand("simulate", "one trajectory to CSV");
  auto* analyze = app.add_subcommand("analyze", "trajectory CSV to correlation report");
  auto* cell = app.add_subcommand("cell", "pooled report for one parameter point");
  auto* scan_cmd = app.add_subcommand("scan", "(kappa, g0) grids per delta_a");
  auto* ablate_cmd = app.add_subcommand("ablate", "sweep one mixing weight");
  auto* verify = app.add_subcommand("verify", "closed-form vs oracle checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(o);
    if (analyze->parsed()) {
      if (o.input.empty()) throw Error(ErrorCode::kInvalidArgument, "analyze needs --input");
      return cmd_analyze(o);
    }
    if (cell->parsed()) return cmd_cell(o);
    if (scan_cmd->parsed()) return cmd_scan(o);
    if (ablate_cmd->parsed()) return cmd_ablate(o);
    if (verify->parsed()) return cmd_verify();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
