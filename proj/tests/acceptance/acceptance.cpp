// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and run
// designs are fixed here; change them only with a reason.

#include "cavity/harness.hpp"
#include "cavity/model.hpp"
#include "cavity/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace cavity;

namespace {

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail, double seconds) {
  std::printf("[%s] %-24s %s (%.0f s)\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class F>
void criterion(const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail += std::string(" exception: ") + e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(name, ok, detail, s);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ModelParams pumped(ModelParams p, double sat) {
  return with_saturation(with_cooling_detuning(p), sat);
}

ModelParams point(double kappa, double g0, double delta_a, std::size_t n) {
  ModelParams p;
  p.kappa = kappa;
  p.g0 = g0;
  p.delta_a = delta_a;
  p.n_atoms = n;
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

CellSpec improved_cell(std::size_t atoms, std::size_t seeds) {
  CellSpec s;
  s.kappa = 0.1;
  s.g0 = 10.0;
  s.delta_a = -1.0e4;
  s.n_atoms = atoms;
  s.seeds = seeds;
  return s;
}

}  // namespace

int main() {
  std::printf("cavitysim %s acceptance, %zu worker(s)\n", version_string().c_str(), workers());

  criterion("steady-state", [](std::string& d) {
    double worst = 0.0;
    const auto grid = oracle_grid();
    for (const auto& p : grid) worst = std::max(worst, steady_state_mismatch(p));
    d = fmt("max rel mismatch %.2e over %zu points (tol 1e-8)", worst, grid.size());
    return grid.size() == 20 && worst < 1e-8;
  });

  criterion("force-potential", [](std::string& d) {
    const std::vector<ModelParams> points{
        garching_point(2), improved_point(2), point(1.0, 30.0, -1e3, 3),
        point(0.02, 1.0, -100.0, 1), point(0.5, 30.0, -5e3, 4)};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-kPi, 3.0 * kPi);
    double worst = 0.0;
    for (const auto& base : points) {
      const ModelParams p = pumped(base, 0.05);
      for (int i = 0; i < 100; ++i) {
        AtomConfiguration c{Vector(static_cast<Eigen::Index>(p.n_atoms))};
        for (Eigen::Index k = 0; k < c.positions.size(); ++k) c.positions[k] = u(rng);
        worst = std::max(worst, force_gradient_mismatch(p, c));
      }
    }
    d = fmt("max rel deviation %.2e over 5 x 100 configurations (tol 1e-6)", worst);
    return worst < 1e-6;
  });

  criterion("friction", [](std::string& d) {
    const FrictionCheck diag = diagonal_friction_check();
    const FrictionCheck cross = cross_friction_check();
    d = fmt("diagonal %.2e (tol 0.02), cross beta_12 %.2e (tol 0.05)", diag.rel_error(),
            cross.rel_error());
    return diag.rel_error() < 0.02 && cross.rel_error() < 0.05;
  });

  criterion("matrix-structure", [](std::string& d) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-kPi, 3.0 * kPi);
    bool sym = true, psd = true;
    double rank = 0.0;
    for (const auto& base : {garching_point(3), improved_point(2), point(0.5, 30.0, -5e3, 4)}) {
      const ModelParams p = pumped(base, 0.05);
      for (int i = 0; i < 50; ++i) {
        AtomConfiguration c{Vector(static_cast<Eigen::Index>(p.n_atoms))};
        for (Eigen::Index k = 0; k < c.positions.size(); ++k) c.positions[k] = u(rng);
        const StructureCheck s = structure_check(p, c);
        sym = sym && s.friction_symmetric && s.diffusion_symmetric;
        psd = psd && s.diffusion_psd;
        rank = std::max(rank, s.rank1_ratio);
      }
    }
    const ExpansionCheck e = expansion_check();
    const bool slopes = std::abs(e.beta_slope - 4.0) < 0.5 && std::abs(e.diff_slope - 4.0) < 0.5;
    d = fmt("symmetric %s, PSD %s, rank-1 ratio %.1e (tol 1e-10), residual slopes %.2f/%.2f "
            "(4 +- 0.5), beta1 %.1e D1 %.1e (tol 0.01)",
            sym ? "yes" : "no", psd ? "yes" : "no", rank, e.beta_slope, e.diff_slope, e.beta1_rel,
            e.d1_rel);
    return sym && psd && rank < 1e-10 && slopes && e.beta1_rel < 0.01 && e.d1_rel < 0.01;
  });

  criterion("correlation-emergence", [](std::string& d) {
    const CellResult good = run_cell(improved_cell(2, 8), workers());
    CellSpec g;
    g.kappa = 0.5;
    g.g0 = 5.0;
    g.delta_a = -50.0;
    g.seeds = 8;
    const CellResult garching = run_cell(g, workers());
    d = fmt("improved S = %.1f usable %s (need S > 10); Garching S = %.2f (need |S| < 5)", good.s,
            good.usable ? "yes" : "no", garching.s);
    return good.ok && garching.ok && good.usable && good.s > 10.0 && std::abs(garching.s) < 5.0;
  });

  criterion("ablation", [](std::string& d) {
    CellSpec base;
    base.kappa = 0.5;
    base.g0 = 30.0;
    base.delta_a = -5000.0;
    base.seeds = 16;
    const std::size_t steps = 11;
    const auto beta = ablate(base, MixingAxis::kFriction, steps, workers());
    const auto force = ablate(base, MixingAxis::kForce, steps, workers());
    std::vector<double> y, sb, sf;
    bool ok = true;
    for (std::size_t i = 0; i < steps; ++i) {
      ok = ok && beta[i].cell.ok && force[i].cell.ok;
      y.push_back(beta[i].y);
      sb.push_back(beta[i].cell.s);
      sf.push_back(force[i].cell.s);
    }
    const double rho_b = spearman(y, sb), rho_f = spearman(y, sf);
    const auto [fmin, fmax] = std::minmax_element(sf.begin(), sf.end());
    d = fmt("y_beta: S(0) = %.1f (need < 5), S(1) = %.1f, spearman %.2f (need > 0.8); "
            "y_F: spearman %.2f (need |.| < 0.5), S in [%.1f, %.1f]",
            sb.front(), sb.back(), rho_b, rho_f, *fmin, *fmax);
    return ok && sb.front() < 5.0 && rho_b > 0.8 && std::abs(rho_f) < 0.5;
  });

  criterion("cooling", [](std::string& d) {
    // kappa trend: one decade, single atom, good coupling
    const std::vector<double> kappas{0.02, 0.05, 0.1, 0.2};
    std::vector<double> t;
    for (double k : kappas) {
      CellSpec s = improved_cell(1, 4);
      s.kappa = k;
      const CellResult r = run_cell(s, workers());
      t.push_back(r.ok ? r.temperature : NAN);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < t.size(); ++i) monotone = monotone && t[i] > t[i - 1];
    const double ratio = t.back() / t.front();
    const bool cold = *std::max_element(t.begin(), t.end()) < 1.0;
    const bool trend = monotone && ratio >= 5.0 && ratio <= 20.0;

    // excess two-atom temperature coincides with S > 10 on a coarse grid
    ScanGrid grid;
    grid.kappa = {0.05, 0.2, 1.0, 5.0};
    grid.g0 = {3.0, 10.0, 30.0, 100.0};
    grid.delta_a = {-1.0e4};
    CellSpec one = improved_cell(1, 4), two = improved_cell(2, 4);
    const ScanResult r1 = scan(grid, one, workers());
    const ScanResult r2 = scan(grid, two, workers());
    std::size_t correlated = 0, covered = 0, agree = 0, n = 0;
    for (std::size_t i = 0; i < grid.cells_per_slice(); ++i) {
      const CellResult& a = r1.cells[0][i];
      const CellResult& b = r2.cells[0][i];
      if (!a.ok || !b.ok) continue;
      ++n;
      const bool corr = b.usable && b.s > 10.0;
      const bool excess = b.temperature > 2.0 * a.temperature;
      if (corr) ++correlated;
      if (corr && excess) ++covered;
      if (corr == excess) ++agree;
    }
    const bool overlap = n == grid.cells_per_slice() && correlated > 0 && covered == correlated &&
                         agree >= (4 * n + 4) / 5;
    d = fmt("T(kappa) = %.3f %.3f %.3f %.3f, ratio %.1f (need monotone, 5..20, all < 1); "
            "excess T in %zu/%zu correlated cells, agreement %zu/%zu (need all, >= 80%%)",
            t[0], t[1], t[2], t[3], ratio, covered, correlated, agree, n);
    return cold && trend && overlap;
  });

  criterion("trap-periods", [](std::string& d) {
    const double garching = trap_period_us(garching_point(2), 0.05);
    const double improved = trap_period_us(improved_point(2), 0.05);
    d = fmt("Garching %.3f us (2.9 +- 50%%), improved %.3f us (0.17 +- 50%%)", garching, improved);
    return std::abs(garching / 2.9 - 1.0) < 0.5 && std::abs(improved / 0.17 - 1.0) < 0.5;
  });

  criterion("engineering", [](std::string& d) {
    // identical specs, different worker counts, byte-identical files
    ScanGrid grid;
    grid.kappa = {0.5, 1.0};
    grid.g0 = {5.0, 10.0};
    grid.delta_a = {-50.0, -100.0};
    CellSpec base;
    base.seeds = 2;
    base.duration = 0.1 * kOneMillisecond;
    base.seed = 3;
    const auto tmp = std::filesystem::temp_directory_path();
    const auto a = tmp / "cavity_acceptance_a", b = tmp / "cavity_acceptance_b";
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
    const auto files = write_scan_outputs(a, scan(grid, base, workers()), base);
    write_scan_outputs(b, scan(grid, base, 1), base);
    bool identical = !files.empty();
    for (const auto& f : files) identical = identical && slurp(f) == slurp(b / f.filename());
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);

    // dt halving on the same Brownian path. The paths still dephase, so the
    // per-seed difference scatters by ~20%; 128 seeds bring the standard
    // error of the pooled change to ~1.5%.
    const std::size_t seeds = 128;
    CellSpec coarse = improved_cell(1, seeds);
    coarse.noise_substeps = 2;
    CellSpec fine = improved_cell(1, seeds);
    fine.steps_per_period = 200;
    std::vector<double> tc(seeds), tf(seeds);
    const AnalysisOptions opt{coarse.transient_fraction};
    parallel_for(seeds, workers(), [&](std::size_t j) {
      tc[j] = temperature(simulate_trajectory(coarse, j), opt)[0];
      tf[j] = temperature(simulate_trajectory(fine, j), opt)[0];
    });
    double mc = 0.0, mf = 0.0;
    for (std::size_t j = 0; j < seeds; ++j) mc += tc[j] / seeds, mf += tf[j] / seeds;
    double var = 0.0;
    for (std::size_t j = 0; j < seeds; ++j) {
      const double dj = (tc[j] - tf[j]) - (mc - mf);
      var += dj * dj / (seeds - 1);
    }
    const double change = std::abs(mc - mf) / mf;
    const double se = std::sqrt(var / seeds) / mf;
    d = fmt("%zu files byte-identical: %s; T(dt) = %.4f, T(dt/2) = %.4f, change %.1f%% +- %.1f%% "
            "(need < 5%%)",
            files.size(), identical ? "yes" : "no", mc, mf, 100 * change, 100 * se);
    return identical && change < 0.05;
  });

  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
