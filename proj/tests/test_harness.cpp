#include "cavity/harness.hpp"
#include "cavity/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace cavity;
using namespace cavity::testing;

namespace {

// Short Garching-point cell; a few thousand steps per trajectory.
CellSpec quick_cell() {
  CellSpec s;
  s.kappa = 0.5;
  s.g0 = 5.0;
  s.delta_a = -50.0;
  s.seeds = 2;
  s.duration = from_microseconds(30.0);
  return s;
}

bool same(const CellResult& a, const CellResult& b) {
  auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.ok == b.ok && eq(a.s, b.s) && eq(a.noise, b.noise) && eq(a.temperature, b.temperature) &&
         a.report.samples == b.report.samples;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("log_axis") {
  const auto a = ScanGrid::log_axis(0.02, 5.0, 12);
  REQUIRE(a.size() == 12);
  CHECK(a.front() == doctest::Approx(0.02));
  CHECK(a.back() == doctest::Approx(5.0));
  for (std::size_t i = 2; i < a.size(); ++i)
    CHECK(a[i] / a[i - 1] == doctest::Approx(a[1] / a[0]));
  CHECK(ScanGrid::log_axis(3.0, 3.0, 1) == std::vector<double>{3.0});
  CHECK_THROWS_AS(ScanGrid::log_axis(-1.0, 2.0, 4), Error);
}

TEST_CASE("grid validation and defaults") {
  const ScanGrid d = ScanGrid::defaults();
  CHECK_NOTHROW(d.validate());
  CHECK(d.cells_per_slice() == 144);
  CHECK(d.delta_a.size() == 6);
  ScanGrid bad = d;
  std::swap(bad.kappa[0], bad.kappa[1]);
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = d;
  bad.delta_a.clear();
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("seeds") {
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < 100; ++i) seen.insert(cell_seed(1, i));
  CHECK(seen.size() == 100);
  CHECK(trajectory_seed(5, 0) != trajectory_seed(5, 1));
  CHECK(trajectory_seed(5, 0) == trajectory_seed(5, 0));
}

TEST_CASE("cell spec") {
  CellSpec s = quick_cell();
  const ModelParams p = s.params();
  CHECK(p.delta_c == doctest::Approx(cooling_detuning(p)));
  CHECK(field_response(p, AtomConfiguration::antinodes(2)).saturation[0] ==
        doctest::Approx(s.target_sat).epsilon(1e-9));
  CHECK(s.integrator(3).dt == doctest::Approx(trap_period(p) / 100.0));
  s.steps_per_period = 50;
  CHECK_THROWS_AS(s.integrator(3), Error);
}

TEST_CASE("run_cell") {
  const CellSpec s = quick_cell();
  const CellResult a = run_cell(s, 1);
  REQUIRE(a.ok);
  CHECK(a.report.trajectories == 2);
  CHECK(std::isfinite(a.s));
  CHECK(a.temperature > 0.0);

  SUBCASE("worker count does not change the result") {
    CHECK(same(a, run_cell(s, 3)));
  }
  SUBCASE("pooled from the same trajectories as simulate_trajectory") {
    const std::vector<TrajectoryRecord> recs{simulate_trajectory(s, 0), simulate_trajectory(s, 1)};
    AnalysisOptions opt{s.transient_fraction};
    // run_cell merges per-trajectory sums, so only rounding differs
    CHECK(pooled_report(recs, opt).s == doctest::Approx(a.s).epsilon(1e-12));
  }
  SUBCASE("physics failures are reported, not thrown") {
    CellSpec blue = s;
    blue.delta_a = 50.0;
    CellResult r;
    CHECK_NOTHROW(r = run_cell(blue));
    CHECK_FALSE(r.ok);
    CHECK_FALSE(r.reason.empty());
    CellSpec zero = s;
    zero.seeds = 0;
    CHECK_FALSE(run_cell(zero).ok);
  }
}

TEST_CASE("scan") {
  CellSpec base = quick_cell();
  base.seeds = 1;
  ScanGrid g;
  g.kappa = {0.5, 1.0};
  g.g0 = {5.0};
  g.delta_a = {-50.0, 50.0};
  const ScanResult r = scan(g, base, 2);
  REQUIRE(r.cells.size() == 2);
  REQUIRE(r.cells[0].size() == 2);

  SUBCASE("a 1x1 scan cell equals run_cell with the derived seed") {
    CellSpec one = base;
    one.seed = cell_seed(base.seed, 1);
    one.kappa = 1.0;
    CHECK(same(r.cells[0][1], run_cell(one)));
  }
  SUBCASE("worker count and slice order do not matter") {
    CHECK(same(r.cells[0][0], scan(g, base, 1).cells[0][0]));
    CHECK(same(r.cells[0][1], scan(g, base, 1).cells[0][1]));
  }
  SUBCASE("blue slice fails with NaN sentinels") {
    CHECK_FALSE(r.cells[1][0].ok);
    std::ostringstream out;
    write_grid(out, r, 1, Observable::kS);
    const std::string text = out.str();
    CHECK(text.find("# observable = S") != std::string::npos);
    CHECK(text.find("# delta_a = 50") != std::string::npos);
    CHECK(text.find("nan nan\n") != std::string::npos);
  }
  SUBCASE("output files") {
    const auto dir = std::filesystem::temp_directory_path() / "cavity_test_scan";
    std::filesystem::remove_all(dir);
    const auto files = write_scan_outputs(dir, r, base);
    CHECK(files.size() == 8);
    CHECK(std::filesystem::exists(dir / "S_dA-50.dat"));
    CHECK(std::filesystem::exists(dir / "T_dA50.dat"));
    const std::string log = slurp(dir / "scan.log");
    CHECK(log.find("FAILED") != std::string::npos);
    const std::string manifest = slurp(dir / "manifest.txt");
    CHECK(manifest.find("kappa-values = 0.5 1") != std::string::npos);
    CHECK(manifest.find("delta-a-values = -50 50") != std::string::npos);
    // second write is byte-identical
    const auto again = std::filesystem::temp_directory_path() / "cavity_test_scan2";
    std::filesystem::remove_all(again);
    write_scan_outputs(again, r, base);
    for (const char* f : {"S_dA-50.dat", "noise_dA-50.dat", "scan.log", "manifest.txt"})
      CHECK(slurp(dir / f) == slurp(again / f));
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(again);
  }
}

TEST_CASE("ablation") {
  CellSpec base = quick_cell();
  base.seeds = 1;
  const auto rows = ablate(base, MixingAxis::kFriction, 3);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].y == 0.0);
  CHECK(rows[1].y == 0.5);
  CHECK(rows[2].y == 1.0);
  CHECK(same(rows[2].cell, run_cell(base)));
  std::ostringstream out;
  write_ablation_table(out, MixingAxis::kFriction, rows);
  CHECK(out.str().find("# y_friction S noise T usable") != std::string::npos);
  CHECK_THROWS_AS(ablate(base, MixingAxis::kForce, 1), Error);
  CHECK(parse_axis("diffusion") == MixingAxis::kDiffusion);
  CHECK(parse_axis(axis_name(MixingAxis::kForce)) == MixingAxis::kForce);
  CHECK_THROWS_AS(parse_axis("colour"), Error);
}

TEST_CASE("spearman") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 1, 0, -3}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 2, 3}, {5, 5, 5}) == 0.0);
  // ties get mean ranks: ranks (1, 2.5, 2.5, 4) vs (1, 2, 3, 4)
  CHECK(spearman({1, 2, 2, 3}, {1, 2, 3, 4}) == doctest::Approx(4.5 / std::sqrt(4.5 * 5.0)));
  CHECK_THROWS_AS(spearman({1}, {1}), Error);
}

TEST_CASE("manifest") {
  const CellSpec s = quick_cell();
  const Manifest m = cell_manifest(s);
  std::set<std::string> keys;
  for (const auto& [k, v] : m) keys.insert(k);
  for (const char* k : {"seed", "kappa", "g0", "delta-a", "atoms", "seeds", "duration", "dt",
                        "target-sat", "y-force", "y-friction", "y-diffusion", "noise-substeps"})
    CHECK(keys.count(k) == 1);
  std::ostringstream out;
  write_manifest(out, m);
  CHECK(out.str().find("kappa = 0.5\n") != std::string::npos);
  CHECK(!version_string().empty());
}
