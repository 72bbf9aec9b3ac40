#include "cavity/analysis.hpp"
#include "cavity/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <json.hpp>

#include <functional>
#include <random>
#include <sstream>

using namespace cavity;
using namespace cavity::testing;

namespace {

// Record whose atoms sit on x = A cos(phi), p = -M A omega sin(phi) with
// phases drawn by `phases(sample, atom)`.
TrajectoryRecord synthetic(std::size_t n_atoms, std::size_t samples,
                           const std::function<double(std::size_t, std::size_t)>& phases,
                           double amplitude = 0.1) {
  TrajectoryRecord r;
  r.params = pumped(improved_point(n_atoms), 0.1);
  r.n_atoms = n_atoms;
  const double omega = trap_omega(r.params);
  const double m = r.params.mass();
  for (std::size_t i = 0; i < samples; ++i) {
    PhaseSpaceState s{static_cast<double>(i), Vector(static_cast<Eigen::Index>(n_atoms)),
                      Vector(static_cast<Eigen::Index>(n_atoms))};
    for (std::size_t k = 0; k < n_atoms; ++k) {
      const double phi = phases(i, k) * kPi / 180.0;
      s.positions[static_cast<Eigen::Index>(k)] = amplitude * std::cos(phi);
      s.momenta[static_cast<Eigen::Index>(k)] = -m * amplitude * omega * std::sin(phi);
    }
    r.append(s, 0.0, false);
  }
  return r;
}

const AnalysisOptions kAll{0.0};

}  // namespace

TEST_CASE("fold_position") {
  CHECK(fold_position(0.0) == 0.0);
  CHECK(fold_position(0.3) == doctest::Approx(0.3));
  CHECK(fold_position(kPi + 0.2) == doctest::Approx(0.2));
  CHECK(fold_position(kPi - 0.2) == doctest::Approx(-0.2));
  CHECK(fold_position(-kPi - 0.4) == doctest::Approx(-0.4));
  CHECK(fold_position(10.0 * kPi + 1.0) == doctest::Approx(1.0));
  CHECK(fold_position(0.5 * kPi) == doctest::Approx(-0.5 * kPi));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    const double f = fold_position(x);
    CHECK(f >= -0.5 * kPi);
    CHECK(f < 0.5 * kPi);
    const double n = (x - f) / kPi;
    CHECK(std::abs(n - std::round(n)) < 1e-9);
  }
}

TEST_CASE("wrap_degrees") {
  CHECK(wrap_degrees(180.0) == 180.0);
  CHECK(wrap_degrees(-180.0) == 180.0);
  CHECK(wrap_degrees(190.0) == doctest::Approx(-170.0));
  CHECK(wrap_degrees(-270.0) == doctest::Approx(90.0));
  CHECK(wrap_degrees(720.0 + 45.0) == doctest::Approx(45.0));
}

TEST_CASE("oscillator_phase") {
  const double omega = 2.0, m = 3.0;
  CHECK(oscillator_phase(0.1, 0.0, omega, m) == 0.0);
  CHECK(oscillator_phase(-0.1, 0.0, omega, m) == 180.0);
  CHECK(oscillator_phase(0.0, -1.0, omega, m) == doctest::Approx(90.0));
  CHECK(oscillator_phase(0.0, 1.0, omega, m) == doctest::Approx(-90.0));
  CHECK(oscillator_phase(0.1, -0.1 * m * omega, omega, m) == doctest::Approx(45.0));
  CHECK_THROWS_AS(oscillator_phase(0.0, 0.0, omega, m), Error);
  try {
    oscillator_phase(0.0, 0.0, omega, m);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kZeroAmplitude);
  }
  CHECK_THROWS_AS(oscillator_phase(0.1, 0.0, 0.0, m), Error);
}

TEST_CASE("phase of a free harmonic oscillator advances by omega t") {
  const double omega = 1.7, m = 2.0, a = 0.3, phi0 = 0.4;
  for (int i = 0; i < 50; ++i) {
    const double t = 0.05 * i;
    const double x = a * std::cos(omega * t + phi0);
    const double p = -m * a * omega * std::sin(omega * t + phi0);
    const double expect = wrap_degrees((omega * t + phi0) * 180.0 / kPi);
    CHECK(wrap_degrees(oscillator_phase(x, p, omega, m) - expect) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("S on synthetic phase distributions") {
  SUBCASE("uniform independent phases give S near zero") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-180.0, 180.0);
    std::vector<double> ph(2'000'000);
    for (double& v : ph) v = u(rng);
    const auto r = synthetic(2, 1'000'000, [&](std::size_t i, std::size_t k) { return ph[2 * i + k]; });
    const auto rep = correlation_report(r, kAll);
    CHECK(std::abs(rep.s) < 1.0);
    CHECK(std::abs(rep.noise_strength) < 1.0);
    CHECK(rep.usable);
    CHECK(rep.samples == 1'000'000);
  }
  SUBCASE("90 degree locking gives the full flat width") {
    const auto r = synthetic(2, 360, [](std::size_t i, std::size_t k) {
      return static_cast<double>(i) + (k == 0 ? 90.0 : 0.0);
    });
    const auto rep = correlation_report(r, kAll);
    CHECK(rep.w == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(rep.s == doctest::Approx(kFlatWidthDeg));
  }
  SUBCASE("+90 and -90 count alike") {
    const auto r = synthetic(2, 400, [](std::size_t i, std::size_t k) {
      return 0.9 * static_cast<double>(i) + (k == 0 ? (i % 2 ? 90.0 : -90.0) : 0.0);
    });
    CHECK(correlation_report(r, kAll).s == doctest::Approx(kFlatWidthDeg));
  }
  SUBCASE("in-phase locking gives S = flat width - 90") {
    const auto r = synthetic(2, 100, [](std::size_t i, std::size_t) { return 3.0 * static_cast<double>(i); });
    CHECK(correlation_report(r, kAll).s == doctest::Approx(kFlatWidthDeg - 90.0));
  }
  SUBCASE("phases pinned at 0 or 180 give the full noise strength") {
    const auto r = synthetic(2, 100, [](std::size_t i, std::size_t k) { return (i + k) % 2 ? 180.0 : 0.0; });
    const auto rep = correlation_report(r, kAll);
    CHECK(rep.noise_strength == doctest::Approx(kFlatWidthDeg));
    CHECK_FALSE(rep.usable);
  }
  SUBCASE("one atom has no S") {
    const auto r = synthetic(1, 100, [](std::size_t i, std::size_t) { return 7.0 * static_cast<double>(i); });
    const auto rep = correlation_report(r, kAll);
    CHECK(std::isnan(rep.s));
    CHECK(std::isfinite(rep.noise_strength));
  }
}

TEST_CASE("S invariances") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> jitter(0.0, 25.0);
  std::uniform_real_distribution<double> u(-180.0, 180.0);
  const std::size_t n = 5000;
  std::vector<double> ph(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    ph[3 * i] = u(rng);
    ph[3 * i + 1] = ph[3 * i] + 90.0 + jitter(rng);
    ph[3 * i + 2] = ph[3 * i] - 90.0 + jitter(rng);
  }
  const auto base = synthetic(3, n, [&](std::size_t i, std::size_t k) { return ph[3 * i + k]; });
  // pairs (1,2), (1,3) lock at 90, pair (2,3) at 180
  const double s = correlation_report(base, kAll).s;
  CHECK(s > 5.0);

  SUBCASE("common phase shift") {
    const auto r = synthetic(3, n, [&](std::size_t i, std::size_t k) { return ph[3 * i + k] + 33.0; });
    CHECK(correlation_report(r, kAll).s == doctest::Approx(s).epsilon(1e-9));
  }
  SUBCASE("atom relabelling") {
    const auto r = synthetic(3, n, [&](std::size_t i, std::size_t k) { return ph[3 * i + (2 - k)]; });
    CHECK(correlation_report(r, kAll).s == doctest::Approx(s).epsilon(1e-9));
  }
  SUBCASE("time reversal") {
    const auto r = synthetic(3, n, [&](std::size_t i, std::size_t k) { return -ph[3 * i + k]; });
    CHECK(correlation_report(r, kAll).s == doctest::Approx(s).epsilon(1e-9));
  }
  SUBCASE("translation by whole half wavelengths") {
    TrajectoryRecord r = base;
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t k = 0; k < 3; ++k) r.positions[i * 3 + k] += kPi * static_cast<double>(k + 2 * i % 5);
    CHECK(correlation_report(r, kAll).s == doctest::Approx(s).epsilon(1e-9));
  }
}

TEST_CASE("transient removal and pooling") {
  const auto r = synthetic(2, 100, [](std::size_t i, std::size_t k) {
    return i < 20 ? 0.0 : 5.0 * static_cast<double>(i) + (k ? 90.0 : 0.0);
  });
  const auto rep = correlation_report(r);  // default drops the first 20%
  CHECK(rep.samples == 80);
  CHECK(rep.s == doctest::Approx(kFlatWidthDeg));
  CHECK(rep.phase_difference.total == 80);
  CHECK(rep.abs_phase_difference.total == 80);
  CHECK(rep.phase_histograms.size() == 2);
  CHECK(rep.phase_histograms[1].total == 80);

  const std::vector<TrajectoryRecord> both{r, r};
  const auto pooled = pooled_report(both);
  CHECK(pooled.samples == 160);
  CHECK(pooled.trajectories == 2);
  CHECK(pooled.s == doctest::Approx(rep.s));

  CorrelationAccumulator a(2), b(2);
  a.add(r);
  b.add(r);
  a.merge(b);
  CHECK(a.report().w == pooled.w);
  CHECK_THROWS_AS(a.add(synthetic(3, 10, [](std::size_t, std::size_t) { return 1.0; })), Error);
  CHECK_THROWS_AS(correlation_report(r, AnalysisOptions{1.0}), Error);
}

TEST_CASE("zero-amplitude samples are skipped") {
  TrajectoryRecord r = synthetic(2, 10, [](std::size_t i, std::size_t k) { return 10.0 * i + 90.0 * k; });
  r.positions[0] = 0.0;
  r.momenta[0] = 0.0;
  const auto rep = correlation_report(r, kAll);
  CHECK(rep.zero_amplitude_skips == 1);
  CHECK(rep.samples == 9);
}

TEST_CASE("untrapped parameters are rejected") {
  TrajectoryRecord r = synthetic(2, 10, [](std::size_t i, std::size_t) { return 1.0 * i; });
  r.params.delta_a = 50.0;
  CHECK_THROWS_AS(correlation_report(r, kAll), Error);
}

TEST_CASE("temperature estimator") {
  TrajectoryRecord r;
  r.params = pumped(improved_point(2), 0.1);
  r.n_atoms = 2;
  std::mt19937_64 rng(6);
  const double t1 = 0.5, t2 = 3.0, m = r.params.mass();
  std::normal_distribution<double> p1(0.0, std::sqrt(m * t1)), p2(0.0, std::sqrt(m * t2));
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    PhaseSpaceState s{1.0 * i, Vector::Zero(2), Vector(2)};
    s.momenta << p1(rng), p2(rng);
    r.append(s, 0.0, false);
  }
  const Vector t = temperature(r, kAll);
  CHECK(std::abs(t[0] - t1) < 5.0 * t1 * std::sqrt(2.0 / n));
  CHECK(std::abs(t[1] - t2) < 5.0 * t2 * std::sqrt(2.0 / n));
  CHECK(temperature(r)[1] == doctest::Approx(correlation_report(r).temperature[1]));
}

TEST_CASE("histograms") {
  auto h = AngularHistogram::full_circle();
  CHECK(h.counts.size() == 72);
  CHECK(h.bin_center(0) == doctest::Approx(-177.5));
  h.add(-180.0);
  h.add(180.0);
  h.add(0.0);
  CHECK(h.counts.front() == 1);
  CHECK(h.counts.back() == 1);
  CHECK(h.counts[36] == 1);
  CHECK(h.total == 3);
  auto half = AngularHistogram::half_circle();
  CHECK_THROWS_AS(h.merge(half), Error);
  std::ostringstream out;
  write_histogram_csv(out, half);
  CHECK(out.str().rfind("bin_center_deg,count\n2.5,0\n", 0) == 0);
}

TEST_CASE("report JSON") {
  const auto r = synthetic(1, 20, [](std::size_t i, std::size_t) { return 9.0 * i; });
  const auto j = nlohmann::json::parse(report_json(correlation_report(r, kAll)));
  CHECK(j["S"].is_null());
  CHECK(j["trajectories"] == 1);
  CHECK(j["samples"] == 20);
  CHECK(j["temperature_1"].is_number());
}
