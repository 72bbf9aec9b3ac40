#include "cavity/verification.hpp"

#include "cavity/format.hpp"
#include "cavity/model.hpp"
#include "cavity/oracles.hpp"
#include "cavity/small_oscillation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace cavity {

namespace {

constexpr double kOracleSaturation = 0.05;

ModelParams pumped(double kappa, double g0, double delta_a, std::size_t n) {
  ModelParams p;
  p.kappa = kappa;
  p.g0 = g0;
  p.delta_a = delta_a;
  p.n_atoms = n;
  return with_saturation(with_cooling_detuning(p), kOracleSaturation);
}

AtomConfiguration random_config(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, kWavelength);
  AtomConfiguration c{Vector(static_cast<Eigen::Index>(n))};
  for (Eigen::Index k = 0; k < c.positions.size(); ++k) c.positions[k] = u(rng);
  return c;
}

// Window average of (beta(x(t)) v)_atom by the trapezoid rule.
double averaged_friction_force(const ModelParams& p, const DraggedAtomResult& r,
                               Eigen::Index atom) {
  constexpr int kNodes = 2001;
  double sum = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    const double t = r.window_begin + (r.window_end - r.window_begin) *
                                          static_cast<double>(i) / (kNodes - 1);
    const AtomConfiguration c{r.positions_at(t)};
    const double w = (i == 0 || i == kNodes - 1) ? 0.5 : 1.0;
    sum += w * (friction_matrix(p, c) * r.velocity)[atom];
  }
  return sum / (kNodes - 1);
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

std::vector<OraclePoint> oracle_grid() {
  const double detunings[] = {-50.0, -100.0, -1.0e3, -1.0e4};
  const std::pair<double, double> couplings[] = {
      {0.02, 1.0}, {0.1, 10.0}, {0.5, 5.0}, {1.0, 30.0}, {5.0, 100.0}};
  std::mt19937_64 rng(20240611);
  std::vector<OraclePoint> grid;
  std::size_t i = 0;
  for (double da : detunings) {
    for (const auto& [kappa, g0] : couplings) {
      const std::size_t n = 1 + (i++ % 3);
      OraclePoint pt;
      pt.params = pumped(kappa, g0, da, n);
      pt.config = random_config(n, rng);
      pt.label = "kappa=" + format_double(kappa) + " g0=" + format_double(g0) +
                 " dA=" + format_double(da) + " N=" + std::to_string(n);
      grid.push_back(std::move(pt));
    }
  }
  return grid;
}

double steady_state_mismatch(const OraclePoint& pt) {
  const auto& p = pt.params;
  const InternalState closed = steady_internal(p, pt.config);
  const MeanFieldState ode =
      ode_steady_state(p, pt.config, 50.0 / std::min(p.kappa, p.gamma));
  const double diff2 = std::norm(closed.a_mean - ode.a_mean) +
                       (closed.sigma_mean - ode.sigma_mean).squaredNorm();
  const double ref2 = std::norm(closed.a_mean) + closed.sigma_mean.squaredNorm();
  return std::sqrt(diff2 / ref2);
}

double force_gradient_mismatch(const ModelParams& params,
                               const AtomConfiguration& config, double h) {
  const Vector f = force(params, config);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    AtomConfiguration up = config, down = config;
    up.positions[k] += h;
    down.positions[k] -= h;
    const double grad =
        (potential(params, up) - potential(params, down)) / (2.0 * h);
    worst = std::max(worst, std::abs(f[k] + grad));
  }
  const double scale = f.cwiseAbs().maxCoeff();
  return scale > 0.0 ? worst / scale : worst;
}

double FrictionCheck::rel_error() const {
  return std::abs(measured - predicted) / std::abs(predicted);
}

FrictionCheck diagonal_friction_check() {
  const ModelParams p = pumped(0.1, 10.0, -1.0e4, 1);
  const Vector x0 = Vector::Constant(1, 0.3);
  const Vector v = Vector::Constant(1, 1e-3);
  const auto r = dragged_atom_force(p, x0, v, default_drag_time(p));
  return {r.lag_force[0], averaged_friction_force(p, r, 0)};
}

FrictionCheck cross_friction_check() {
  const ModelParams p = pumped(0.1, 10.0, -1.0e4, 2);
  Vector x0(2), v(2);
  x0 << 0.3, 0.2;
  v << 0.0, 1e-3;
  const auto r = dragged_atom_force(p, x0, v, default_drag_time(p));
  return {r.lag_force[0], averaged_friction_force(p, r, 0)};
}

ExpansionCheck expansion_check(const std::vector<double>& xs) {
  const ModelParams p = pumped(0.1, 10.0, -1.0e4, 2);
  const auto coeffs = small_oscillation_coefficients(p);
  ExpansionCheck out;
  out.x = xs;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Vector x(2);
    x << xs[i], -0.6 * xs[i];
    const AtomConfiguration c{x};
    const Matrix beta = friction_matrix(p, c);
    const Matrix diff = diffusion_matrix(p, c);
    const auto [beta_e, diff_e] = small_oscillation_matrices(coeffs, x);
    out.beta_residual.push_back((beta - beta_e).cwiseAbs().maxCoeff());
    out.diff_residual.push_back((diff - diff_e).cwiseAbs().maxCoeff());
    if (i == 0) {
      out.beta1_rel =
          std::abs(coeffs.beta1 * x[0] * x[1] - beta(0, 1)) / std::abs(beta(0, 1));
      out.d1_rel =
          std::abs(coeffs.d1 * x[0] * x[1] - diff(0, 1)) / std::abs(diff(0, 1));
    }
  }
  out.beta_slope = log_log_slope(xs, out.beta_residual);
  out.diff_slope = log_log_slope(xs, out.diff_residual);
  return out;
}

StructureCheck structure_check(const ModelParams& p,
                               const AtomConfiguration& c) {
  StructureCheck out;
  const Matrix beta = friction_matrix(p, c);
  const FieldResponse fr = field_response(p, c);
  const Matrix& d = fr.diffusion;
  out.friction_symmetric = (beta - beta.transpose()).cwiseAbs().maxCoeff() == 0.0;
  out.diffusion_symmetric = (d - d.transpose()).cwiseAbs().maxCoeff() == 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> full(d, Eigen::EigenvaluesOnly);
  out.min_eigen_over_trace = full.eigenvalues().minCoeff() / d.trace();
  out.diffusion_psd = out.min_eigen_over_trace >= -kPsdRelativeTolerance;

  // Remove the single-atom parts: dipole fluctuations in grad g and
  // spontaneous emission, both proportional to 2 eta^2 gamma / |D'|^2.
  const double self = 2.0 * p.eta * p.eta * p.gamma / std::norm(fr.bloch_det);
  Matrix inter = d;
  for (Eigen::Index k = 0; k < c.positions.size(); ++k) {
    const double x = c.positions[k];
    const double g = p.g0 * std::cos(x), dg = -p.g0 * std::sin(x);
    inter(k, k) -= self * (dg * dg + p.u2bar * g * g);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> part(inter, Eigen::EigenvaluesOnly);
  Vector ev = part.eigenvalues().cwiseAbs();
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
  out.rank1_ratio = ev.size() > 1 && ev[0] > 0.0 ? ev[1] / ev[0] : 0.0;
  return out;
}

SeriesCheck series_check(const std::vector<double>& delta_a) {
  SeriesCheck out;
  out.delta_a = delta_a;
  std::vector<double> ratio;
  for (double da : delta_a) {
    ModelParams p;
    p.kappa = 0.5;
    p.g0 = 5.0;
    p.delta_a = da;
    p.n_atoms = 2;
    p.eta = 1.0;
    p.delta_c = operating_point(p, AtomConfiguration::antinodes(2)).u0 - p.kappa;
    Vector x(2);
    x << 0.4, 1.1;
    const AtomConfiguration c{x};
    const double scale = p.eta * p.eta / p.kappa;
    out.residual.push_back(std::abs(potential(p, c) - potential_series(p, c)) /
                           scale);
    ratio.push_back(std::abs(p.gamma / da));
  }
  out.slope = log_log_slope(ratio, out.residual);
  return out;
}

double trap_period_us(ModelParams params, double sat) {
  return to_microseconds(
      trap_period(with_saturation(with_cooling_detuning(params), sat)));
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<CheckResult> run_verification() {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };

  double worst = 0.0;
  for (const auto& pt : oracle_grid()) worst = std::max(worst, steady_state_mismatch(pt));
  add("steady state vs mean-field ODE (20 points)", worst < 1e-8,
      "max rel " + sci(worst) + " < 1e-8");

  std::mt19937_64 rng(7);
  const ModelParams points[] = {
      pumped(0.5, 5.0, -50.0, 2), pumped(0.1, 10.0, -1e4, 2),
      pumped(1.0, 5.0, -100.0, 2), pumped(0.05, 20.0, -5000.0, 2),
      pumped(2.0, 50.0, -1000.0, 2)};
  worst = 0.0;
  for (const auto& p : points)
    for (int i = 0; i < 100; ++i)
      worst = std::max(worst, force_gradient_mismatch(p, random_config(2, rng)));
  add("force = -grad V (500 configurations)", worst < 1e-6,
      "max rel " + sci(worst) + " < 1e-6");

  const auto diag = diagonal_friction_check();
  add("dragged atom vs beta_11 v", diag.rel_error() < 0.02,
      "rel " + sci(diag.rel_error()) + " < 2e-2");
  const auto cross = cross_friction_check();
  add("dragged atom vs beta_12 v_2", cross.rel_error() < 0.05,
      "rel " + sci(cross.rel_error()) + " < 5e-2");

  bool sym = true, psd = true;
  double rank = 0.0;
  for (const auto& p : points) {
    for (int i = 0; i < 20; ++i) {
      const auto s = structure_check(p, random_config(2, rng));
      sym = sym && s.friction_symmetric && s.diffusion_symmetric;
      psd = psd && s.diffusion_psd;
      rank = std::max(rank, s.rank1_ratio);
    }
  }
  add("beta, D exactly symmetric", sym, "100 configurations");
  add("D positive semidefinite", psd, "eigenvalues >= -1e-9 trace");
  add("D interaction part rank 1", rank < 1e-10,
      "lambda2/lambda1 " + sci(rank) + " < 1e-10");

  const auto ex = expansion_check();
  add("deep-trapping expansion residual ~ x^4",
      std::abs(ex.beta_slope - 4.0) < 0.3 && std::abs(ex.diff_slope - 4.0) < 0.3,
      "slopes " + format_double(std::round(ex.beta_slope * 100) / 100) + ", " +
          format_double(std::round(ex.diff_slope * 100) / 100));
  add("beta1, D1 vs off-diagonals", ex.beta1_rel < 0.01 && ex.d1_rel < 0.01,
      "rel " + sci(ex.beta1_rel) + ", " + sci(ex.d1_rel) + " < 1e-2");

  const auto series = series_check();
  add("potential series residual ~ (gamma/dA)^3",
      std::abs(series.slope - 3.0) < 0.3,
      "slope " + format_double(std::round(series.slope * 100) / 100));

  const double t_garching = trap_period_us(garching_point(2), 0.05);
  const double t_improved = trap_period_us(improved_point(2), 0.05);
  add("trap period, Garching point", std::abs(t_garching / 2.9 - 1.0) <= 0.5,
      format_double(std::round(t_garching * 1000) / 1000) + " us vs 2.9 us +-50%");
  add("trap period, improved point", std::abs(t_improved / 0.17 - 1.0) <= 0.5,
      format_double(std::round(t_improved * 1000) / 1000) + " us vs 0.17 us +-50%");
  return out;
}

}  // namespace cavity
