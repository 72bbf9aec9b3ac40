#include "cavity/oracles.hpp"

#include "cavity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace cavity {

namespace {

constexpr Complex kI{0.0, 1.0};

// Mean-field right-hand side:
//   da/dt     = (i dC - kappa) a + sum_k g_k s_k + eta
//   ds_k/dt   = (i dA - gamma) s_k - g_k a
class MeanFieldSystem {
 public:
  explicit MeanFieldSystem(const ModelParams& p)
      : p_(p),
        n_(p.n_atoms),
        cavity_(kI * p.delta_c - p.kappa),
        atom_(kI * p.delta_a - p.gamma),
        g_(n_), k1_(n_ + 1), k2_(n_ + 1), k3_(n_ + 1), k4_(n_ + 1),
        tmp_(n_ + 1) {}

  std::size_t size() const { return n_ + 1; }

  double stable_step() const {
    const double row0 = std::abs(cavity_) + static_cast<double>(n_) * p_.g0;
    const double rowk = std::abs(atom_) + p_.g0;
    return 1.0 / std::max(row0, rowk);
  }

  void set_couplings(const Vector& x) {
    for (std::size_t k = 0; k < n_; ++k)
      g_[k] = p_.g0 * std::cos(x[static_cast<Eigen::Index>(k)]);
  }

  void rhs(const std::vector<Complex>& y, std::vector<Complex>& dy) const {
    Complex acc = cavity_ * y[0] + p_.eta;
    for (std::size_t k = 0; k < n_; ++k) {
      acc += g_[k] * y[k + 1];
      dy[k + 1] = atom_ * y[k + 1] - g_[k] * y[0];
    }
    dy[0] = acc;
  }

  // One RK4 step at the current couplings.
  void rk4(std::vector<Complex>& y, double h) {
    const std::size_t n = size();
    rhs(y, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
    rhs(tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
    rhs(tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * k3_[i];
    rhs(tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i)
      y[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

  // One RK4 step with couplings evaluated at positions xa (t), xm (t+h/2),
  // xb (t+h).
  void rk4(std::vector<Complex>& y, double h, const Vector& xa,
           const Vector& xm, const Vector& xb) {
    const std::size_t n = size();
    set_couplings(xa);
    rhs(y, k1_);
    set_couplings(xm);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
    rhs(tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
    rhs(tmp_, k3_);
    set_couplings(xb);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * k3_[i];
    rhs(tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i)
      y[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

  // Mean force -2 g'(x_k) Im(conj(s_k) a) on every atom.
  void force(const std::vector<Complex>& y, const Vector& x, Vector& f) const {
    for (std::size_t k = 0; k < n_; ++k) {
      const double dg = -p_.g0 * std::sin(x[static_cast<Eigen::Index>(k)]);
      f[static_cast<Eigen::Index>(k)] =
          -2.0 * dg * std::imag(std::conj(y[k + 1]) * y[0]);
    }
  }

  // Fixed point of rhs() by eliminating s_k = g_k a / (i dA - gamma).
  std::vector<Complex> frozen_state(const Vector& x) {
    set_couplings(x);
    Complex denom = cavity_;
    for (std::size_t k = 0; k < n_; ++k) denom += g_[k] * g_[k] / atom_;
    std::vector<Complex> y(size());
    y[0] = -p_.eta / denom;
    for (std::size_t k = 0; k < n_; ++k) y[k + 1] = g_[k] * y[0] / atom_;
    return y;
  }

 private:
  const ModelParams& p_;
  std::size_t n_;
  Complex cavity_;
  Complex atom_;
  std::vector<double> g_;
  std::vector<Complex> k1_, k2_, k3_, k4_, tmp_;
};

// Lag force F(t) - F_rest(x(t)) averaged over two windows.
struct DragRun {
  Vector window_mean;   // averaging window
  Vector tail_mean;     // final 10%
};

DragRun integrate_drag(const ModelParams& params, const Vector& x0,
                       const Vector& v, double t_center, double t_final,
                       double window_begin, bool start_at_rest_state,
                       std::size_t* steps_out) {
  MeanFieldSystem sys(params);
  const auto n = static_cast<Eigen::Index>(params.n_atoms);
  const auto steps =
      static_cast<std::size_t>(std::ceil(t_final / sys.stable_step()));
  const double h = t_final / static_cast<double>(steps);
  auto path = [&](double t) -> Vector { return x0 + v * (t - t_center); };

  std::vector<Complex> y(sys.size(), Complex{0.0, 0.0});
  if (start_at_rest_state) y = sys.frozen_state(path(0.0));

  const double tail_begin = 0.9 * t_final;
  Vector f(n), f_rest(n), window_sum = Vector::Zero(n), tail_sum = Vector::Zero(n);
  std::size_t window_count = 0, tail_count = 0;
  Vector xa = path(0.0);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * h;
    const Vector xm = path(t + 0.5 * h);
    const Vector xb = path(t + h);
    sys.rk4(y, h, xa, xm, xb);
    xa = xb;
    const double t_new = t + h;
    if (t_new >= window_begin) {
      sys.force(y, xb, f);
      sys.force(sys.frozen_state(xb), xb, f_rest);
      f -= f_rest;
      window_sum += f;
      ++window_count;
      if (t_new >= tail_begin) {
        tail_sum += f;
        ++tail_count;
      }
    }
  }
  if (steps_out) *steps_out = steps;
  return {window_sum / static_cast<double>(std::max<std::size_t>(window_count, 1)),
          tail_sum / static_cast<double>(std::max<std::size_t>(tail_count, 1))};
}

}  // namespace

MeanFieldState ode_steady_state(const ModelParams& params,
                                const AtomConfiguration& config,
                                double t_final) {
  params.validate();
  if (config.size() != params.n_atoms) {
    throw Error(ErrorCode::kInvalidArgument, "configuration size mismatch");
  }
  if (!(t_final > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "t_final must be > 0");
  }
  MeanFieldSystem sys(params);
  const auto steps =
      static_cast<std::size_t>(std::ceil(t_final / sys.stable_step()));
  const double h = t_final / static_cast<double>(steps);
  std::vector<Complex> y(sys.size(), Complex{0.0, 0.0});
  sys.set_couplings(config.positions);
  for (std::size_t s = 0; s < steps; ++s) sys.rk4(y, h);
  MeanFieldState out;
  out.a_mean = y[0];
  out.sigma_mean.resize(static_cast<Eigen::Index>(params.n_atoms));
  for (std::size_t k = 0; k < params.n_atoms; ++k)
    out.sigma_mean[static_cast<Eigen::Index>(k)] = y[k + 1];
  return out;
}

double default_drag_time(const ModelParams& params) {
  return 200.0 / std::min(params.kappa, params.gamma);
}

DraggedAtomResult dragged_atom_force(const ModelParams& params,
                                     const Vector& x0, const Vector& velocity,
                                     double t_final) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(params.n_atoms);
  if (x0.size() != n || velocity.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "x0/velocity size mismatch");
  }
  if (!(t_final > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "t_final must be > 0");
  }
  DraggedAtomResult out;
  out.x0 = x0;
  out.velocity = velocity;
  out.window_begin = 0.75 * t_final;
  out.window_end = t_final;
  out.t_center = 0.5 * (out.window_begin + out.window_end);

  const DragRun plus = integrate_drag(params, x0, velocity, out.t_center,
                                      t_final, out.window_begin, false,
                                      &out.steps);
  const DragRun minus = integrate_drag(params, x0, -velocity, out.t_center,
                                       t_final, out.window_begin, false,
                                       nullptr);
  // The O(v^2) part of the lag is even in v and drops out.
  out.lag_force = 0.5 * (plus.window_mean - minus.window_mean);

  const DragRun restart = integrate_drag(params, x0, velocity, out.t_center,
                                         t_final, out.window_begin, true,
                                         nullptr);
  const double drift = (restart.tail_mean - plus.tail_mean).norm();
  const double lag_scale = out.lag_force.norm();
  const double floor = 1e-14 * std::max(1.0, plus.window_mean.norm());
  if (drift > 0.01 * lag_scale + floor) {
    throw Error(ErrorCode::kNotConverged,
                "lag force unsettled: restart drift " + std::to_string(drift) +
                    " vs lag " + std::to_string(lag_scale));
  }
  return out;
}

double potential_series(const ModelParams& params,
                        const AtomConfiguration& config) {
  params.validate();
  if (config.size() != params.n_atoms) {
    throw Error(ErrorCode::kInvalidArgument, "configuration size mismatch");
  }
  if (params.delta_a == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "series needs delta_a != 0");
  }
  const double u0 = params.delta_a * params.g0 * params.g0 /
                    (params.delta_a * params.delta_a +
                     params.gamma * params.gamma);
  const double resonance = u0 - params.kappa;
  if (std::abs(params.delta_c - resonance) >
      1e-9 * (std::abs(resonance) + params.kappa)) {
    throw Error(ErrorCode::kInvalidArgument,
                "series is defined at delta_c = U0 - kappa");
  }
  const double delta = params.gamma / params.delta_a;
  const double c = params.g0 * params.g0 / (2.0 * params.kappa * params.gamma);
  const double sum_f2 = config.positions.array().cos().square().sum();
  const double shift = c * (sum_f2 - 1.0);
  const double q = 1.0 + kPi / 4.0;
  const double first = q + shift;
  const double second = q - (1.0 + kPi / 2.0) * c - shift * shift;
  return params.eta * params.eta / params.kappa *
         (kPi / 4.0 + first * delta + second * delta * delta);
}

}  // namespace cavity
