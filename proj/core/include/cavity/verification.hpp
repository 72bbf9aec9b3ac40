#pragma once

// Closed-form vs oracle measurements. Each function returns the raw
// discrepancy; callers decide the tolerance. run_verification() applies the
// default tolerances and backs the CLI `verify` table.

#include "cavity/params.hpp"

#include <string>
#include <vector>

namespace cavity {

struct OraclePoint {
  std::string label;
  ModelParams params;
  AtomConfiguration config;
};

/// 20 operating points across both coupling regimes, pumped to trap-site
/// saturation 0.05 at delta_c = N U0 - kappa, with seeded configurations.
std::vector<OraclePoint> oracle_grid();

/// ||y - y_ode|| / ||y|| over (a, sigma), ODE run to 50 / min(kappa, gamma).
double steady_state_mismatch(const OraclePoint& point);

/// max_k |f_k + dV/dx_k| / max_k |f_k| with central differences of step h.
double force_gradient_mismatch(const ModelParams& params,
                               const AtomConfiguration& config,
                               double h = 1e-5);

struct FrictionCheck {
  double measured = 0.0;    // oracle lag force on the observed atom
  double predicted = 0.0;   // window average of (beta v) on that atom
  double rel_error() const;
};

/// One atom at the improved point, k_C x0 = 0.3, v k_C = 1e-3.
FrictionCheck diagonal_friction_check();
/// Two atoms at the improved point: atom 2 dragged at v k_C = 1e-3, atom 1
/// held; compares the lag on atom 1 with beta_12 v_2.
FrictionCheck cross_friction_check();

struct ExpansionCheck {
  std::vector<double> x;
  std::vector<double> beta_residual;   // max |beta - beta_expansion|
  std::vector<double> diff_residual;   // max |D - D_expansion|
  double beta_slope = 0.0;             // log-log slope of the residuals
  double diff_slope = 0.0;
  double beta1_rel = 0.0;    // |beta1 x1 x2 - beta_12| / |beta_12| at x[0]
  double d1_rel = 0.0;
};

/// Displacements (x, -0.6 x) at the improved point.
ExpansionCheck expansion_check(const std::vector<double>& x = {0.01, 0.02, 0.04});

struct StructureCheck {
  bool friction_symmetric = false;
  bool diffusion_symmetric = false;
  bool diffusion_psd = false;
  double min_eigen_over_trace = 0.0;
  double rank1_ratio = 0.0;   // |lambda_2| / |lambda_1| of the interaction part
};

StructureCheck structure_check(const ModelParams& params,
                               const AtomConfiguration& config);

struct SeriesCheck {
  std::vector<double> delta_a;
  std::vector<double> residual;   // |V - series| / (eta^2 / kappa)
  double slope = 0.0;             // d log residual / d log |gamma/delta_a|
};

SeriesCheck series_check(const std::vector<double>& delta_a = {-1e3, -3e3, -1e4});

/// Trap period in microseconds at trap-site saturation `sat`.
double trap_period_us(ModelParams params, double sat);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_verification();

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cavity
