#include "cavity/params.hpp"

#include "cavity/errors.hpp"

#include <cmath>
#include <string>

namespace cavity {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace

void ModelParams::validate() const {
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be > 0");
  require(std::isfinite(kappa) && kappa > 0.0, "kappa must be > 0");
  require(std::isfinite(g0) && g0 >= 0.0, "g0 must be >= 0");
  require(std::isfinite(eta) && eta >= 0.0, "eta must be >= 0");
  require(std::isfinite(delta_a), "delta_a must be finite");
  require(std::isfinite(delta_c), "delta_c must be finite");
  require(n_atoms >= 1, "n_atoms must be >= 1");
  require(std::isfinite(recoil_ratio) && recoil_ratio > 0.0,
          "recoil_ratio must be > 0");
  require(std::isfinite(u2bar) && u2bar >= 0.0, "u2bar must be >= 0");
}

ModelParams garching_point(std::size_t n_atoms) {
  ModelParams p;
  p.kappa = 0.5;
  p.g0 = 5.0;
  p.delta_a = -50.0;
  p.n_atoms = n_atoms;
  return p;
}

ModelParams improved_point(std::size_t n_atoms) {
  ModelParams p;
  p.kappa = 0.1;
  p.g0 = 10.0;
  p.delta_a = -1.0e4;
  p.n_atoms = n_atoms;
  return p;
}

}  // namespace cavity
