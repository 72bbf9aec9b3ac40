#include "cavity/dynamics.hpp"
#include "cavity/errors.hpp"
#include "cavity/format.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace cavity {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text == "nan") {
    out = std::nan("");
    return true;
  }
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

bool parse_uint(std::string_view text, std::uint64_t& out) {
  text = trim(text);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

namespace {

void header(std::ostream& out, const char* key, const std::string& value) {
  out << "# " << key << " = " << value << '\n';
}

double need_double(const std::map<std::string, std::string>& kv,
                   const std::string& key) {
  const auto it = kv.find(key);
  double v = 0.0;
  if (it == kv.end() || !parse_double(it->second, v)) {
    throw Error(ErrorCode::kIo, "trajectory header lacks numeric '" + key + "'");
  }
  return v;
}

std::uint64_t need_uint(const std::map<std::string, std::string>& kv,
                        const std::string& key) {
  const auto it = kv.find(key);
  std::uint64_t v = 0;
  if (it == kv.end() || !parse_uint(it->second, v)) {
    throw Error(ErrorCode::kIo, "trajectory header lacks integer '" + key + "'");
  }
  return v;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& r) {
  const auto& p = r.params;
  out << "# cavitysim trajectory\n";
  out << "# units: hbar = gamma = k_C = 1; t in 1/gamma, x in 1/k_C, "
         "p in hbar*k_C\n";
  header(out, "gamma", format_double(p.gamma));
  header(out, "kappa", format_double(p.kappa));
  header(out, "g0", format_double(p.g0));
  header(out, "delta_a", format_double(p.delta_a));
  header(out, "delta_c", format_double(p.delta_c));
  header(out, "eta", format_double(p.eta));
  header(out, "n_atoms", std::to_string(p.n_atoms));
  header(out, "recoil_ratio", format_double(p.recoil_ratio));
  header(out, "u2bar", format_double(p.u2bar));
  header(out, "y_force", format_double(r.weights.y_force));
  header(out, "y_friction", format_double(r.weights.y_friction));
  header(out, "y_diffusion", format_double(r.weights.y_diffusion));
  header(out, "dt", format_double(r.config.dt));
  header(out, "duration", format_double(r.config.duration));
  header(out, "sample_stride", std::to_string(r.config.sample_stride));
  header(out, "rng_seed", std::to_string(r.config.rng_seed));
  header(out, "adiabaticity_factor",
         format_double(r.config.adiabaticity_factor));
  header(out, "noise", r.config.noise ? "1" : "0");
  header(out, "noise_substeps", std::to_string(r.config.noise_substeps));
  header(out, "adiabaticity_violations",
         std::to_string(r.adiabaticity_violations));
  header(out, "saturation_breaches", std::to_string(r.saturation_breaches));
  header(out, "status", r.status);

  out << 't';
  for (std::size_t k = 0; k < r.n_atoms; ++k) out << ",x" << k + 1;
  for (std::size_t k = 0; k < r.n_atoms; ++k) out << ",p" << k + 1;
  out << ",sat_max,adiab_flag\n";

  for (std::size_t i = 0; i < r.size(); ++i) {
    out << format_double(r.times[i]);
    for (std::size_t k = 0; k < r.n_atoms; ++k)
      out << ',' << format_double(r.position(i, k));
    for (std::size_t k = 0; k < r.n_atoms; ++k)
      out << ',' << format_double(r.momentum(i, k));
    out << ',' << format_double(r.saturation_max[i]) << ','
        << static_cast<int>(r.adiabatic_flag[i]) << '\n';
  }
}

TrajectoryRecord read_trajectory_csv(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  bool have_columns = false;
  while (std::getline(in, line)) {
    const auto view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      const auto body = trim(view.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos) {
        kv[std::string(trim(body.substr(0, eq)))] =
            std::string(trim(body.substr(eq + 1)));
      }
      continue;
    }
    have_columns = true;  // the column-name row
    break;
  }
  if (!have_columns) throw Error(ErrorCode::kIo, "trajectory CSV has no data header");

  TrajectoryRecord r;
  r.params.gamma = need_double(kv, "gamma");
  r.params.kappa = need_double(kv, "kappa");
  r.params.g0 = need_double(kv, "g0");
  r.params.delta_a = need_double(kv, "delta_a");
  r.params.delta_c = need_double(kv, "delta_c");
  r.params.eta = need_double(kv, "eta");
  r.params.n_atoms = need_uint(kv, "n_atoms");
  r.params.recoil_ratio = need_double(kv, "recoil_ratio");
  r.params.u2bar = need_double(kv, "u2bar");
  r.params.validate();
  r.weights.y_force = need_double(kv, "y_force");
  r.weights.y_friction = need_double(kv, "y_friction");
  r.weights.y_diffusion = need_double(kv, "y_diffusion");
  r.config.dt = need_double(kv, "dt");
  r.config.duration = need_double(kv, "duration");
  r.config.sample_stride = need_uint(kv, "sample_stride");
  r.config.rng_seed = need_uint(kv, "rng_seed");
  r.config.adiabaticity_factor = need_double(kv, "adiabaticity_factor");
  r.config.noise = need_uint(kv, "noise") != 0;
  r.config.noise_substeps =
      kv.count("noise_substeps") ? need_uint(kv, "noise_substeps") : 1;
  r.adiabaticity_violations = need_uint(kv, "adiabaticity_violations");
  r.saturation_breaches = need_uint(kv, "saturation_breaches");
  r.status = kv.count("status") ? kv["status"] : "ok";
  r.completed = r.status == "ok";
  r.n_atoms = r.params.n_atoms;

  const std::size_t columns = 1 + 2 * r.n_atoms + 2;
  std::vector<double> row(columns);
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::size_t col = 0;
    std::size_t start = 0;
    while (start <= view.size()) {
      const auto comma = view.find(',', start);
      const auto field = view.substr(
          start, comma == std::string_view::npos ? std::string_view::npos
                                                 : comma - start);
      if (col >= columns || !parse_double(field, row[col])) {
        throw Error(ErrorCode::kIo,
                    "bad trajectory row " + std::to_string(line_no));
      }
      ++col;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (col != columns) {
      throw Error(ErrorCode::kIo,
                  "wrong column count in row " + std::to_string(line_no));
    }
    r.times.push_back(row[0]);
    for (std::size_t k = 0; k < r.n_atoms; ++k) r.positions.push_back(row[1 + k]);
    for (std::size_t k = 0; k < r.n_atoms; ++k)
      r.momenta.push_back(row[1 + r.n_atoms + k]);
    r.saturation_max.push_back(row[1 + 2 * r.n_atoms]);
    r.adiabatic_flag.push_back(row[2 + 2 * r.n_atoms] != 0.0 ? 1 : 0);
  }
  return r;
}

}  // namespace cavity
