#pragma once

// Plain-text run configuration: `key = value` lines, `#` comments.
// Unknown keys are rejected; K and M must parse to Hermitian matrices.

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "magnon/hamiltonian.hpp"
#include "magnon/io.hpp"
#include "magnon/linalg.hpp"

namespace magnon {

// Configuration mistakes are usage errors (CLI exit code 2), not domain
// errors, hence the dedicated type.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Flux flux = Flux::rational(0, 1);
  int qmax = 8;
  int kgrid = 24;
  double e0 = 3.5;
  double phi0 = 0.7;
  double phi_min = 0.0;
  double phi_max = 2.0 * std::numbers::pi;
  int steps = 200;
  int radius = 40;  // Ball radius for defect/curve regions
  double tol = 1e-12;
  double margin = 0.1;
  // interlayer pair: kappa = (0, 0.65), mu = (1, 0.5), xi1 = (1,1)/sqrt(2)
  Mat2 k{0.325, -0.325, -0.325, 0.325};
  Mat2 m{0.75, 0.25, 0.25, 0.75};
  std::string out;
  std::string svg;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for '" + key + "': " + v);
  }
  if (pos != v.size()) throw ConfigError("config: bad numeric value for '" + key + "': " + v);
  return x;
}

inline int parse_int(const std::string& key, const std::string& v) {
  const double x = parse_double(key, v);
  if (x != std::floor(x)) throw ConfigError("config: '" + key + "' must be an integer: " + v);
  return static_cast<int>(x);
}

inline Flux parse_flux(const std::string& v) {
  const auto slash = v.find('/');
  if (slash == std::string::npos) return Flux::real(parse_double("flux", v));
  try {
    return Flux::rational(std::stoll(v.substr(0, slash)), std::stoll(v.substr(slash + 1)));
  } catch (const std::exception&) {
    throw ConfigError("config: bad flux fraction: " + v);
  }
}

inline Mat2 parse_mat2(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  double x[8];
  for (double& e : x)
    if (!(in >> e)) throw ConfigError("config: '" + key + "' needs 8 real numbers (re/im per entry)");
  std::string rest;
  if (in >> rest) throw ConfigError("config: '" + key + "' needs exactly 8 real numbers");
  Mat2 m{{x[0], x[1]}, {x[2], x[3]}, {x[4], x[5]}, {x[6], x[7]}};
  if (m.hermiticity_defect() > 1e-12)
    throw ConfigError("config: '" + key + "' is not Hermitian within 1e-12");
  return m;
}

inline std::string mat2_text(const Mat2& m) {
  std::string s;
  for (const cdouble* e : {&m.a, &m.b, &m.c, &m.d}) {
    if (!s.empty()) s += ' ';
    s += fmt17(e->real()) + ' ' + fmt17(e->imag());
  }
  return s;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));

    if (key == "flux") cfg.flux = detail::parse_flux(value);
    else if (key == "qmax") cfg.qmax = detail::parse_int(key, value);
    else if (key == "kgrid") cfg.kgrid = detail::parse_int(key, value);
    else if (key == "e0") cfg.e0 = detail::parse_double(key, value);
    else if (key == "phi0") cfg.phi0 = detail::parse_double(key, value);
    else if (key == "phi_min") cfg.phi_min = detail::parse_double(key, value);
    else if (key == "phi_max") cfg.phi_max = detail::parse_double(key, value);
    else if (key == "steps") cfg.steps = detail::parse_int(key, value);
    else if (key == "radius") cfg.radius = detail::parse_int(key, value);
    else if (key == "tol") cfg.tol = detail::parse_double(key, value);
    else if (key == "margin") cfg.margin = detail::parse_double(key, value);
    else if (key == "K") cfg.k = detail::parse_mat2(key, value);
    else if (key == "M") cfg.m = detail::parse_mat2(key, value);
    else if (key == "out") cfg.out = value;
    else if (key == "svg") cfg.svg = value;
    else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (cfg.tol <= 0) throw ConfigError("config: tol must be > 0");
  if (cfg.margin <= 0) throw ConfigError("config: margin must be > 0");
  return cfg;
}

inline std::string serialize_config(const RunConfig& cfg) {
  std::string s;
  s += "flux = ";
  s += cfg.flux.is_rational()
           ? std::to_string(cfg.flux.p()) + "/" + std::to_string(cfg.flux.q())
           : fmt17(cfg.flux.radians());
  s += '\n';
  s += "qmax = " + std::to_string(cfg.qmax) + '\n';
  s += "kgrid = " + std::to_string(cfg.kgrid) + '\n';
  s += "e0 = " + fmt17(cfg.e0) + '\n';
  s += "phi0 = " + fmt17(cfg.phi0) + '\n';
  s += "phi_min = " + fmt17(cfg.phi_min) + '\n';
  s += "phi_max = " + fmt17(cfg.phi_max) + '\n';
  s += "steps = " + std::to_string(cfg.steps) + '\n';
  s += "radius = " + std::to_string(cfg.radius) + '\n';
  s += "tol = " + fmt17(cfg.tol) + '\n';
  s += "margin = " + fmt17(cfg.margin) + '\n';
  s += "K = " + detail::mat2_text(cfg.k) + '\n';
  s += "M = " + detail::mat2_text(cfg.m) + '\n';
  if (!cfg.out.empty()) s += "out = " + cfg.out + '\n';
  if (!cfg.svg.empty()) s += "svg = " + cfg.svg + '\n';
  return s;
}

}  // namespace magnon
