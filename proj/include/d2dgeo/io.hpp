#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "d2dgeo/curve.hpp"
#include "d2dgeo/errors.hpp"
#include "d2dgeo/fading.hpp"
#include "d2dgeo/metrics.hpp"

namespace d2dgeo {

using json = nlohmann::json;

// Flat scenario configuration. Keys and units:
//   lambda_b_per_m2, lambda_per_m2, xi_per_m2   intensities per square metre
//   q, epsilon, beta                            probabilities / fractions
//   theta_m                                     metres, number or "inf"
//   tau_c, tau_d                                path-loss exponents
//   snr_db                                      mean intended power over N0, dB
//   fading_intended, fading_interferer          e.g. "rayleigh", "kappa-mu:kappa=3,mu=2"
//   link                                        "d2d" or "cellular" (ccdf only)
//   bep_a, bep_b                                modulation / detection constants
//   quadrature                                  "adaptive" or "gauss-laguerre"
//   laguerre_order, rel_tol
//   mc_drops, hybrid_draws, window_radius_cells, seed
struct RunConfig {
  ScenarioSpec scenario;
  double snr_db = 5.0;

  // resolved scenario with N0 from the SNR
  ScenarioSpec resolved() const {
    ScenarioSpec s = scenario;
    s.params.n0 = mean_power(s.fading_intended) / std::pow(10.0, snr_db / 10.0);
    return s;
  }
};

namespace detail {

inline double json_number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  throw config_error(std::string("config field '") + key + "': expected a number");
}

inline std::uint64_t json_count(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw config_error(std::string("config field '") + key + "': expected a nonnegative integer");
}

inline std::string json_string(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw config_error(std::string("config field '") + key + "': expected a string");
  return v.get<std::string>();
}

}  // namespace detail

inline json to_json(const RunConfig& c) {
  const auto& s = c.scenario;
  const auto& p = s.params;
  json j;
  j["lambda_b_per_m2"] = p.lambda_b;
  j["lambda_per_m2"] = p.lambda;
  j["xi_per_m2"] = p.xi;
  j["q"] = p.q;
  j["epsilon"] = p.epsilon;
  j["beta"] = p.beta;
  j["theta_m"] = std::isinf(p.theta) ? json("inf") : json(p.theta);
  j["tau_c"] = p.tau_c;
  j["tau_d"] = p.tau_d;
  j["snr_db"] = c.snr_db;
  j["fading_intended"] = describe(s.fading_intended);
  j["fading_interferer"] = describe(s.fading_interferer);
  j["link"] = to_string(s.link);
  j["bep_a"] = s.bep_a;
  j["bep_b"] = s.bep_b;
  j["quadrature"] = s.quad.method == QuadratureSpec::Method::adaptive ? "adaptive" : "gauss-laguerre";
  j["laguerre_order"] = s.quad.laguerre_order;
  j["rel_tol"] = s.quad.rel_tol;
  j["mc_drops"] = s.mc_drops;
  j["hybrid_draws"] = s.hybrid_draws;
  j["window_radius_cells"] = s.window_radius_cells;
  j["seed"] = s.seed;
  return j;
}

// Applies the keys present in j on top of base; unknown keys are rejected.
inline RunConfig apply_json(RunConfig c, const json& j) {
  if (!j.is_object()) throw config_error("config: expected a JSON object");
  const json known = to_json(RunConfig{});
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw config_error("config: unknown field '" + k + "'");
  }
  auto& s = c.scenario;
  auto& p = s.params;
  auto num = [&](const char* k, double& dst) {
    if (j.contains(k)) dst = detail::json_number(j, k);
  };
  num("lambda_b_per_m2", p.lambda_b);
  num("lambda_per_m2", p.lambda);
  num("xi_per_m2", p.xi);
  num("q", p.q);
  num("epsilon", p.epsilon);
  num("beta", p.beta);
  num("theta_m", p.theta);
  num("tau_c", p.tau_c);
  num("tau_d", p.tau_d);
  num("snr_db", c.snr_db);
  num("bep_a", s.bep_a);
  num("bep_b", s.bep_b);
  num("rel_tol", s.quad.rel_tol);
  num("window_radius_cells", s.window_radius_cells);
  if (j.contains("fading_intended")) s.fading_intended = parse_fading(detail::json_string(j, "fading_intended"));
  if (j.contains("fading_interferer")) s.fading_interferer = parse_fading(detail::json_string(j, "fading_interferer"));
  if (j.contains("link")) {
    const auto l = detail::json_string(j, "link");
    if (l == "d2d") s.link = LinkKind::d2d;
    else if (l == "cellular") s.link = LinkKind::cellular;
    else throw config_error("config field 'link': expected 'd2d' or 'cellular', got '" + l + "'");
  }
  if (j.contains("quadrature")) {
    const auto m = detail::json_string(j, "quadrature");
    if (m == "adaptive") s.quad.method = QuadratureSpec::Method::adaptive;
    else if (m == "gauss-laguerre") s.quad.method = QuadratureSpec::Method::gauss_laguerre;
    else throw config_error("config field 'quadrature': expected 'adaptive' or 'gauss-laguerre'");
  }
  if (j.contains("laguerre_order")) s.quad.laguerre_order = static_cast<int>(detail::json_count(j, "laguerre_order"));
  if (j.contains("mc_drops")) s.mc_drops = detail::json_count(j, "mc_drops");
  if (j.contains("hybrid_draws")) s.hybrid_draws = detail::json_count(j, "hybrid_draws");
  if (j.contains("seed")) s.seed = detail::json_count(j, "seed");
  if (!std::isfinite(c.snr_db)) throw config_error("config field 'snr_db': must be finite");
  auto r = c.resolved();
  validate(r);
  if (r.window_radius_cells < 10.0) throw config_error("config field 'window_radius_cells': must be >= 10");
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw config_error("config: " + path.string() + ": " + e.what());
  }
  return apply_json(RunConfig{}, j);
}

// 64-bit FNV-1a over the canonical serialization of the resolved config.
inline std::string config_hash(const RunConfig& c) {
  const std::string canon = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const CurveSeries& c) {
  std::string s = "x,y,stderr\n";
  for (const auto& p : c.points) {
    s += fmt17(p.x) + "," + fmt17(p.y) + "," + (p.se ? fmt17(*p.se) : std::string()) + "\n";
  }
  return s;
}

inline double parse_field(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw config_error("csv: bad number '" + s + "'");
  return v;
}

inline std::vector<CurvePoint> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "x,y,stderr") throw config_error("csv: missing header x,y,stderr");
  std::vector<CurvePoint> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) throw config_error("csv: malformed row '" + line + "'");
    CurvePoint p{parse_field(line.substr(0, a)), parse_field(line.substr(a + 1, b - a - 1)), std::nullopt};
    if (b + 1 < line.size()) p.se = parse_field(line.substr(b + 1));
    pts.push_back(p);
  }
  return pts;
}

inline json curve_to_json(const CurveSeries& c) {
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back(json::array({p.x, p.y, p.se ? json(*p.se) : json(nullptr)}));
  return {{"label", c.label}, {"x_name", c.x_name}, {"x_unit", c.x_unit}, {"y_name", c.y_name},
          {"y_unit", c.y_unit}, {"config_hash", c.config_hash}, {"points", pts}};
}

inline CurveSeries curve_from_json(const json& j) {
  CurveSeries c;
  c.label = j.at("label").get<std::string>();
  c.x_name = j.value("x_name", "");
  c.x_unit = j.value("x_unit", "");
  c.y_name = j.value("y_name", "");
  c.y_unit = j.value("y_unit", "");
  c.config_hash = j.value("config_hash", "");
  for (const auto& p : j.at("points")) {
    CurvePoint q{p.at(0).get<double>(), p.at(1).get<double>(), std::nullopt};
    if (!p.at(2).is_null()) q.se = p.at(2).get<double>();
    c.points.push_back(q);
  }
  validate(c);
  return c;
}

inline json bundle(const json& meta, const std::vector<CurveSeries>& curves) {
  json cs = json::array();
  for (const auto& c : curves) cs.push_back(curve_to_json(c));
  return {{"meta", meta}, {"curves", cs}};
}

inline std::vector<CurveSeries> curves_from_bundle(const json& j) {
  std::vector<CurveSeries> out;
  for (const auto& c : j.at("curves")) out.push_back(curve_from_json(c));
  return out;
}

// lowercase alnum with '-' separators, for file names
inline std::string slug(const std::string& s) {
  std::string o;
  for (char ch : s) {
    if (std::isalnum(static_cast<unsigned char>(ch))) o += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    else if (!o.empty() && o.back() != '-') o += '-';
  }
  while (!o.empty() && o.back() == '-') o.pop_back();
  return o;
}

}  // namespace d2dgeo
