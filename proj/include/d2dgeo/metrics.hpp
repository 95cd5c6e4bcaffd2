#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "d2dgeo/curve.hpp"
#include "d2dgeo/errors.hpp"
#include "d2dgeo/fading.hpp"
#include "d2dgeo/interference.hpp"
#include "d2dgeo/mcsim.hpp"
#include "d2dgeo/network.hpp"
#include "d2dgeo/sinr_functional.hpp"

namespace d2dgeo {

struct ScenarioSpec {
  NetworkParams params = default_params();
  FadingModel fading_intended = kappa_mu(0.0, 1.0, 1.0);
  FadingModel fading_interferer = kappa_mu(0.0, 1.0, 1.0);
  LinkKind link = LinkKind::d2d;
  QuadratureSpec quad;
  double bep_a = 0.5;
  double bep_b = 0.5;
  // Monte Carlo settings for the BEP fallback and the hybrid CCDF
  std::size_t mc_drops = 100000;
  std::size_t hybrid_draws = 20000;
  double window_radius_cells = 15.0;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

inline void validate(const ScenarioSpec& s) {
  validate(s.params);
  validate(s.fading_intended);
  validate(s.fading_interferer);
  validate(s.quad);
  if (!(s.bep_a > 0.0 && s.bep_b > 0.0)) throw config_error("bep a and b must be positive");
  if (s.mc_drops < 1000) throw config_error("mc_drops must be >= 1000");
  if (s.hybrid_draws < 1000) throw config_error("hybrid_draws must be >= 1000");
}

inline SimConfig sim_config(const ScenarioSpec& s, LinkKind link) {
  SimConfig c;
  c.params = s.params;
  c.fading_intended = s.fading_intended;
  c.fading_interferer = s.fading_interferer;
  c.link = link;
  c.drops = s.mc_drops;
  c.window_radius_cells = s.window_radius_cells;
  c.seed = s.seed;
  c.threads = s.threads;
  return c;
}

inline InterferenceTransform interference_transform(const ScenarioSpec& s, LinkKind link) {
  return link == LinkKind::d2d ? InterferenceTransform::d2d(s.fading_interferer, s.params)
                               : InterferenceTransform::cellular(s.fading_interferer, s.params);
}

// E[g(W / (I + N0))] on one link type.
inline double link_expectation(const ScenarioSpec& s, LinkKind link, const GFamily& g) {
  return expect(g, s.fading_intended, interference_transform(s, link), s.params.n0, s.quad);
}

struct Rates {
  double cellular = 0.0;       // R_c
  double d2d_mode = 0.0;       // R_hat_d
  double potential_d2d = 0.0;  // R_d
};

// Average rates in nats per channel use.
inline Rates avg_rates(const ScenarioSpec& s) {
  validate(s);
  const auto& p = s.params;
  Rates r;
  if (p.beta < 1.0) {
    r.cellular = rate_prefactor(p, LinkKind::cellular) * link_expectation(s, LinkKind::cellular, GFamily::rate());
  }
  if (p.beta > 0.0 && p.epsilon > 0.0) {
    r.d2d_mode = rate_prefactor(p, LinkKind::d2d) * link_expectation(s, LinkKind::d2d, GFamily::rate());
  }
  const double pm = p_d2d_mode(p);
  r.potential_d2d = r.cellular * (1.0 - pm) + r.d2d_mode * pm;
  return r;
}

struct BepResult {
  double cellular = 0.0;       // P_ec
  double d2d_mode = 0.0;       // P_hat_ed
  double potential_d2d = 0.0;  // P_ed, rate weighted
  double se_cellular = 0.0;    // nonzero when Monte Carlo backed
  double se_d2d_mode = 0.0;
  bool monte_carlo = false;
  std::string notice;
};

inline double rate_weighted_bep(const Rates& r, double pm, double pec, double ped_hat) {
  const double wc = r.cellular * (1.0 - pm), wd = r.d2d_mode * pm;
  if (!(wc + wd > 0.0)) return pm < 1.0 ? pec : ped_hat;
  return (wc * pec + wd * ped_hat) / (wc + wd);
}

// Average BEP of Gamma(b, a x) / (2 Gamma(b)). Non-integer derivative orders go to the simulator.
inline BepResult avg_bep(const ScenarioSpec& s) {
  validate(s);
  BepResult out;
  const auto g = GFamily::bep(s.bep_a, s.bep_b);
  try {
    out.cellular = link_expectation(s, LinkKind::cellular, g);
    out.d2d_mode = link_expectation(s, LinkKind::d2d, g);
  } catch (const unsupported_order& e) {
    out.monte_carlo = true;
    out.notice = std::string("analytic BEP unavailable (") + e.what() + "); using Monte Carlo with " +
                 std::to_string(s.mc_drops) + " drops";
    const auto m = McMetric::bep(s.bep_a, s.bep_b);
    const auto c = estimate(sim_config(s, LinkKind::cellular), m).points.front();
    const auto d = estimate(sim_config(s, LinkKind::d2d), m).points.front();
    out.cellular = c.y;
    out.se_cellular = *c.se;
    out.d2d_mode = d.y;
    out.se_d2d_mode = *d.se;
  }
  out.potential_d2d = rate_weighted_bep(avg_rates(s), p_d2d_mode(s.params), out.cellular, out.d2d_mode);
  return out;
}

// Interference draws for the hybrid CCDF: exact stable law on the D2D link, the exclusion-zone
// point process on the cellular link.
inline std::vector<double> hybrid_interference_draws(const ScenarioSpec& s, LinkKind link) {
  std::vector<double> out(s.hybrid_draws);
  const auto& p = s.params;
  if (link == LinkKind::d2d) {
    const double c = d2d_constant_c(s.fading_interferer, p), delta = p.delta_d();
    parallel_for(out.size(), thread_count(s.threads), [&](std::size_t k) {
      auto rng = substream(s.seed ^ 0x5bd1e995ULL, k);
      out[k] = stable_interference(c, delta, rng);
    });
  } else {
    parallel_for(out.size(), thread_count(s.threads), [&](std::size_t k) {
      auto rng = substream(s.seed ^ 0x9e3779b9ULL, k);
      out[k] = model_cellular_interference(p, s.fading_interferer, s.window_radius_cells, rng);
    });
  }
  return out;
}

// P(W / I > x) = E_I[ccdf_W(x I)], x on a dB grid.
inline CurveSeries sir_ccdf(const ScenarioSpec& s, const std::vector<double>& grid_db) {
  validate(s);
  for (std::size_t i = 1; i < grid_db.size(); ++i) {
    if (!(grid_db[i] > grid_db[i - 1])) throw config_error("SIR grid must be strictly ascending");
  }
  const auto draws = hybrid_interference_draws(s, s.link);
  CurveSeries c;
  c.label = std::string(to_string(s.link)) + " SIR CCDF (analytic hybrid)";
  c.x_name = "SIR threshold";
  c.x_unit = "dB";
  c.y_name = "CCDF";
  const double n = static_cast<double>(draws.size());
  std::vector<CurvePoint> pts(grid_db.size());
  parallel_for(grid_db.size(), thread_count(s.threads), [&](std::size_t i) {
    const double x = std::pow(10.0, grid_db[i] / 10.0);
    double s1 = 0.0, s2 = 0.0;
    for (double I : draws) {
      const double v = I > 0.0 ? ccdf(s.fading_intended, x * I) : 1.0;
      s1 += v;
      s2 += v * v;
    }
    const double m = s1 / n;
    pts[i] = {grid_db[i], std::clamp(m, 0.0, 1.0), std::sqrt(std::max(0.0, s2 / n - m * m) / (n - 1.0))};
  });
  // enforce the monotone envelope against last-digit noise from ccdf evaluations
  for (std::size_t i = 1; i < pts.size(); ++i) pts[i].y = std::min(pts[i].y, pts[i - 1].y);
  c.points = std::move(pts);
  return c;
}

// sup_x |a(x) - b(x)| over a shared grid.
inline double sup_gap(const CurveSeries& a, const CurveSeries& b) {
  if (a.points.size() != b.points.size()) throw config_error("sup_gap: curves on different grids");
  double g = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.points[i].x != b.points[i].x) throw config_error("sup_gap: curves on different grids");
    g = std::max(g, std::abs(a.points[i].y - b.points[i].y));
  }
  return g;
}

}  // namespace d2dgeo
