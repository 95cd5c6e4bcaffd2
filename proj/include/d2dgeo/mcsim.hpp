#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "d2dgeo/curve.hpp"
#include "d2dgeo/errors.hpp"
#include "d2dgeo/fading.hpp"
#include "d2dgeo/network.hpp"
#include "d2dgeo/random.hpp"

namespace d2dgeo {

struct SimConfig {
  NetworkParams params = default_params();
  FadingModel fading_intended = kappa_mu(0.0, 1.0, 1.0);
  FadingModel fading_interferer = kappa_mu(0.0, 1.0, 1.0);
  LinkKind link = LinkKind::d2d;
  std::size_t drops = 100000;
  double window_radius_cells = 15.0;  // in cell radii
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: D2DGEO_THREADS, else all cores
};

inline void validate(const SimConfig& c) {
  validate(c.params);
  validate(c.fading_intended);
  validate(c.fading_interferer);
  if (c.drops < 1) throw config_error("drops must be >= 1");
  if (!(c.window_radius_cells >= 10.0) || !std::isfinite(c.window_radius_cells)) {
    throw config_error("window_radius_cells must be finite and >= 10");
  }
}

struct Snapshot {
  LinkKind link = LinkKind::d2d;
  double signal = 0.0;
  double interference = 0.0;
  double noise = 0.0;
  double sinr = 0.0;
  int cell_users = 1;        // N: cellular UEs sharing the typical cell, typical one included
  bool empty_cell = false;   // no cellular-mode transmitter anywhere in the window

  double recomputed_sinr() const { return signal / (interference + noise); }
  double sir() const { return interference > 0.0 ? signal / interference : std::numeric_limits<double>::infinity(); }
};

namespace detail {

inline constexpr double kRingWidthCells = 5.0;

inline Snapshot finish(Snapshot s) {
  s.sinr = s.recomputed_sinr();
  return s;
}

// sum of P G r^-tau over a PPP of `intensity` on the annulus [r_in, r_out]
template <class Mark>
inline double annulus_shot_noise(double intensity, double r_in, double r_out, double tau, rng_stream& rng,
                                 Mark&& mark) {
  const double area = std::numbers::pi * (r_out * r_out - r_in * r_in);
  if (!(area > 0.0) || !(intensity > 0.0)) return 0.0;
  const auto n = std::poisson_distribution<long>(intensity * area)(rng);
  double acc = 0.0;
  for (long k = 0; k < n; ++k) {
    const double r = std::sqrt(r_in * r_in + uniform_open(rng) * (r_out * r_out - r_in * r_in));
    acc += mark(rng) * std::pow(r, -tau);
  }
  return acc;
}

}  // namespace detail

// Receiver at the origin, intended transmitter at a truncated Rayleigh distance with inverted power.
// Interferers are drawn ring by ring (rings 5 cell radii wide, each from its own stream), so a
// larger window reuses the inner draws of a smaller one.
inline Snapshot d2d_snapshot(const SimConfig& cfg, rng_stream& rng) {
  const auto& p = cfg.params;
  const double R = p.cell_radius();
  const double rho = cfg.window_radius_cells * R;
  const std::uint64_t key = rng();
  Snapshot s;
  s.link = LinkKind::d2d;
  s.noise = p.n0;
  // W = P L^-tau G = G under channel inversion
  s.signal = sample(cfg.fading_intended, rng);
  const double intensity = p.epsilon * intensities(p).lambda_d;
  auto mark = [&](rng_stream& r) {
    const double L = d2d_length_sample(p, true, r);
    return std::pow(L, p.tau_d) * sample(cfg.fading_interferer, r);
  };
  const double ring = detail::kRingWidthCells * R;
  for (int k = 0; k * ring < rho; ++k) {
    auto rr = substream(key, static_cast<std::uint64_t>(k));
    s.interference += detail::annulus_shot_noise(intensity, k * ring, std::min((k + 1) * ring, rho), p.tau_d, rr, mark);
  }
  return detail::finish(s);
}

// Hexagonal cells of area 1/lambda_b, pointy side up, one BS per center.
struct HexGrid {
  double a;  // circumradius

  explicit HexGrid(double lambda_b) : a(std::sqrt(2.0 / (3.0 * std::sqrt(3.0) * lambda_b))) {}

  void center(int i, int j, double& x, double& y) const {
    x = std::sqrt(3.0) * a * (i + 0.5 * j);
    y = 1.5 * a * j;
  }

  void nearest(double x, double y, int& bi, int& bj) const {
    const double jf = y / (1.5 * a);
    const double if_ = x / (std::sqrt(3.0) * a) - 0.5 * jf;
    const int i0 = static_cast<int>(std::lround(if_)), j0 = static_cast<int>(std::lround(jf));
    double best = std::numeric_limits<double>::infinity();
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        double cx, cy;
        center(i0 + di, j0 + dj, cx, cy);
        const double d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        if (d < best) {
          best = d;
          bi = i0 + di;
          bj = j0 + dj;
        }
      }
    }
  }
};

// Uplink at the BS of the center cell. UEs form a PPP of intensity lambda over the window; each is
// potential-D2D with probability q and then cellular only when its drawn link length exceeds theta.
// Each nonempty cell activates one uniformly chosen cellular UE with inverted power.
inline Snapshot cellular_snapshot(const SimConfig& cfg, rng_stream& rng) {
  const auto& p = cfg.params;
  const double R = p.cell_radius();
  const double rho = cfg.window_radius_cells * R;
  const HexGrid hex(p.lambda_b);
  const int Kj = static_cast<int>(std::ceil(rho / (1.5 * hex.a))) + 2;
  const int Ki = static_cast<int>(std::ceil(rho / (std::sqrt(3.0) * hex.a) + 0.5 * Kj)) + 2;
  const int ni = 2 * Ki + 1, nj = 2 * Kj + 1;
  std::vector<int> count(static_cast<std::size_t>(ni) * nj, 0);
  std::vector<double> cx(count.size()), cy(count.size());
  auto index = [&](int i, int j) { return static_cast<std::size_t>(i + Ki) * nj + (j + Kj); };

  Snapshot s;
  s.link = LinkKind::cellular;
  s.noise = p.n0;
  const auto n = std::poisson_distribution<long>(p.lambda * std::numbers::pi * rho * rho)(rng);
  long cellular_total = 0;
  for (long k = 0; k < n; ++k) {
    const double r = rho * std::sqrt(uniform_open(rng));
    const double phi = 2.0 * std::numbers::pi * uniform_open(rng);
    if (uniform_open(rng) < p.q && d2d_length_sample(p, false, rng) <= p.theta) continue;
    const double x = r * std::cos(phi), y = r * std::sin(phi);
    int i = 0, j = 0;
    hex.nearest(x, y, i, j);
    const std::size_t id = index(i, j);
    ++cellular_total;
    // reservoir pick of the active UE
    if (uniform_open(rng) * ++count[id] < 1.0) {
      cx[id] = x;
      cy[id] = y;
    }
  }
  s.empty_cell = cellular_total == 0;
  s.cell_users = 1 + count[index(0, 0)];

  // the typical UE sits uniformly in the center cell; with inverted power its position drops out
  s.signal = sample(cfg.fading_intended, rng);

  for (int i = -Ki; i <= Ki; ++i) {
    for (int j = -Kj; j <= Kj; ++j) {
      if (i == 0 && j == 0) continue;
      const std::size_t id = index(i, j);
      if (count[id] == 0) continue;
      double bx, by;
      hex.center(i, j, bx, by);
      const double L2 = (cx[id] - bx) * (cx[id] - bx) + (cy[id] - by) * (cy[id] - by);
      const double r2 = cx[id] * cx[id] + cy[id] * cy[id];
      s.interference += std::pow(L2 / r2, 0.5 * p.tau_c) * sample(cfg.fading_interferer, rng);
    }
  }
  return detail::finish(s);
}

// Interference under the exclusion-zone model behind the cellular Laplace transform: interferers
// form a PPP of intensity lambda_b outside radius R, each at a uniform-in-cell distance to its BS.
inline double model_cellular_interference(const NetworkParams& p, const FadingModel& interferer, double window_cells,
                                          rng_stream& rng) {
  const double R = p.cell_radius();
  auto mark = [&](rng_stream& r) {
    const double L = cellular_length_sample(p, r);
    return std::pow(L, p.tau_c) * sample(interferer, r);
  };
  return detail::annulus_shot_noise(p.lambda_b, R, window_cells * R, p.tau_c, rng, mark);
}

// D2D interference drawn exactly from its Laplace transform exp(-c s^delta).
inline double stable_interference(double c, double delta, rng_stream& rng) {
  if (c == 0.0) return 0.0;
  return std::pow(c, 1.0 / delta) * positive_stable(delta, rng);
}

inline unsigned thread_count(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* e = std::getenv("D2DGEO_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(e, &end, 10);
    if (end != e && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// f(i) for i in [0, n), contiguous blocks per thread; the first exception is rethrown.
template <class F>
inline void parallel_for(std::size_t n, unsigned threads, F&& f) {
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t lo = n * t / threads, hi = n * (t + 1) / threads;
      try {
        for (std::size_t i = lo; i < hi; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(m);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// One snapshot per drop; drop i uses substream(seed, i), so results do not depend on the thread count.
inline std::vector<Snapshot> simulate(const SimConfig& cfg) {
  validate(cfg);
  if (cfg.link == LinkKind::d2d && !(p_d2d_mode(cfg.params) > 0.0)) {
    throw config_error("theta = 0 leaves no D2D-mode links to simulate");
  }
  std::vector<Snapshot> out(cfg.drops);
  parallel_for(cfg.drops, thread_count(cfg.threads), [&](std::size_t i) {
    auto rng = substream(cfg.seed, i);
    out[i] = cfg.link == LinkKind::d2d ? d2d_snapshot(cfg, rng) : cellular_snapshot(cfg, rng);
  });
  return out;
}

struct McMetric {
  enum class Kind { ccdf, rate, bep };
  Kind kind = Kind::rate;
  std::vector<double> sir_db;  // ccdf thresholds
  double a = 0.5;
  double b = 0.5;

  static McMetric ccdf(std::vector<double> grid_db) { return {Kind::ccdf, std::move(grid_db), 0.5, 0.5}; }
  static McMetric rate() { return {Kind::rate, {}, 0.5, 0.5}; }
  static McMetric bep(double a, double b) { return {Kind::bep, {}, a, b}; }
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

template <class F>
inline MeanSe mean_se(const std::vector<Snapshot>& v, F&& f) {
  double s1 = 0.0, s2 = 0.0;
  for (const auto& x : v) {
    const double y = f(x);
    s1 += y;
    s2 += y * y;
  }
  const double n = static_cast<double>(v.size());
  const double m = s1 / n;
  return {m, std::sqrt(std::max(0.0, s2 / n - m * m) / std::max(1.0, n - 1.0))};
}

// P(SIR > 10^{x/10}) on the grid, with binomial standard errors.
inline CurveSeries empirical_ccdf(std::vector<double> sir, const std::vector<double>& grid_db, std::string label) {
  std::sort(sir.begin(), sir.end());
  CurveSeries c;
  c.label = std::move(label);
  c.x_name = "SIR threshold";
  c.x_unit = "dB";
  c.y_name = "CCDF";
  const double n = static_cast<double>(sir.size());
  for (double xdb : grid_db) {
    const double x = std::pow(10.0, xdb / 10.0);
    const auto above = sir.end() - std::upper_bound(sir.begin(), sir.end(), x);
    const double pr = above / n;
    c.points.push_back({xdb, pr, std::sqrt(pr * (1.0 - pr) / n)});
  }
  return c;
}

inline double rate_prefactor(const NetworkParams& p, LinkKind link) {
  return link == LinkKind::d2d ? p.beta * p.epsilon : (1.0 - p.beta) * mean_inverse_n(p);
}

inline CurveSeries estimate(const SimConfig& cfg, const McMetric& metric, const std::vector<Snapshot>& drops) {
  if (drops.size() < 1000) throw config_error("Monte Carlo estimates need at least 1000 drops");
  const auto& p = cfg.params;
  const double snr_db = 10.0 * std::log10(mean_power(cfg.fading_intended) / p.n0);
  const std::string who = to_string(cfg.link);
  if (metric.kind == McMetric::Kind::ccdf) {
    std::vector<double> sir;
    sir.reserve(drops.size());
    for (const auto& s : drops) sir.push_back(s.sir());
    return empirical_ccdf(std::move(sir), metric.sir_db, who + " SIR CCDF (simulation)");
  }
  CurveSeries c;
  c.x_name = "SNR";
  c.x_unit = "dB";
  MeanSe r;
  if (metric.kind == McMetric::Kind::rate) {
    const double pre = rate_prefactor(p, cfg.link);
    r = mean_se(drops, [&](const Snapshot& s) { return pre * std::log1p(s.sinr); });
    c.label = who + " rate (simulation)";
    c.y_name = "average rate";
    c.y_unit = "nats/s/Hz";
  } else {
    r = mean_se(drops, [&](const Snapshot& s) { return 0.5 * gamma_q(metric.b, metric.a * s.sinr); });
    c.label = who + " BEP (simulation)";
    c.y_name = "average BEP";
  }
  c.points.push_back({snr_db, r.mean, r.se});
  return c;
}

inline CurveSeries estimate(const SimConfig& cfg, const McMetric& metric) {
  return estimate(cfg, metric, simulate(cfg));
}

}  // namespace d2dgeo
