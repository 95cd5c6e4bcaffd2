#pragma once

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "d2dgeo/fading.hpp"
#include "d2dgeo/interference.hpp"
#include "d2dgeo/mcsim.hpp"
#include "d2dgeo/metrics.hpp"
#include "d2dgeo/sinr_functional.hpp"

namespace d2dgeo {

struct ValidationOptions {
  NetworkParams params = default_params();
  std::size_t drops = 100000;
  std::uint64_t seed = 20240601;
  unsigned threads = 0;
  std::vector<int> only;  // empty: all checks
};

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

inline double n0_for_snr_db(double snr_db, double w = 1.0) { return w / std::pow(10.0, snr_db / 10.0); }

// Fornberg weights for the d-th derivative at 0 on integer nodes -K..K.
inline std::vector<long double> fornberg_weights(int d, int K) {
  const int n = 2 * K + 1;
  std::vector<std::vector<long double>> c(n, std::vector<long double>(d + 1, 0));
  long double c1 = 1, c4 = -K;
  c[0][0] = 1;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, d);
    long double c2 = 1, c5 = c4;
    c4 = i - K;
    for (int j = 0; j < i; ++j) {
      const long double c3 = (long double)(i - j);
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<long double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][d];
  return w;
}

// (1/(2 Gamma(b) Gamma(i))) d^i/dx^i [x^{i-1} Gamma(b, a x)] by central differences of order >= 8, b in {1/2, 1}
inline double bep_g_finite_difference(int i, double a, double b, double x) {
  const int K = 4 + (i + 1) / 2;
  const long double h = std::min(0.04L, (long double)x / (2 * K));
  const auto w = fornberg_weights(i, K);
  auto upper = [&](long double y) {
    return b == 1.0 ? std::exp(-y) : std::sqrt(std::numbers::pi_v<long double>) * std::erfc(std::sqrt(y));
  };
  long double acc = 0;
  for (int k = -K; k <= K; ++k) {
    const long double xk = x + k * h;
    acc += w[k + K] * std::pow(xk, (long double)(i - 1)) * upper(a * xk);
  }
  acc /= std::pow(h, (long double)i);
  return static_cast<double>(acc / (2 * std::tgamma((long double)b) * std::tgamma((long double)i)));
}

inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = cdf(xs[i]);
    d = std::max({d, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
  }
  return d;
}

inline std::vector<double> sir_grid_db() {
  std::vector<double> g;
  for (int k = -20; k <= 40; ++k) g.push_back(k);
  return g;
}

inline ScenarioSpec scenario(const ValidationOptions& o, FadingModel f) {
  ScenarioSpec s;
  s.params = o.params;
  s.fading_intended = f;
  s.fading_interferer = f;
  s.mc_drops = o.drops;
  s.seed = o.seed;
  s.threads = o.threads;
  return s;
}

// 1: Rayleigh and Nakagami-2 reached from both families
inline CheckResult check_special_case_collapse(const ValidationOptions& o) {
  CheckResult r{1, "special-case collapse across families", true, "", 0, 10};
  double worst = 0.0;
  const std::vector<std::pair<FadingModel, FadingModel>> pairs = {{kappa_mu(0.0, 1.0), eta_mu(1.0, 0.5)},
                                                                   {kappa_mu(0.0, 2.0), eta_mu(1.0, 1.0)}};
  for (const auto& [a, b] : pairs) {
    for (double snr : {0.0, 5.0, 10.0, 20.0}) {
      for (auto link : {LinkKind::d2d, LinkKind::cellular}) {
        auto sa = scenario(o, a), sb = scenario(o, b);
        sa.params.n0 = sb.params.n0 = n0_for_snr_db(snr);
        const double va = link_expectation(sa, link, GFamily::rate());
        const double vb = link_expectation(sb, link, GFamily::rate());
        worst = std::max(worst, rel_diff(va, vb));
      }
    }
  }
  r.passed = worst <= 1e-6;
  r.detail = fmt("max relative difference %.3g (tol 1e-6)", worst);
  return r;
}

// Paper-style Rayleigh integral: int_0^inf L_I((e^t - 1)/w) e^{-(e^t - 1) N0 / w} dt
template <class LT>
inline double rayleigh_log_integral(const LT& L, double w, double n0) {
  boost::math::quadrature::exp_sinh<double> es;
  auto h = [&](double t) {
    if (!(t < 700.0)) return 0.0;
    const double e = std::expm1(t);
    return L(e / w) * std::exp(-e * n0 / w);
  };
  return es.integrate(h, 0.0, std::numeric_limits<double>::infinity(), 1e-12);
}

// 2: engine vs the Rayleigh closed integral
inline CheckResult check_rayleigh_closed_form(const ValidationOptions& o) {
  CheckResult r{2, "Rayleigh engine vs closed integral", true, "", 0, 5};
  double worst = 0.0;
  for (double w : {1.0, 2.5}) {
    const auto f = kappa_mu(0.0, 1.0, w);
    auto s = scenario(o, f);
    for (double snr : {0.0, 5.0, 10.0, 20.0}) {
      s.params.n0 = n0_for_snr_db(snr, w);
      for (auto link : {LinkKind::d2d, LinkKind::cellular}) {
        const auto L = interference_transform(s, link);
        const double engine = link_expectation(s, link, GFamily::rate());
        worst = std::max(worst, rel_diff(engine, rayleigh_log_integral(L, w, s.params.n0)));
      }
    }
  }
  r.passed = worst <= 1e-6;
  r.detail = fmt("max relative difference %.3g (tol 1e-6)", worst);
  return r;
}

// 3: D2D constant from closed forms vs moment product
inline CheckResult check_d2d_constant(const ValidationOptions& o) {
  CheckResult r{3, "D2D constant closed form vs moment product", true, "", 0, 1};
  std::vector<NetworkParams> ps(5, o.params);
  ps[1].theta = 40.0;
  ps[1].q = 0.5;
  ps[2].tau_d = 3.0;
  ps[2].epsilon = 0.3;
  ps[3].tau_d = 5.5;
  ps[3].theta = std::numeric_limits<double>::infinity();
  ps[4].xi = 3.0 / (std::numbers::pi * 500.0 * 500.0);
  ps[4].theta = 400.0;
  ps[4].tau_d = 3.7;
  const std::vector<FadingModel> km = {kappa_mu(0.0, 1.0), kappa_mu(3.0, 2.0, 1.7), kappa_mu(0.4, 0.6, 0.5),
                                       kappa_mu(10.0, 0.8), kappa_mu(1.0, 4.5, 2.0)};
  const std::vector<FadingModel> em = {eta_mu(1.0, 0.5), eta_mu(0.25, 0.5, 2.0), eta_mu(0.1, 1.7),
                                       eta_mu(4.0, 0.9, 0.6), eta_mu(0.6, 3.0)};
  double worst = 0.0;
  int sets = 0;
  for (int k = 0; k < 5; ++k) {
    for (const auto& f : {km[k], em[k]}) {
      worst = std::max(worst, rel_diff(d2d_constant_c_closed(f, ps[k]), d2d_constant_c_generic(f, ps[k])));
      ++sets;
    }
  }
  r.passed = worst <= 1e-10;
  r.detail = fmt("%g parameter sets, max relative difference %.3g (tol 1e-10)", sets, worst);
  return r;
}

// 4: cellular quadrature vs hypergeometric special cases
inline CheckResult check_cellular_hypergeometric(const ValidationOptions& o) {
  CheckResult r{4, "cellular Laplace quadrature vs hypergeometric forms", true, "", 0, 30};
  const std::vector<FadingModel> models = {kappa_mu(0.0, 2.0), eta_mu(1.0, 1.0), kappa_mu(0.0, 1.0),
                                           eta_mu(1.0, 0.5), kappa_mu(0.0, 0.5), eta_mu(0.25, 0.5)};
  double worst = 0.0;
  for (const auto& f : models) {
    for (double s : {0.1, 1.0, 10.0}) {
      const double h = cellular_exponent_hypergeometric(s, f, o.params);
      const double lh = std::exp(-h);
      worst = std::max(worst, rel_diff(std::exp(-cellular_exponent(s, f, o.params)), lh));
      worst = std::max(worst, rel_diff(std::exp(-cellular_exponent_nested(s, f, o.params)), lh));
    }
  }
  r.passed = worst <= 1e-7;
  r.detail = fmt("Nakagami-2, Rayleigh, one-sided Gaussian, Hoyt; max relative difference %.3g (tol 1e-7)", worst);
  return r;
}

struct McComparison {
  double sup_gap = 0.0;
  double rate_mc = 0.0;
  double rate_se = 0.0;
  double rate_analytic = 0.0;
};

inline McComparison compare_link(const ValidationOptions& o, const FadingModel& f, LinkKind link,
                                 bool exponential_signal = false) {
  auto s = scenario(o, f);
  s.link = link;
  const auto cfg = sim_config(s, link);
  const auto drops = simulate(cfg);
  const auto grid = sir_grid_db();
  const auto emp = estimate(cfg, McMetric::ccdf(grid), drops);
  CurveSeries model;
  if (exponential_signal) {
    // exponential W: P(W > x I) = L_I(x / w) exactly
    model = emp;
    for (auto& p : model.points) {
      p.y = std::exp(-cellular_exponent(std::pow(10.0, p.x / 10.0) / mean_power(f), s.fading_interferer, s.params));
      p.se.reset();
    }
  } else {
    model = sir_ccdf(s, grid);
  }
  McComparison m;
  m.sup_gap = sup_gap(emp, model);
  const auto rate = estimate(cfg, McMetric::rate(), drops).points.front();
  m.rate_mc = rate.y;
  m.rate_se = *rate.se;
  m.rate_analytic = rate_prefactor(s.params, link) * link_expectation(s, link, GFamily::rate());
  return m;
}

// 5: D2D link against the simulator
inline CheckResult check_d2d_monte_carlo(const ValidationOptions& o) {
  CheckResult r{5, "D2D analytic vs Monte Carlo", true, "", 0, 300};
  for (const auto& f : {kappa_mu(0.0, 1.0), kappa_mu(3.0, 2.0)}) {
    const auto m = compare_link(o, f, LinkKind::d2d);
    const double z = std::abs(m.rate_mc - m.rate_analytic) / m.rate_se;
    const bool ok = m.sup_gap < 0.02 && z < 3.0;
    r.passed = r.passed && ok;
    r.detail += describe(f) + fmt(": CCDF sup gap %.4f, rate %.5f vs %.5f", m.sup_gap, m.rate_analytic, m.rate_mc) +
                fmt(" (%.2f SE); ", z);
  }
  return r;
}

// 6: cellular link against the hexagonal-grid simulator
inline CheckResult check_cellular_monte_carlo(const ValidationOptions& o) {
  CheckResult r{6, "cellular analytic vs hexagonal-grid Monte Carlo", true, "", 0, 300};
  const auto m = compare_link(o, kappa_mu(0.0, 1.0), LinkKind::cellular, true);
  r.passed = m.sup_gap <= 0.04;
  r.detail = fmt("Rayleigh: CCDF sup gap %.4f (tol 0.04); rate %.5f analytic vs %.5f simulated", m.sup_gap,
                 m.rate_analytic, m.rate_mc);
  return r;
}

inline int sign_changes(const std::vector<double>& v) {
  int changes = 0, last = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double d = v[i] - v[i - 1];
    const int sg = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (sg != 0 && last != 0 && sg != last) ++changes;
    if (sg != 0) last = sg;
  }
  return changes;
}

// 7: qualitative claims at the default setup
inline CheckResult check_qualitative(const ValidationOptions& o) {
  CheckResult r{7, "qualitative claims at defaults", true, "", 0, 120};
  const auto base = scenario(o, kappa_mu(0.0, 1.0));
  std::string d;

  const auto r0 = avg_rates(base);
  const bool a = r0.d2d_mode > r0.cellular;
  d += fmt("(a) R_hat_d %.4f vs R_c %.4f; ", r0.d2d_mode, r0.cellular);

  std::vector<double> rc, rd;
  for (int i = 0; i < 20; ++i) {
    auto s = base;
    s.params.n0 = n0_for_snr_db(-5.0 + 35.0 * i / 19.0);
    const auto v = avg_rates(s);
    rc.push_back(v.cellular);
    rd.push_back(v.d2d_mode);
  }
  const int sc = std::max(sign_changes(rc), sign_changes(rd));
  const bool b = sc <= 1;
  d += fmt("(b) SNR sweep sign changes %g; ", sc);

  std::vector<double> th, rt;
  for (int i = 0; i < 20; ++i) {
    auto s = base;
    s.params.theta = 20.0 + 480.0 * i / 19.0;
    th.push_back(s.params.theta);
    rt.push_back(avg_rates(s).potential_d2d);
  }
  const auto imax = std::max_element(rt.begin(), rt.end()) - rt.begin();
  const bool c = imax > 0 && imax < 19;
  d += fmt("(c) R_d peak at theta %.0f m; ", th[imax]);

  // R_hat_d - R_c is affine in beta, so two evaluations locate the crossing
  auto s0 = base, s1 = base;
  s0.params.beta = 0.0;
  s1.params.beta = 1.0;
  const double gap0 = avg_rates(s0).d2d_mode - avg_rates(s0).cellular;
  const double gap1 = avg_rates(s1).d2d_mode - avg_rates(s1).cellular;
  const double beta_x = gap0 / (gap0 - gap1);
  const bool dd = beta_x > 0.0 && beta_x < 0.2;
  d += fmt("(d) beta crossing %.4f; ", beta_x);

  auto se = scenario(o, kappa_mu(1.0, 2.0));
  se.params.n0 = n0_for_snr_db(10.0);
  const auto bep = avg_bep(se);
  const bool e = bep.d2d_mode > bep.cellular;
  d += fmt("(e) P_hat_ed %.5f vs P_ec %.5f", bep.d2d_mode, bep.cellular);

  r.passed = a && b && c && dd && e;
  std::string bad;
  const bool parts[] = {a, b, c, dd, e};
  for (int k = 0; k < 5; ++k) {
    if (!parts[k]) bad += std::string(bad.empty() ? "" : ",") + char('a' + k);
  }
  r.detail = d + (bad.empty() ? "" : "; failing: (" + bad + ")");
  return r;
}

// 8: closed-form BEP derivative vs finite differences
inline CheckResult check_bep_derivative(const ValidationOptions& o) {
  CheckResult r{8, "BEP derivative closed form vs finite differences", true, "", 0, 1};
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> U(0.3, 6.0);
  double worst = 0.0;
  for (int i = 1; i <= 6; ++i) {
    for (double a : {0.5, 1.0}) {
      for (double b : {0.5, 1.0}) {
        for (int k = 0; k < 10; ++k) {
          const double x = U(rng);
          worst = std::max(worst, rel_diff(bep_g(i, a, b, x), bep_g_finite_difference(i, a, b, x)));
        }
      }
    }
  }
  r.passed = worst <= 1e-5;
  r.detail = fmt("240 points, max relative difference %.3g (tol 1e-5)", worst);
  return r;
}

// 9: sampler fidelity
inline CheckResult check_samplers(const ValidationOptions& o) {
  CheckResult r{9, "sampler fidelity", true, "", 0, 60};
  const int n = 100000;
  const double crit = 1.628 / std::sqrt(double(n));  // 1% level
  const std::vector<FadingModel> models = {kappa_mu(0.0, 1.0), kappa_mu(3.0, 2.0, 1.5), kappa_mu(0.5, 0.7),
                                           eta_mu(1.0, 0.5),   eta_mu(0.25, 1.3, 2.0), eta_mu(5.0, 0.6)};
  double worst_ks = 0.0;
  std::uint64_t stream = 0;
  for (const auto& f : models) {
    auto rng = substream(o.seed, stream++);
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample(f, rng);
    const double d = ks_statistic(std::move(xs), [&](double x) { return 1.0 - ccdf(f, x); });
    worst_ks = std::max(worst_ks, d);
  }
  const double c = 0.7, delta = 0.5;
  auto rng = substream(o.seed, stream++);
  std::vector<double> draws(n);
  for (auto& d : draws) d = stable_interference(c, delta, rng);
  double worst_z = 0.0;
  for (double s : {0.01, 0.1, 1.0, 5.0, 20.0}) {
    double s1 = 0, s2 = 0;
    for (double d : draws) {
      const double e = std::exp(-s * d);
      s1 += e;
      s2 += e * e;
    }
    const double m = s1 / n, sd = std::sqrt((s2 / n - m * m) / n);
    worst_z = std::max(worst_z, std::abs(m - std::exp(-c * std::pow(s, delta))) / sd);
  }
  r.passed = worst_ks < crit && worst_z < 3.0;
  r.detail = fmt("max KS %.5f (crit %.5f); stable transform max %.2f sigma", worst_ks, crit, worst_z);
  return r;
}

}  // namespace detail

inline std::vector<CheckResult> run_validation(const ValidationOptions& o,
                                               const std::function<void(const CheckResult&)>& on_result = {}) {
  using Check = CheckResult (*)(const ValidationOptions&);
  const Check checks[] = {detail::check_special_case_collapse, detail::check_rayleigh_closed_form,
                          detail::check_d2d_constant,          detail::check_cellular_hypergeometric,
                          detail::check_d2d_monte_carlo,       detail::check_cellular_monte_carlo,
                          detail::check_qualitative,           detail::check_bep_derivative,
                          detail::check_samplers};
  std::vector<CheckResult> out;
  for (int k = 0; k < 9; ++k) {
    if (!o.only.empty() && std::find(o.only.begin(), o.only.end(), k + 1) == o.only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = checks[k](o);
    } catch (const std::exception& e) {
      r.id = k + 1;
      r.name = "check " + std::to_string(k + 1);
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.budget_seconds > 0.0 && r.seconds > r.budget_seconds) {
      r.passed = false;
      r.detail += detail::fmt(" [over runtime budget: %.1f s > %.0f s]", r.seconds, r.budget_seconds);
    }
    if (on_result) on_result(r);
    out.push_back(r);
  }
  return out;
}

inline std::string format_result(const CheckResult& r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "criterion %d: %s (%.1f s) ", r.id, r.passed ? "PASS" : "FAIL", r.seconds);
  return buf + r.name + ": " + r.detail;
}

}  // namespace d2dgeo
