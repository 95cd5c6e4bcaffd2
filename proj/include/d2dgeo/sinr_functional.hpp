#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "d2dgeo/errors.hpp"
#include "d2dgeo/fading.hpp"
#include "d2dgeo/interference.hpp"
#include "d2dgeo/quadrature.hpp"
#include "d2dgeo/specfun.hpp"

namespace d2dgeo {

// How the outer integral over the interference-weighted kernel is evaluated.
// adaptive: panelled GK in log(y), n-series summed inside the integrand.
// gauss_laguerre: the M-node rule on e^{-x}, remainder dropped.
struct QuadratureSpec {
  enum class Method { adaptive, gauss_laguerre };
  Method method = Method::adaptive;
  int laguerre_order = 64;
  double series_tail_eps = 1e-10;
  int max_series_terms = 500;
  double rel_tol = 1e-10;
};

inline void validate(const QuadratureSpec& q) {
  if (q.laguerre_order < 8 || q.laguerre_order > 256) throw config_error("laguerre_order must lie in [8, 256]");
  if (!(q.series_tail_eps > 0.0 && q.series_tail_eps < 1e-4)) throw config_error("series_tail_eps must lie in (0, 1e-4)");
  if (q.max_series_terms < 1) throw config_error("max_series_terms must be >= 1");
  if (!(q.rel_tol > 0.0 && q.rel_tol < 1e-3)) throw config_error("rel_tol must lie in (0, 1e-3)");
}

inline const char* to_string(QuadratureSpec::Method m) {
  return m == QuadratureSpec::Method::adaptive ? "adaptive" : "gauss-laguerre";
}

// (1/z)(1 - (1+z)^{-i})
inline double rate_g(double i, double z) {
  if (!(i > 0.0)) throw domain_error("rate_g: order must be positive");
  if (!(z >= 0.0)) throw domain_error("rate_g: argument must be nonnegative");
  if (z == 0.0) return i;
  return -std::expm1(-i * std::log1p(z)) / z;
}

inline int integer_order(double i, const char* what) {
  if (!(i >= 1.0) || !detail::near_integer(i, 1e-12)) {
    throw unsupported_order(std::string(what) + ": derivative order " + std::to_string(i) +
                            " is not a positive integer");
  }
  return static_cast<int>(std::lround(i));
}

// (1 / (2 Gamma(b) Gamma(i))) d^i/dx^i (x^{i-1} Gamma(b, a x))
//   = -(a / (2 Gamma(b))) (a x)^{b-1} e^{-a x} L_{i-1}^{(b)}(a x)
inline double bep_g(double i, double a, double b, double x) {
  const int n = integer_order(i, "bep_g");
  if (!(a > 0.0 && b > 0.0)) throw domain_error("bep_g: a and b must be positive");
  if (!(x > 0.0)) throw domain_error("bep_g: argument must be positive");
  const double y = a * x;
  const double lead = std::exp((b - 1.0) * std::log(y) - y - ln_gamma(b));
  return -0.5 * a * lead * laguerre_poly<double>(n - 1, b, y);
}

// Same quantity from the double Leibniz expansion, in long double.
inline double bep_g_leibniz(double i, double a, double b, double x) {
  const int n = integer_order(i, "bep_g_leibniz");
  if (!(a > 0.0 && b > 0.0 && x > 0.0)) throw domain_error("bep_g_leibniz: arguments must be positive");
  using L = long double;
  const L la = a, lb = b, lx = x;
  const L base = std::pow(la, lb) * std::exp(-la * lx);
  L total = 0;
  for (int k = 1; k <= n; ++k) {
    // d^k Gamma(b, a x) = -d^{k-1}[a^b x^{b-1} e^{-a x}]
    L dk = 0, falling = 1, binom_j = 1;
    for (int j = 0; j <= k - 1; ++j) {
      dk += binom_j * falling * std::pow(lx, lb - 1 - j) * std::pow(-la, L(k - 1 - j));
      falling *= (lb - 1 - j);
      binom_j = binom_j * (k - 1 - j) / (j + 1);
    }
    dk *= -base;
    // C(n,k) (n-1)!/(k-1)! x^{k-1}
    L c = std::exp(std::lgamma(L(n + 1)) - std::lgamma(L(k + 1)) - std::lgamma(L(n - k + 1)) + std::lgamma(L(n)) -
                   std::lgamma(L(k)));
    total += c * std::pow(lx, L(k - 1)) * dk;
  }
  return static_cast<double>(total / (2 * std::tgamma(lb) * std::tgamma(L(n))));
}

// A function g of the SINR together with its derivative-order family g_i.
struct GFamily {
  enum class Tag { rate, bep, custom };
  Tag tag = Tag::rate;
  double a = 0.5;
  double b = 0.5;
  double g0 = 0.0;
  std::function<double(double, double)> custom_g;
  std::string label;

  static GFamily rate() { return {Tag::rate, 0.0, 0.0, 0.0, {}, "rate"}; }

  // Gamma(b, a x) / (2 Gamma(b))
  static GFamily bep(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw config_error("bep: a and b must be positive");
    return {Tag::bep, a, b, 0.5, {}, "bep"};
  }

  static GFamily custom(double g0, std::function<double(double, double)> g_i, std::string label = "custom") {
    return {Tag::custom, 0.0, 0.0, g0, std::move(g_i), std::move(label)};
  }

  double g_i(double i, double z) const {
    switch (tag) {
      case Tag::rate:
        return rate_g(i, z);
      case Tag::bep:
        return bep_g(i, a, b, z);
      default:
        return custom_g(i, z);
    }
  }

  // Value of g itself at x, used by the no-interference oracle and Monte Carlo.
  double value(double x) const {
    switch (tag) {
      case Tag::rate:
        return std::log1p(x);
      case Tag::bep:
        return 0.5 * gamma_q(b, a * x);
      default:
        throw domain_error("custom g family has no pointwise value");
    }
  }

  bool supports_order(double i) const { return tag != Tag::bep || (i >= 1.0 && detail::near_integer(i, 1e-12)); }
};

namespace detail {

inline double noise_floor(double n0, double w) { return std::max(n0, 1e-12 * w); }

inline void check_orders(const GFamily& g, const GammaMixture& mix) {
  for (double k : mix.shapes) {
    if (!g.supports_order(k)) {
      throw unsupported_order("analytic " + g.label + " needs integer derivative orders; got " + std::to_string(k));
    }
  }
}

// sum_n w_n g_{k_n}(y)
inline double mixed_kernel(const GFamily& g, const GammaMixture& mix, double y) {
  double acc = 0.0;
  for (std::size_t n = 0; n < mix.weights.size(); ++n) acc += mix.weights[n] * g.g_i(mix.shapes[n], y);
  return acc;
}

// J = int_0^inf G(y) L_I(y/sigma) e^{-y N0/sigma} dy, panelled in t = log y.
template <class LT>
inline double kernel_integral_adaptive(const GFamily& g, const GammaMixture& mix, const LT& L, double n0,
                                       double rel_tol) {
  const double sigma = mix.scale;
  const double inv_theta = n0 / sigma;
  auto weight = [&](double y) { return L(y / sigma) * std::exp(-y * inv_theta); };
  // upper end: the tail weight has fallen below 1e-22
  double y_hi = 64.0;
  while (y_hi < 1e300 && weight(y_hi) > 1e-22) y_hi *= 2.0;
  if (g.tag == GFamily::Tag::bep) y_hi = std::min(y_hi, (60.0 + 4.0 * mix.shapes.back()) / g.a);
  const double t_lo = std::log(1e-28), t_hi = std::log(y_hi);
  auto f = [&](double t) {
    const double y = std::exp(t);
    return mixed_kernel(g, mix, y) * weight(y) * y;
  };
  const int panels = std::max(8, static_cast<int>(std::ceil((t_hi - t_lo) / 1.5)));
  double total = 0.0, err = 0.0, l1 = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = t_lo + (t_hi - t_lo) * k / panels;
    const double b = t_lo + (t_hi - t_lo) * (k + 1) / panels;
    const Panel p = gk_panel(f, a, b, rel_tol);
    total += p.value;
    err += p.error;
    l1 += p.l1;
  }
  if (!std::isfinite(total) || err > std::max(1e3 * rel_tol * l1, 1e-300)) {
    throw convergence_error("SINR functional: outer quadrature did not converge", err);
  }
  return total;
}

// theta sum_m c_m G(theta x_m) L_I(x_m / N0), theta = sigma / N0
template <class LT>
inline double kernel_integral_laguerre(const GFamily& g, const GammaMixture& mix, const LT& L, double n0, int M) {
  const LaguerreRule rule = gauss_laguerre(M);
  const double theta = mix.scale / n0;
  double total = 0.0;
  for (int m = 0; m < M; ++m) {
    const double x = rule.nodes[m];
    total += rule.weights[m] * mixed_kernel(g, mix, theta * x) * L(x / n0);
  }
  return theta * total;
}

}  // namespace detail

// E[g(W / (I + N0))] for W drawn from `intended` and I with Laplace transform L.
template <class LT>
inline double expect(const GFamily& g, const FadingModel& intended, const LT& L, double n0,
                     const QuadratureSpec& quad = {}) {
  validate(intended);
  validate(quad);
  if (!(n0 >= 0.0) || !std::isfinite(n0)) throw domain_error("expect: noise power must be finite and >= 0");
  const GammaMixture mix = gamma_mixture(intended, quad.series_tail_eps, quad.max_series_terms);
  detail::check_orders(g, mix);
  const double nf = detail::noise_floor(n0, mean_power(intended));
  const double j = quad.method == QuadratureSpec::Method::adaptive
                       ? detail::kernel_integral_adaptive(g, mix, L, nf, quad.rel_tol)
                       : detail::kernel_integral_laguerre(g, mix, L, nf, quad.laguerre_order);
  return g.g0 + j;
}

template <class LT>
inline double expect_kappa_mu(const GFamily& g, const KappaMuParams& m, const LT& L, double n0,
                              const QuadratureSpec& quad = {}) {
  return expect(g, FadingModel{m}, L, n0, quad);
}

template <class LT>
inline double expect_eta_mu(const GFamily& g, const EtaMuParams& m, const LT& L, double n0,
                            const QuadratureSpec& quad = {}) {
  return expect(g, FadingModel{m}, L, n0, quad);
}

// |E_M - E_2M| / |E_2M| for the Gauss-Laguerre rule.
template <class LT>
inline double laguerre_doubling_gap(const GFamily& g, const FadingModel& intended, const LT& L, double n0,
                                    QuadratureSpec quad = {}) {
  quad.method = QuadratureSpec::Method::gauss_laguerre;
  const double a = expect(g, intended, L, n0, quad);
  quad.laguerre_order = std::min(2 * quad.laguerre_order, 256);
  const double b = expect(g, intended, L, n0, quad);
  return std::abs(a - b) / std::abs(b);
}

}  // namespace d2dgeo
