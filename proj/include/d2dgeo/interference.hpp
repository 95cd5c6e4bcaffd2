#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "d2dgeo/errors.hpp"
#include "d2dgeo/fading.hpp"
#include "d2dgeo/network.hpp"
#include "d2dgeo/quadrature.hpp"
#include "d2dgeo/specfun.hpp"

namespace d2dgeo {

// xi / gamma(2, xi pi theta^2)
inline double xi_hat(const NetworkParams& p) { return p.xi / lower_incomplete_gamma(2.0, xi_pi_theta2(p)); }

// c from the per-family closed forms (kappa-mu with 1F1, eta-mu with 2F1).
inline double d2d_constant_c_closed(const FadingModel& f, const NetworkParams& p) {
  const double d = p.delta_d();
  if (p.q == 0.0 || p.epsilon == 0.0 || p.theta == 0.0) return 0.0;
  const double lead = p.q * p.epsilon * p.lambda / (xi_hat(p) * sinc_norm(d));
  if (auto* k = std::get_if<KappaMuParams>(&f)) {
    const double mu = k->mu, ka = k->kappa;
    return lead * std::exp(-mu * ka) * hyp1f1(mu + d, mu, mu * ka) * std::pow(k->mean_power / ((1 + ka) * mu), d) *
           binomial_real(mu + d - 1.0, d);
  }
  const auto& e = std::get<EtaMuParams>(f);
  const double mu = e.mu, h = e.h();
  return lead / std::pow(h, mu) * hyp2f1(mu + d / 2 + 0.5, mu + d / 2, mu + 0.5, e.rho()) *
         std::pow(e.mean_power / (2 * mu * h), d) * binomial_real(2 * mu + d - 1.0, d);
}

// c = pi eps lambda_d E[G^delta] E[P_hat^delta] Gamma(1 - delta)
inline double d2d_constant_c_generic(const FadingModel& f, const NetworkParams& p) {
  const double d = p.delta_d();
  const double ld = intensities(p).lambda_d;
  if (ld == 0.0 || p.epsilon == 0.0) return 0.0;
  return std::numbers::pi * p.epsilon * ld * moment(f, d) * power_moment(p, PowerKind::d2d_mode, d) *
         std::tgamma(1.0 - d);
}

inline double d2d_constant_c(const FadingModel& f, const NetworkParams& p) {
  const double a = d2d_constant_c_closed(f, p);
  const double b = d2d_constant_c_generic(f, p);
  if (a == 0.0 && b == 0.0) return 0.0;
  if (std::abs(a - b) > 1e-10 * std::max(std::abs(a), std::abs(b))) {
    throw consistency_error("D2D interference constant: closed form " + std::to_string(a) +
                            " disagrees with moment product " + std::to_string(b));
  }
  return a;
}

inline double laplace_d2d(double s, const FadingModel& f, const NetworkParams& p) {
  if (!(s >= 0.0)) throw domain_error("laplace_d2d: s must be nonnegative");
  return std::exp(-d2d_constant_c(f, p) * std::pow(s, p.delta_d()));
}

namespace detail {

// Lower cut for the exclusion-zone integrals: below it the integrand is bounded by t w u^{tau-3}
// whose integral stays under `budget`.
inline double cellular_cut(double t_mean, double tau, double budget) {
  if (!(t_mean > 0.0)) return 1.0;
  return std::min(1.0, std::pow(budget * (tau - 2.0) / t_mean, 1.0 / (tau - 2.0)));
}

}  // namespace detail

// -log L_Ic(s) collapsed to one dimension:
//   int_0^1 (1 - L_G(s w^tau)) (w^{-3} - w) dw.
// Under channel inversion the path-loss ratio is scale free and pi lambda_b R^2 = 1, so R drops out.
// Same value as the nested exclusion-zone integral; the inner average over the interferer
// distance to its own BS is done analytically in the order swap.
inline double cellular_exponent(double s, const FadingModel& f, const NetworkParams& p, double rel_tol = 1e-12) {
  if (!(s >= 0.0)) throw domain_error("laplace_cellular: s must be nonnegative");
  if (s == 0.0) return 0.0;
  const double tau = p.tau_c;
  const double t = s;
  const double lo = detail::cellular_cut(t * mean_power(f), tau, 1e-14);
  if (lo >= 1.0) return 0.0;
  // integrate in y = log w; integrand (1 - L)(w^{-2} - w^2)
  auto g = [&](double y) {
    const double w = std::exp(y);
    return laplace_complement(f, t * std::pow(w, tau)) * (1.0 / (w * w) - w * w);
  };
  const double ylo = std::log(lo);
  const double ystar = std::clamp(-std::log(t) / tau, ylo, 0.0);
  return detail::gk_integrate(g, ylo, ystar, rel_tol, "cellular exponent") +
         detail::gk_integrate(g, ystar, 0.0, rel_tol, "cellular exponent");
}

// 1 - phi(r) = int_0^R (1 - L_G(s x^tau r^-tau)) 2x/R^2 dx
inline double cellular_phi_complement(double s, double r, const FadingModel& f, const NetworkParams& p,
                                      double rel_tol = 1e-12) {
  const double R = p.cell_radius();
  const double tau = p.tau_c;
  const double t = s * std::pow(R / r, tau);  // argument at x = R
  auto g = [&](double v) { return laplace_complement(f, t * std::pow(v, tau)) * 2.0 * v; };
  const double vstar = std::clamp(std::pow(t, -1.0 / tau), 0.0, 1.0);
  return detail::gk_integrate(g, 0.0, vstar, rel_tol, "cellular phi") +
         detail::gk_integrate(g, vstar, 1.0, rel_tol, "cellular phi");
}

// Nested route: exponent 2 pi lambda_b int_R^inf (1 - phi(r)) r dr with u = R/r.
inline double cellular_exponent_nested(double s, const FadingModel& f, const NetworkParams& p,
                                       double rel_tol = 1e-11) {
  if (!(s >= 0.0)) throw domain_error("laplace_cellular: s must be nonnegative");
  if (s == 0.0) return 0.0;
  const double R = p.cell_radius();
  const double tau = p.tau_c;
  const double t = s;
  // 1 - phi(R/u) <= s E[P_c] E[G] (u/R)^tau = 2 s E[G] u^tau / (tau + 2)
  const double lo = detail::cellular_cut(2.0 * t * mean_power(f) / (tau + 2.0), tau, 1e-14);
  if (lo >= 1.0) return 0.0;
  const double scale = 2.0 * std::numbers::pi * p.lambda_b * R * R;
  auto g = [&](double y) {
    const double u = std::exp(y);
    return cellular_phi_complement(s, R / u, f, p, 1e-13) / (u * u);
  };
  const double ylo = std::log(lo);
  const double ystar = std::clamp(-std::log(t) / tau, ylo, 0.0);
  return scale * (detail::gk_integrate(g, ylo, ystar, rel_tol, "cellular exponent") +
                  detail::gk_integrate(g, ystar, 0.0, rel_tol, "cellular exponent"));
}

// 1 - 2F1(m, delta; 1+delta; -z), series minus its leading 1 for small z.
inline double one_minus_exclusion_2f1(double m, double delta, double z) {
  if (z < 0.5) {
    double term = 1.0, sum = 0.0;
    for (int k = 0; k < 2000; ++k) {
      term *= (m + k) * (delta + k) / ((1.0 + delta + k) * (k + 1.0)) * (-z);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) return -sum;
    }
    throw convergence_error("exclusion 2F1 series did not converge", std::abs(term));
  }
  return 1.0 - hyp2f1(m, delta, 1.0 + delta, -z);
}

// Exponent with the inner average in hypergeometric form, one 2F1 per gamma-mixture component.
// Nakagami, Rayleigh and one-sided Gaussian have a single component; Hoyt and Rice expand.
inline double cellular_exponent_hypergeometric(double s, const FadingModel& f, const NetworkParams& p,
                                               double rel_tol = 1e-12) {
  if (!(s >= 0.0)) throw domain_error("laplace_cellular: s must be nonnegative");
  if (s == 0.0) return 0.0;
  const double tau = p.tau_c, d = p.delta_c();
  const GammaMixture mix = gamma_mixture(f, 1e-15, 5000);
  const double lo = detail::cellular_cut(2.0 * s * mean_power(f) / (tau + 2.0), tau, 1e-14);
  if (lo >= 1.0) return 0.0;
  auto g = [&](double y) {
    const double u = std::exp(y);
    const double z = s * std::pow(u, tau) * mix.scale;
    double acc = 0.0;
    for (std::size_t n = 0; n < mix.weights.size(); ++n) acc += mix.weights[n] * one_minus_exclusion_2f1(mix.shapes[n], d, z);
    return 2.0 * acc / (u * u);
  };
  const double ylo = std::log(lo);
  const double ystar = std::clamp(-std::log(s) / tau, ylo, 0.0);
  return detail::gk_integrate(g, ylo, ystar, rel_tol, "cellular exponent") +
         detail::gk_integrate(g, ystar, 0.0, rel_tol, "cellular exponent");
}

inline double laplace_cellular(double s, const FadingModel& f, const NetworkParams& p) {
  return std::exp(-cellular_exponent_nested(s, f, p));
}

// Aggregate-interference Laplace transform for the typical receiver of one link type.
class InterferenceTransform {
 public:
  static InterferenceTransform d2d(const FadingModel& interferer, const NetworkParams& p) {
    validate(interferer);
    validate(p);
    InterferenceTransform t(LinkKind::d2d, interferer, p);
    t.delta_ = p.delta_d();
    t.c_ = d2d_constant_c(interferer, p);
    return t;
  }

  static InterferenceTransform cellular(const FadingModel& interferer, const NetworkParams& p) {
    validate(interferer);
    validate(p);
    InterferenceTransform t(LinkKind::cellular, interferer, p);
    t.delta_ = p.delta_c();
    return t;
  }

  // exp(-c s^delta) with a given constant; c = 0 means no interference.
  static InterferenceTransform stable(double c, double delta) {
    if (!(c >= 0.0)) throw config_error("interference constant must be >= 0");
    if (!(delta > 0.0 && delta < 1.0)) throw config_error("stability index must lie in (0,1)");
    InterferenceTransform t(LinkKind::d2d, KappaMuParams{}, NetworkParams{});
    t.delta_ = delta;
    t.c_ = c;
    return t;
  }

  static InterferenceTransform none() { return stable(0.0, 0.5); }

  LinkKind kind() const { return kind_; }
  double delta() const { return delta_; }
  // D2D constant c; zero for the cellular kind.
  double c() const { return c_; }
  const FadingModel& fading() const { return fading_; }
  const NetworkParams& params() const { return params_; }

  double exponent(double s) const {
    if (!(s >= 0.0)) throw domain_error("interference transform: s must be nonnegative");
    if (kind_ == LinkKind::d2d) return c_ == 0.0 ? 0.0 : c_ * std::pow(s, delta_);
    return cellular_exponent(s, fading_, params_);
  }

  double operator()(double s) const { return std::exp(-exponent(s)); }

 private:
  InterferenceTransform(LinkKind k, FadingModel f, NetworkParams p) : kind_(k), fading_(f), params_(p) {}

  LinkKind kind_;
  FadingModel fading_;
  NetworkParams params_;
  double delta_ = 0.5;
  double c_ = 0.0;
};

}  // namespace d2dgeo
