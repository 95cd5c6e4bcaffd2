#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "d2dgeo/errors.hpp"
#include "d2dgeo/random.hpp"
#include "d2dgeo/specfun.hpp"

namespace d2dgeo {

enum class LinkKind { d2d, cellular };

inline const char* to_string(LinkKind k) { return k == LinkKind::d2d ? "d2d" : "cellular"; }

// Deployment constants. Intensities per m^2, theta in m, n0 linear. theta may be +inf.
struct NetworkParams {
  double lambda_b = 1.0 / (std::numbers::pi * 500.0 * 500.0);
  double lambda = 10.0 / (std::numbers::pi * 500.0 * 500.0);
  double q = 0.2;
  double epsilon = 0.8;
  double xi = 10.0 / (std::numbers::pi * 500.0 * 500.0);
  double theta = 100.0;
  double beta = 0.2;
  double tau_c = 4.0;
  double tau_d = 4.0;
  double n0 = std::pow(10.0, -0.5);

  double cell_radius() const { return 1.0 / std::sqrt(std::numbers::pi * lambda_b); }
  double delta_c() const { return 2.0 / tau_c; }
  double delta_d() const { return 2.0 / tau_d; }
};

inline void validate(const NetworkParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw config_error(std::string(name) + " must be finite and > 0");
  };
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw config_error(std::string(name) + " must lie in [0, 1]");
  };
  positive(p.lambda_b, "lambda_b");
  positive(p.lambda, "lambda");
  positive(p.xi, "xi");
  unit(p.q, "q");
  unit(p.epsilon, "epsilon");
  unit(p.beta, "beta");
  if (!(p.theta >= 0.0)) throw config_error("theta must be >= 0");
  if (!(p.tau_c > 2.0) || !std::isfinite(p.tau_c)) throw config_error("tau_c must be finite and > 2");
  if (!(p.tau_d > 2.0) || !std::isfinite(p.tau_d)) throw config_error("tau_d must be finite and > 2");
  if (!(p.n0 >= 0.0) || !std::isfinite(p.n0)) throw config_error("n0 must be finite and >= 0");
}

// The parameter set used for the numerical experiments, with N0 fixed by an SNR of 5 dB at unit mean power.
inline NetworkParams default_params() { return NetworkParams{}; }

inline double xi_pi_theta2(const NetworkParams& p) {
  if (std::isinf(p.theta)) return std::numeric_limits<double>::infinity();
  return p.xi * std::numbers::pi * p.theta * p.theta;
}

// P(L_d <= theta)
inline double p_d2d_mode(const NetworkParams& p) { return -std::expm1(-xi_pi_theta2(p)); }

inline double d2d_length_pdf(const NetworkParams& p, double x) {
  if (!(x >= 0.0)) throw domain_error("d2d_length_pdf: negative length");
  const double k = p.xi * std::numbers::pi;
  return 2.0 * k * x * std::exp(-k * x * x);
}

inline double d2d_length_cdf(const NetworkParams& p, double x) {
  if (!(x >= 0.0)) return 0.0;
  return -std::expm1(-p.xi * std::numbers::pi * x * x);
}

// Rayleigh link length; the truncated variant conditions on L_d <= theta.
inline double d2d_length_sample(const NetworkParams& p, bool truncated, rng_stream& rng) {
  const double u = uniform_open(rng);
  const double k = p.xi * std::numbers::pi;
  if (!truncated) return std::sqrt(-std::log(u) / k);
  const double pm = p_d2d_mode(p);
  if (!(pm > 0.0)) throw domain_error("d2d_length_sample: theta = 0 leaves no D2D-mode links");
  const double x = std::sqrt(-std::log1p(-u * pm) / k);
  return std::min(x, p.theta);
}

inline double cellular_length_pdf(const NetworkParams& p, double x) {
  const double R = p.cell_radius();
  if (!(x >= 0.0 && x <= R)) throw domain_error("cellular_length_pdf: length outside [0, R]");
  return 2.0 * x / (R * R);
}

inline double cellular_length_sample(const NetworkParams& p, rng_stream& rng) {
  return p.cell_radius() * std::sqrt(uniform_open(rng));
}

struct Intensities {
  double lambda_c;
  double lambda_d;
};

inline Intensities intensities(const NetworkParams& p) {
  const double ld = p.q * p_d2d_mode(p) * p.lambda;
  return {p.lambda - ld, ld};
}

enum class PowerKind { cellular, d2d_mode, potential_d2d };

// E[P^n] under channel inversion (P = L^tau).
inline double power_moment(const NetworkParams& p, PowerKind kind, double n) {
  if (!(n > 0.0)) throw domain_error("power_moment: order must be positive");
  const double R = p.cell_radius();
  const double cell = std::pow(R, p.tau_c * n) / (1.0 + p.tau_c * n / 2.0);
  if (kind == PowerKind::cellular) return cell;
  const double pm = p_d2d_mode(p);
  const double s = 1.0 + p.tau_d * n / 2.0;
  // (xi pi)^{-tau n/2} gamma(s, xi pi theta^2)
  const double lower = std::exp(-(p.tau_d * n / 2.0) * std::log(p.xi * std::numbers::pi) + ln_gamma(s)) *
                       gamma_p(s, xi_pi_theta2(p));
  if (kind == PowerKind::d2d_mode) {
    if (!(pm > 0.0)) throw domain_error("power_moment: no D2D-mode links when theta = 0");
    return lower / pm;
  }
  return lower + (1.0 - pm) * cell;
}

// E[1/N], N the number of cellular UEs sharing the typical cell (N >= 1).
inline double mean_inverse_n(const NetworkParams& p) {
  const double r = intensities(p).lambda_c / p.lambda_b;
  if (r == 0.0) return 1.0;
  return -std::expm1(-r) / r;
}

}  // namespace d2dgeo
