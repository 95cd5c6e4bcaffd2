#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "d2dgeo/errors.hpp"

namespace d2dgeo {

namespace detail {

inline constexpr double kSeriesEps = 1e-16;
inline constexpr std::size_t kMaxSeriesTerms = 1000000;

inline bool is_nonpositive_integer(double x) {
  return x <= 0.0 && x == std::floor(x);
}

inline bool near_integer(double x, double tol = 1e-9) {
  return std::abs(x - std::round(x)) < tol;
}

}  // namespace detail

// Lanczos approximation (g = 7, 9 terms). Reflection below 1/2.
inline double ln_gamma(double x) {
  if (!(x > 0.0)) throw domain_error("ln_gamma: argument must be positive");
  if (std::isinf(x)) return x;
  if (x < 0.5) {
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - ln_gamma(1.0 - x);
  }
  static constexpr double p[] = {0.99999999999980993,  676.5203681218851,    -1259.1392167224028,
                                 771.32342877765313,   -176.61502916214059,  12.507343278686905,
                                 -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const double z = x - 1.0;
  double a = p[0];
  const double t = z + 7.5;
  for (int i = 1; i < 9; ++i) a += p[i] / (z + i);
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

// 1/Gamma(x) for any real x, zero at the poles.
inline double rgamma(double x) {
  if (detail::is_nonpositive_integer(x)) return 0.0;
  if (x > 0.0) return std::exp(-ln_gamma(x));
  return 1.0 / std::tgamma(x);
}

// Regularized lower incomplete gamma P(s, x).
inline double gamma_p(double s, double x);
// Regularized upper incomplete gamma Q(s, x).
inline double gamma_q(double s, double x);

namespace detail {

inline double gamma_prefactor(double s, double x) {
  return std::exp(s * std::log(x) - x - ln_gamma(s));
}

inline double gamma_p_series(double s, double x) {
  double ap = s;
  double del = 1.0 / s;
  double sum = del;
  for (std::size_t k = 0; k < kMaxSeriesTerms; ++k) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kSeriesEps) return sum * gamma_prefactor(s, x);
  }
  throw convergence_error("incomplete gamma series did not converge");
}

inline double gamma_q_cfrac(double s, double x) {
  constexpr double tiny = 1e-300;
  if (s * std::log(x) - x - ln_gamma(s) < -750.0) return 0.0;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (std::size_t i = 1; i < kMaxSeriesTerms; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kSeriesEps) return gamma_prefactor(s, x) * h;
  }
  throw convergence_error("incomplete gamma continued fraction did not converge");
}

}  // namespace detail

inline double gamma_p(double s, double x) {
  if (!(s > 0.0)) throw domain_error("incomplete gamma: shape must be positive");
  if (!(x >= 0.0)) throw domain_error("incomplete gamma: argument must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < s + 1.0) return detail::gamma_p_series(s, x);
  return 1.0 - detail::gamma_q_cfrac(s, x);
}

inline double gamma_q(double s, double x) {
  if (!(s > 0.0)) throw domain_error("incomplete gamma: shape must be positive");
  if (!(x >= 0.0)) throw domain_error("incomplete gamma: argument must be nonnegative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < s + 1.0) return 1.0 - detail::gamma_p_series(s, x);
  return detail::gamma_q_cfrac(s, x);
}

// Non-regularized Gamma(b, x).
inline double upper_incomplete_gamma(double b, double x) {
  return std::exp(ln_gamma(b)) * gamma_q(b, x);
}

// Non-regularized gamma(s, x).
inline double lower_incomplete_gamma(double s, double x) {
  return std::exp(ln_gamma(s)) * gamma_p(s, x);
}

inline double sinc_norm(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

inline double binomial_real(double x, double y) {
  const double a = x + 1.0, b = y + 1.0, c = x - y + 1.0;
  if (detail::is_nonpositive_integer(a)) throw domain_error("binomial_real: pole in Gamma(x+1)");
  if (a > 0.0 && b > 0.0 && c > 0.0) return std::exp(ln_gamma(a) - ln_gamma(b) - ln_gamma(c));
  return std::tgamma(a) * rgamma(b) * rgamma(c);
}

// Generalized Laguerre polynomial L_n^{(alpha)}(x) by the three-term recurrence.
template <class Real = double>
inline Real laguerre_poly(int n, Real alpha, Real x) {
  if (n < 0) throw domain_error("laguerre_poly: negative degree");
  Real prev = 1;
  if (n == 0) return prev;
  Real cur = 1 + alpha - x;
  for (int k = 1; k < n; ++k) {
    const Real next = ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

// log of sum_k y^k / (k! Gamma(k + nu + 1)), y >= 0, nu > -1. This is (y)^{-nu/2} I_nu(2 sqrt(y)).
inline double log_bessel_series(double nu, double y) {
  if (!(nu > -1.0)) throw domain_error("log_bessel_series: nu must exceed -1");
  if (!(y >= 0.0)) throw domain_error("log_bessel_series: negative argument");
  double logt = -ln_gamma(nu + 1.0);
  if (y == 0.0) return logt;
  const double z = 2.0 * std::sqrt(y);
  if (z > 60.0 + nu * nu) {
    // Hankel expansion of I_nu(z)
    const double m4 = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 60; ++k) {
      const double next = -term * (m4 - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * z);
      if (std::abs(next) > std::abs(term)) break;
      term = next;
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return z - 0.5 * std::log(2.0 * std::numbers::pi * z) + std::log(sum) - 0.5 * nu * std::log(y);
  }
  const double ly = std::log(y);
  double acc = logt;
  for (std::size_t k = 0; k < detail::kMaxSeriesTerms; ++k) {
    const double kk = static_cast<double>(k);
    logt += ly - std::log(kk + 1.0) - std::log(kk + nu + 1.0);
    const double hi = std::max(acc, logt);
    acc = hi + std::log1p(std::exp(std::min(acc, logt) - hi));
    // terms decrease once (k+1)(k+nu+1) > y
    if ((kk + 2.0) * (kk + nu + 2.0) > y && logt < acc - 40.0) return acc;
  }
  throw convergence_error("Bessel series did not converge");
}

namespace detail {

inline double hyp1f1_series(double a, double b, double x) {
  double term = 1.0, sum = 1.0;
  for (std::size_t k = 0; k < kMaxSeriesTerms; ++k) {
    const double kk = static_cast<double>(k);
    term *= (a + kk) / (b + kk) * x / (kk + 1.0);
    sum += term;
    if (term == 0.0) return sum;
    const double ratio = std::abs((a + kk + 1.0) * x / ((b + kk + 1.0) * (kk + 2.0)));
    if (std::abs(term) < kSeriesEps * std::abs(sum) && ratio < 1.0) return sum;
  }
  throw convergence_error("1F1 series exceeded term cap");
}

inline double hyp2f1_series(double a, double b, double c, double x) {
  double term = 1.0, sum = 1.0;
  for (std::size_t k = 0; k < kMaxSeriesTerms; ++k) {
    const double kk = static_cast<double>(k);
    term *= (a + kk) * (b + kk) / ((c + kk) * (kk + 1.0)) * x;
    sum += term;
    if (term == 0.0) return sum;
    const double ratio = std::abs((a + kk + 1.0) * (b + kk + 1.0) * x / ((c + kk + 1.0) * (kk + 2.0)));
    if (std::abs(term) < kSeriesEps * std::abs(sum) && ratio < 1.0) return sum;
  }
  throw convergence_error("2F1 series exceeded term cap");
}

// 2F1(a,b;c;x) = (1-x)^{-a} 2F1(a, c-b; c; x/(x-1))
inline double hyp2f1_pfaff(double a, double b, double c, double x) {
  return std::pow(1.0 - x, -a) * hyp2f1_series(a, c - b, c, x / (x - 1.0));
}

// Connection formula through 1/x, valid for x < -1 and b - a not an integer.
inline double hyp2f1_inverse(double a, double b, double c, double x) {
  const double gc = std::tgamma(c);
  const double t1 = gc * std::tgamma(b - a) * rgamma(b) * rgamma(c - a) * std::pow(-x, -a) *
                    hyp2f1_series(a, a - c + 1.0, a - b + 1.0, 1.0 / x);
  const double t2 = gc * std::tgamma(a - b) * rgamma(a) * rgamma(c - b) * std::pow(-x, -b) *
                    hyp2f1_series(b, b - c + 1.0, b - a + 1.0, 1.0 / x);
  return t1 + t2;
}

}  // namespace detail

// Kummer's confluent function. Negative arguments go through Kummer's transform,
// which keeps every series term positive when a, b > 0.
inline double hyp1f1(double a, double b, double x) {
  if (detail::is_nonpositive_integer(b)) throw domain_error("hyp1f1: b is a nonpositive integer");
  if (x == 0.0) return 1.0;
  if (x < 0.0 && !detail::is_nonpositive_integer(a)) {
    return std::exp(x) * detail::hyp1f1_series(b - a, b, -x);
  }
  return detail::hyp1f1_series(a, b, x);
}

inline double hyp2f1(double a, double b, double c, double x) {
  if (!(x < 1.0)) throw domain_error("hyp2f1: argument must be below 1");
  if (detail::is_nonpositive_integer(c)) throw domain_error("hyp2f1: c is a nonpositive integer");
  if (x >= -0.5) return detail::hyp2f1_series(a, b, c, x);
  if (x >= -2.0 || detail::near_integer(b - a)) return detail::hyp2f1_pfaff(a, b, c, x);
  return detail::hyp2f1_inverse(a, b, c, x);
}

// Generalized Marcum Q as a Poisson mixture of regularized upper incomplete gammas.
inline double marcum_q(double mu, double a, double b) {
  if (!(mu > 0.0)) throw domain_error("marcum_q: order must be positive");
  if (!(a >= 0.0) || !(b >= 0.0)) throw domain_error("marcum_q: arguments must be nonnegative");
  if (b == 0.0) return 1.0;
  const double lam = 0.5 * a * a;
  const double y = 0.5 * b * b;
  if (lam == 0.0) return gamma_q(mu, y);
  constexpr double tail = 1e-14;
  const double n0 = std::floor(lam);
  const double logw0 = -lam + n0 * std::log(lam) - ln_gamma(n0 + 1.0);
  const double llam = std::log(lam);
  double sum = 0.0;
  // upward from the mode; ratio lam/(n+1) <= 1 there
  double logw = logw0;
  for (double n = n0;; n += 1.0) {
    const double w = std::exp(logw);
    sum += w * gamma_q(mu + n, y);
    const double r = lam / (n + 2.0);
    if (w * r / (1.0 - r) < tail) break;
    logw += llam - std::log(n + 1.0);
  }
  logw = logw0;
  for (double n = n0 - 1.0; n >= 0.0; n -= 1.0) {
    logw += std::log(n + 1.0) - llam;
    const double w = std::exp(logw);
    sum += w * gamma_q(mu + n, y);
    const double r = n / lam;
    if (w * r / (1.0 - r) < tail) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

// Marcum Q through the Laguerre-coefficient series 1 - sum_n c_n. Alternating, so only
// reliable for moderate arguments; used as a cross-check.
inline double marcum_q_laguerre_series(double mu, double a, double b) {
  if (!(mu > 0.0)) throw domain_error("marcum_q: order must be positive");
  if (b == 0.0) return 1.0;
  const long double la = 0.5L * a * a;
  const long double y = 0.5L * b * b;
  const long double ea = std::exp(-la);
  long double sum = 0.0L;
  long double lprev = 1.0L, lcur = 1.0L + (mu - 1.0L) - la;  // L_0, L_1 of order mu-1
  for (int n = 0; n < 5000; ++n) {
    long double ln_n;
    if (n == 0) {
      ln_n = 1.0L;
    } else if (n == 1) {
      ln_n = lcur;
    } else {
      const long double next = ((2 * (n - 1) + 1 + (mu - 1.0L) - la) * lcur - ((n - 1) + (mu - 1.0L)) * lprev) / n;
      lprev = lcur;
      lcur = next;
      ln_n = lcur;
    }
    const long double mag = std::exp((n + mu) * std::log(y) - ln_gamma(n + mu + 1.0));
    const long double term = ((n % 2) ? -1.0L : 1.0L) * ea * ln_n * mag;
    sum += term;
    if (n > y + la + 10 && std::abs(term) < 1e-18L) break;
  }
  return static_cast<double>(1.0L - sum);
}

struct LaguerreRule {
  int order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Laguerre rule: Golub-Welsch on the Jacobi matrix, then Newton-polished nodes and
// weights 1/(x L_M'(x)^2) in extended precision.
inline LaguerreRule gauss_laguerre(int M) {
  if (M < 1 || M > 256) throw domain_error("gauss_laguerre: order must lie in [1, 256]");
  Eigen::VectorXd diag(M);
  Eigen::VectorXd sub(std::max(M - 1, 0));
  for (int i = 0; i < M; ++i) diag(i) = 2.0 * i + 1.0;
  for (int i = 1; i < M; ++i) sub(i - 1) = static_cast<double>(i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw convergence_error("gauss_laguerre: eigen-solve failed");

  LaguerreRule rule;
  rule.order = M;
  rule.nodes.resize(M);
  rule.weights.resize(M);
  for (int i = 0; i < M; ++i) {
    long double x = es.eigenvalues()(i);
    long double lm = 0, dl = 0;
    auto eval = [M](long double t, long double& val, long double& der) {
      long double p0 = 1.0L, p1 = 1.0L - t;
      if (M == 1) {
        val = p1;
        der = -1.0L;
        return;
      }
      for (int k = 1; k < M; ++k) {
        const long double p2 = ((2 * k + 1 - t) * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
      }
      val = p1;
      der = M * (p1 - p0) / t;
    };
    for (int it = 0; it < 8; ++it) {
      eval(x, lm, dl);
      const long double step = lm / dl;
      x -= step;
      if (std::abs(step) <= 1e-18L * x) break;
    }
    eval(x, lm, dl);
    rule.nodes[i] = static_cast<double>(x);
    rule.weights[i] = static_cast<double>(1.0L / (x * dl * dl));
  }
  for (int i = 1; i < M; ++i) {
    if (!(rule.nodes[i] > rule.nodes[i - 1])) throw convergence_error("gauss_laguerre: nodes not separated");
  }
  return rule;
}

}  // namespace d2dgeo
