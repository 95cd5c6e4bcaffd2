#pragma once

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "d2dgeo/errors.hpp"
#include "d2dgeo/random.hpp"
#include "d2dgeo/specfun.hpp"

namespace d2dgeo {

struct KappaMuParams {
  double kappa = 0.0;
  double mu = 1.0;
  double mean_power = 1.0;
};

// Format-1 eta-mu.
struct EtaMuParams {
  double eta = 1.0;
  double mu = 0.5;
  double mean_power = 1.0;

  double h() const { return (2.0 + 1.0 / eta + eta) / 4.0; }
  double H() const { return (1.0 / eta - eta) / 4.0; }
  // (H/h)^2, written so that it stays accurate near eta = 1
  double rho() const {
    const double r = (1.0 - eta) / (1.0 + eta);
    return r * r;
  }
};

using FadingModel = std::variant<KappaMuParams, EtaMuParams>;

inline void validate(const KappaMuParams& p) {
  if (!(p.kappa >= 0.0) || !std::isfinite(p.kappa)) throw config_error("kappa-mu: kappa must be finite and >= 0");
  if (!(p.mu > 0.0) || !std::isfinite(p.mu)) throw config_error("kappa-mu: mu must be finite and > 0");
  if (!(p.mean_power > 0.0) || !std::isfinite(p.mean_power)) throw config_error("kappa-mu: mean power must be > 0");
}

inline void validate(const EtaMuParams& p) {
  if (!(p.eta > 0.0) || !std::isfinite(p.eta)) throw config_error("eta-mu: eta must be finite and > 0");
  if (!(p.mu > 0.0) || !std::isfinite(p.mu)) throw config_error("eta-mu: mu must be finite and > 0");
  if (!(p.mean_power > 0.0) || !std::isfinite(p.mean_power)) throw config_error("eta-mu: mean power must be > 0");
}

inline void validate(const FadingModel& m) {
  std::visit([](const auto& p) { validate(p); }, m);
}

inline FadingModel kappa_mu(double kappa, double mu, double w = 1.0) {
  KappaMuParams p{kappa, mu, w};
  validate(p);
  return p;
}

inline FadingModel eta_mu(double eta, double mu, double w = 1.0) {
  EtaMuParams p{eta, mu, w};
  validate(p);
  return p;
}

inline double mean_power(const FadingModel& m) {
  return std::visit([](const auto& p) { return p.mean_power; }, m);
}

inline FadingModel with_mean_power(FadingModel m, double w) {
  std::visit([w](auto& p) { p.mean_power = w; }, m);
  validate(m);
  return m;
}

// G as a countable mixture of Gamma(shapes[n], scale) laws with the given weights.
// kappa-mu: Poisson(mu kappa) weights, shape mu+n. eta-mu: negative-binomial weights, shape 2mu+2n.
struct GammaMixture {
  std::vector<double> weights;
  std::vector<double> shapes;
  double scale = 1.0;
  double omitted = 0.0;  // probability mass beyond the last kept component
};

namespace detail {

// Keeps components until the geometric bound on the remaining mass drops below tail_eps.
// ratio_bound(n) must dominate w_{m+1}/w_m for every m >= n.
template <class LogWeight, class RatioBound>
inline void fill_mixture(GammaMixture& mix, LogWeight&& logw, RatioBound&& ratio_bound, double first_shape,
                         double shape_step, double mode, double tail_eps, int max_terms) {
  double tail = 1.0;
  for (int n = 0; n < max_terms; ++n) {
    const double w = std::exp(logw(n));
    mix.weights.push_back(w);
    mix.shapes.push_back(first_shape + shape_step * n);
    if (n >= mode) {
      const double r = ratio_bound(n);
      if (r < 1.0) {
        tail = w * r / (1.0 - r);
        if (tail < tail_eps) {
          mix.omitted = tail;
          return;
        }
      }
    }
  }
  throw convergence_error("fading mixture: tail above tolerance at the term cap", tail);
}

}  // namespace detail

inline GammaMixture gamma_mixture(const KappaMuParams& p, double tail_eps = 1e-10, int max_terms = 500) {
  GammaMixture mix;
  mix.scale = p.mean_power / (p.mu * (1.0 + p.kappa));
  const double lam = p.mu * p.kappa;
  if (lam == 0.0) {
    mix.weights = {1.0};
    mix.shapes = {p.mu};
    return mix;
  }
  const double ll = std::log(lam);
  detail::fill_mixture(
      mix, [&](int n) { return -lam + n * ll - ln_gamma(n + 1.0); }, [&](int n) { return lam / (n + 1.0); }, p.mu,
      1.0, lam, tail_eps, max_terms);
  return mix;
}

// a_n = C(n+mu-1, n) rho^n (1-rho)^mu, rho = (H/h)^2, 1 - rho = 1/h.
inline double eta_mu_log_weight(const EtaMuParams& p, int n) {
  const double rho = p.rho();
  if (rho == 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return ln_gamma(n + p.mu) - ln_gamma(p.mu) - ln_gamma(n + 1.0) + n * std::log(rho) - p.mu * std::log(p.h());
}

inline double eta_mu_weights(const EtaMuParams& p, int n) {
  if (n < 0) throw domain_error("eta_mu_weights: negative index");
  return std::exp(eta_mu_log_weight(p, n));
}

inline GammaMixture gamma_mixture(const EtaMuParams& p, double tail_eps = 1e-10, int max_terms = 500) {
  GammaMixture mix;
  mix.scale = p.mean_power / (2.0 * p.mu * p.h());
  const double rho = p.rho();
  if (rho == 0.0) {
    mix.weights = {1.0};
    mix.shapes = {2.0 * p.mu};
    return mix;
  }
  const double mode = std::max(0.0, (p.mu - 1.0) * rho / (1.0 - rho));
  // a_{n+1}/a_n = rho (n+mu)/(n+1): decreasing in n when mu > 1, bounded by rho otherwise
  auto ratio = [&](int n) { return p.mu > 1.0 ? rho * (n + p.mu) / (n + 1.0) : rho; };
  detail::fill_mixture(
      mix, [&](int n) { return eta_mu_log_weight(p, n); }, ratio, 2.0 * p.mu, 2.0, mode, tail_eps, max_terms);
  return mix;
}

inline GammaMixture gamma_mixture(const FadingModel& m, double tail_eps = 1e-10, int max_terms = 500) {
  return std::visit([&](const auto& p) { return gamma_mixture(p, tail_eps, max_terms); }, m);
}

inline double pdf(const KappaMuParams& p, double x) {
  if (!(x > 0.0)) throw domain_error("pdf: argument must be positive");
  const double mu = p.mu, k = p.kappa, w = p.mean_power;
  if (k == 0.0) {
    return std::exp(mu * std::log(mu / w) + (mu - 1.0) * std::log(x) - mu * x / w - ln_gamma(mu));
  }
  const double lf = mu * std::log(mu * (1.0 + k)) + (mu - 1.0) * std::log(x) - mu * std::log(w) - mu * k -
                    mu * (1.0 + k) * x / w + log_bessel_series(mu - 1.0, mu * mu * k * (1.0 + k) * x / w);
  return std::exp(lf);
}

inline double pdf(const EtaMuParams& p, double x) {
  if (!(x > 0.0)) throw domain_error("pdf: argument must be positive");
  const double mu = p.mu, w = p.mean_power, h = p.h(), H = p.H();
  const double y = mu * H * x / w;
  const double lf = std::log(2.0 * std::sqrt(std::numbers::pi)) + 2.0 * mu * std::log(mu) + mu * std::log(h) +
                    (2.0 * mu - 1.0) * std::log(x) - ln_gamma(mu) - 2.0 * mu * std::log(w) - 2.0 * mu * h * x / w +
                    log_bessel_series(mu - 0.5, y * y);
  return std::exp(lf);
}

inline double pdf(const FadingModel& m, double x) {
  return std::visit([x](const auto& p) { return pdf(p, x); }, m);
}

inline double moment(const KappaMuParams& p, double j) {
  if (!(j > 0.0)) throw domain_error("moment: order must be positive");
  const double mu = p.mu, k = p.kappa;
  const double base = j * std::log(p.mean_power / ((1.0 + k) * mu)) + ln_gamma(mu + j) - ln_gamma(mu);
  return std::exp(base - mu * k) * hyp1f1(mu + j, mu, mu * k);
}

inline double moment(const EtaMuParams& p, double j) {
  if (!(j > 0.0)) throw domain_error("moment: order must be positive");
  const double mu = p.mu, h = p.h();
  const double base = j * std::log(p.mean_power / (2.0 * mu)) - (mu + j) * std::log(h) + ln_gamma(2.0 * mu + j) -
                      ln_gamma(2.0 * mu);
  return std::exp(base) * hyp2f1(mu + j / 2.0 + 0.5, mu + j / 2.0, mu + 0.5, p.rho());
}

inline double moment(const FadingModel& m, double j) {
  return std::visit([j](const auto& p) { return moment(p, j); }, m);
}

// log of the Laplace transform E[exp(-sG)].
inline double laplace_log(const KappaMuParams& p, double s) {
  if (!(s >= 0.0)) throw domain_error("laplace: s must be nonnegative");
  const double t = s * p.mean_power / (p.mu * (1.0 + p.kappa));
  if (std::isinf(t)) return -std::numeric_limits<double>::infinity();
  return -p.mu * std::log1p(t) - p.mu * p.kappa * t / (1.0 + t);
}

inline double laplace_log(const EtaMuParams& p, double s) {
  if (!(s >= 0.0)) throw domain_error("laplace: s must be nonnegative");
  const double t = s * p.mean_power / (2.0 * p.mu * p.h());
  if (std::isinf(t)) return -std::numeric_limits<double>::infinity();
  // h^{-mu}[(1+t)^2 - rho]^{-mu} with h(1 - rho) = 1
  return -p.mu * std::log1p(p.h() * t * (2.0 + t));
}

inline double laplace_log(const FadingModel& m, double s) {
  return std::visit([s](const auto& p) { return laplace_log(p, s); }, m);
}

inline double laplace(const FadingModel& m, double s) { return std::exp(laplace_log(m, s)); }

// 1 - E[exp(-sG)] without cancellation at small s.
inline double laplace_complement(const FadingModel& m, double s) { return -std::expm1(laplace_log(m, s)); }

inline double ccdf(const KappaMuParams& p, double x) {
  if (!(x >= 0.0)) throw domain_error("ccdf: argument must be nonnegative");
  if (x == 0.0) return 1.0;
  return marcum_q(p.mu, std::sqrt(2.0 * p.kappa * p.mu), std::sqrt(2.0 * p.mu * (1.0 + p.kappa) * x / p.mean_power));
}

inline double ccdf(const EtaMuParams& p, double x) {
  if (!(x >= 0.0)) throw domain_error("ccdf: argument must be nonnegative");
  if (x == 0.0) return 1.0;
  const auto mix = gamma_mixture(p, 1e-15, 5000);
  double s = 0.0;
  for (std::size_t n = 0; n < mix.weights.size(); ++n) s += mix.weights[n] * gamma_q(mix.shapes[n], x / mix.scale);
  return std::clamp(s, 0.0, 1.0);
}

inline double ccdf(const FadingModel& m, double x) {
  return std::visit([x](const auto& p) { return ccdf(p, x); }, m);
}

inline double sample(const KappaMuParams& p, rng_stream& rng) {
  const double lam = p.mu * p.kappa;
  int n = 0;
  if (lam > 0.0) n = std::poisson_distribution<int>(lam)(rng);
  return std::gamma_distribution<double>(p.mu + n, p.mean_power / (p.mu * (1.0 + p.kappa)))(rng);
}

inline double sample(const EtaMuParams& p, rng_stream& rng) {
  const double rho = p.rho();
  int n = 0;
  if (rho > 0.0) {
    const double lam = std::gamma_distribution<double>(p.mu, rho / (1.0 - rho))(rng);
    if (lam > 0.0) n = std::poisson_distribution<int>(lam)(rng);
  }
  return std::gamma_distribution<double>(2.0 * p.mu + 2.0 * n, p.mean_power / (2.0 * p.mu * p.h()))(rng);
}

inline double sample(const FadingModel& m, rng_stream& rng) {
  return std::visit([&rng](const auto& p) { return sample(p, rng); }, m);
}

// Named special cases. nakagami_eta reaches Nakagami-m through eta = 1, mu = m/2.
inline FadingModel special_case(std::string_view name, double param = 0.0, double w = 1.0) {
  if (name == "rayleigh") return kappa_mu(0.0, 1.0, w);
  if (name == "one_sided_gaussian") return kappa_mu(0.0, 0.5, w);
  if (name == "rice") {
    if (!(param >= 0.0)) throw config_error("rice: K must be >= 0");
    return kappa_mu(param, 1.0, w);
  }
  if (name == "nakagami") {
    if (!(param > 0.0)) throw config_error("nakagami: m must be > 0");
    return kappa_mu(0.0, param, w);
  }
  if (name == "nakagami_eta") {
    if (!(param > 0.0)) throw config_error("nakagami: m must be > 0");
    return eta_mu(1.0, param / 2.0, w);
  }
  if (name == "hoyt") {
    if (!(param > 0.0 && param <= 1.0)) throw config_error("hoyt: q must lie in (0, 1]");
    return eta_mu(param * param, 0.5, w);
  }
  throw config_error("unknown fading special case: " + std::string(name));
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  std::string str(s);
  try {
    std::size_t pos = 0;
    v = std::stod(str, &pos);
    if (pos != str.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw config_error("fading: bad number for " + std::string(what) + ": '" + str + "'");
  }
  return v;
}

}  // namespace detail

inline std::string describe(const FadingModel& m) {
  using detail::fmt_double;
  if (auto* k = std::get_if<KappaMuParams>(&m)) {
    return "kappa-mu:kappa=" + fmt_double(k->kappa) + ",mu=" + fmt_double(k->mu) + ",w=" + fmt_double(k->mean_power);
  }
  const auto& e = std::get<EtaMuParams>(m);
  return "eta-mu:eta=" + fmt_double(e.eta) + ",mu=" + fmt_double(e.mu) + ",w=" + fmt_double(e.mean_power);
}

// "rayleigh", "rice:K=2", "nakagami:m=2", "hoyt:q=0.5", "one-sided-gaussian",
// "kappa-mu:kappa=3,mu=2", "eta-mu:eta=2,mu=1"; any of them may add ",w=<mean power>".
inline FadingModel parse_fading(std::string_view spec) {
  const auto colon = spec.find(':');
  std::string name(spec.substr(0, colon));
  for (auto& c : name) {
    if (c == '_') c = '-';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  std::map<std::string, double> kv;
  if (colon != std::string_view::npos) {
    std::string_view rest = spec.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw config_error("fading: expected key=value in '" + std::string(item) + "'");
      const std::string key(item.substr(0, eq));
      kv[key] = detail::parse_double(item.substr(eq + 1), key);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  }
  auto take = [&](const std::string& key, std::optional<double> dflt = std::nullopt) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (!dflt) throw config_error("fading '" + name + "': missing parameter " + key);
      return *dflt;
    }
    const double v = it->second;
    kv.erase(it);
    return v;
  };
  const double w = take("w", 1.0);
  FadingModel m;
  if (name == "rayleigh") {
    m = special_case("rayleigh", 0.0, w);
  } else if (name == "one-sided-gaussian") {
    m = special_case("one_sided_gaussian", 0.0, w);
  } else if (name == "rice") {
    m = special_case("rice", take("K"), w);
  } else if (name == "nakagami") {
    m = special_case("nakagami", take("m"), w);
  } else if (name == "hoyt") {
    m = special_case("hoyt", take("q"), w);
  } else if (name == "kappa-mu") {
    const double k = take("kappa");
    m = kappa_mu(k, take("mu"), w);
  } else if (name == "eta-mu") {
    const double e = take("eta");
    m = eta_mu(e, take("mu"), w);
  } else {
    throw config_error("unknown fading model '" + name + "'");
  }
  if (!kv.empty()) throw config_error("fading '" + name + "': unexpected parameter " + kv.begin()->first);
  return m;
}

}  // namespace d2dgeo
