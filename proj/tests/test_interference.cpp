#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <boost/math/special_functions/hypergeometric_pFq.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "d2dgeo/interference.hpp"

using namespace d2dgeo;

namespace {

std::vector<NetworkParams> param_sets() {
  std::vector<NetworkParams> v;
  auto p = default_params();
  v.push_back(p);
  p.theta = 40.0;
  p.q = 0.5;
  v.push_back(p);
  p.tau_d = 3.0;
  p.epsilon = 0.3;
  v.push_back(p);
  p.tau_d = 5.5;
  p.theta = std::numeric_limits<double>::infinity();
  v.push_back(p);
  p = default_params();
  p.xi = 3.0 / (std::numbers::pi * 500.0 * 500.0);
  p.theta = 400.0;
  p.tau_d = 3.7;
  v.push_back(p);
  return v;
}

// 1 - 2F1(m, delta; 1+delta; -z) from the Euler integral delta int_0^1 t^{delta-1} (1 - (1+zt)^{-m}) dt
double euler_one_minus(double m, double delta, double z) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto g = [&](double t) { return delta * std::pow(t, delta - 1.0) * -std::expm1(-m * std::log1p(z * t)); };
  return ts.integrate(g, 0.0, 1.0, 1e-14);
}

// outer integral 2 int_0^1 (1 - phi(u)) u^{-3} du by tanh-sinh
double euler_exponent(double s, double m, double scale, double delta, double tau) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto g = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double z = s * std::pow(u, tau) * scale;
    if (z < 1e-12) return 2.0 * m * delta / (1.0 + delta) * s * scale * std::pow(u, tau - 3.0);
    return 2.0 * euler_one_minus(m, delta, z) / (u * u * u);
  };
  return ts.integrate(g, 0.0, 1.0, 1e-12);
}

}  // namespace

TEST(D2dConstant, ClosedMatchesGenericKappaMu) {
  for (const auto& p : param_sets()) {
    for (auto f : {kappa_mu(0.0, 1.0, 1.0), kappa_mu(3.0, 2.0, 1.7), kappa_mu(0.4, 0.6, 0.5)}) {
      const double a = d2d_constant_c_closed(f, p), b = d2d_constant_c_generic(f, p);
      EXPECT_NEAR(a / b, 1.0, 1e-10) << describe(f);
    }
  }
}

TEST(D2dConstant, ClosedMatchesGenericEtaMu) {
  for (const auto& p : param_sets()) {
    for (auto f : {eta_mu(1.0, 0.5, 1.0), eta_mu(0.25, 0.5, 2.0), eta_mu(0.1, 1.7, 1.0)}) {
      const double a = d2d_constant_c_closed(f, p), b = d2d_constant_c_generic(f, p);
      EXPECT_NEAR(a / b, 1.0, 1e-10) << describe(f);
      EXPECT_NO_THROW(d2d_constant_c(f, p));
    }
  }
}

TEST(D2dConstant, RayleighExample) {
  const auto p = default_params();
  const double w = 2.3;
  const double xh = p.xi / (1.0 - std::exp(-xi_pi_theta2(p)) * (1.0 + xi_pi_theta2(p)));
  const double ref = p.q * p.epsilon * p.lambda * std::sqrt(w) * std::numbers::pi / (2.0 * xh);
  EXPECT_NEAR(d2d_constant_c(kappa_mu(0.0, 1.0, w), p) / ref, 1.0, 1e-12);
  EXPECT_NEAR(d2d_constant_c(eta_mu(1.0, 0.5, w), p) / ref, 1.0, 1e-12);
}

TEST(D2dConstant, OneSidedGaussianExample) {
  auto p = default_params();
  p.tau_d = 3.0;
  const double d = p.delta_d(), w = 0.8;
  const double xh = p.xi / (1.0 - std::exp(-xi_pi_theta2(p)) * (1.0 + xi_pi_theta2(p)));
  const double sinc = std::sin(std::numbers::pi * d) / (std::numbers::pi * d);
  const double ref = p.q * p.epsilon * p.lambda * std::pow(2 * w, d) / (xh * sinc) * std::tgamma(d + 0.5) /
                     (std::sqrt(std::numbers::pi) * std::tgamma(d + 1));
  EXPECT_NEAR(d2d_constant_c(kappa_mu(0.0, 0.5, w), p) / ref, 1.0, 1e-12);
}

TEST(D2dConstant, RiceExample) {
  const auto p = default_params();
  const double d = p.delta_d(), K = 2.5, w = 1.0;
  const double xh = p.xi / (1.0 - std::exp(-xi_pi_theta2(p)) * (1.0 + xi_pi_theta2(p)));
  const double sinc = std::sin(std::numbers::pi * d) / (std::numbers::pi * d);
  const double ref = p.q * p.epsilon * p.lambda / (xh * std::exp(K)) * boost::math::hypergeometric_1F1(1 + d, 1.0, K) /
                     sinc * std::pow(w / (1 + K), d);
  EXPECT_NEAR(d2d_constant_c(kappa_mu(K, 1.0, w), p) / ref, 1.0, 1e-12);
}

TEST(D2dConstant, NoInterferers) {
  auto p = default_params();
  const auto f = kappa_mu(1.0, 2.0, 1.0);
  p.q = 0.0;
  EXPECT_EQ(d2d_constant_c(f, p), 0.0);
  EXPECT_EQ(laplace_d2d(10.0, f, p), 1.0);
  p = default_params();
  p.epsilon = 0.0;
  EXPECT_EQ(d2d_constant_c(f, p), 0.0);
  EXPECT_EQ(InterferenceTransform::d2d(f, p)(5.0), 1.0);
}

TEST(LaplaceD2d, DefinitionAndScaling) {
  const auto p = default_params();
  const auto f = eta_mu(0.3, 1.2, 1.0);
  const double c = d2d_constant_c(f, p);
  EXPECT_EQ(laplace_d2d(0.0, f, p), 1.0);
  EXPECT_NEAR(laplace_d2d(1.0, f, p), std::exp(-c), 1e-15);
  for (double alpha : {0.1, 3.0, 40.0}) {
    for (double s : {0.1, 1.0, 10.0}) {
      EXPECT_NEAR(laplace_d2d(s / alpha, with_mean_power(f, alpha), p), laplace_d2d(s, f, p), 1e-13);
    }
  }
  EXPECT_THROW(laplace_d2d(-1.0, f, p), domain_error);
}

TEST(LaplaceCellular, HypergeometricAnchors) {
  const auto p = default_params();
  const double d = p.delta_c(), tau = p.tau_c;
  struct Case {
    FadingModel f;
    double m, scale;
  };
  const std::vector<Case> cases = {
      {kappa_mu(0.0, 2.0, 1.0), 2.0, 0.5},   // Nakagami m=2
      {eta_mu(1.0, 1.0, 1.0), 2.0, 0.5},     // Nakagami m=2, other family
      {kappa_mu(0.0, 1.0, 1.3), 1.0, 1.3},   // Rayleigh
      {eta_mu(1.0, 0.5, 1.3), 1.0, 1.3},     // Rayleigh, other family
      {kappa_mu(0.0, 0.5, 1.0), 0.5, 2.0},   // one-sided Gaussian
  };
  for (const auto& c : cases) {
    for (double s : {0.1, 1.0, 10.0}) {
      const double ref = euler_exponent(s, c.m, c.scale, d, tau);
      EXPECT_NEAR(cellular_exponent(s, c.f, p) / ref, 1.0, 1e-7) << describe(c.f) << " s=" << s;
      EXPECT_NEAR(cellular_exponent_nested(s, c.f, p) / ref, 1.0, 1e-7) << describe(c.f) << " s=" << s;
      EXPECT_NEAR(cellular_exponent_hypergeometric(s, c.f, p) / ref, 1.0, 1e-7) << describe(c.f) << " s=" << s;
    }
  }
}

TEST(LaplaceCellular, ExclusionHypergeometric) {
  for (double m : {0.5, 1.0, 2.0, 7.0}) {
    for (double d : {0.4, 0.5, 2.0 / 3.0}) {
      for (double z : {1e-6, 0.01, 0.3, 0.9}) {
        const double ref = 1.0 - boost::math::hypergeometric_pFq({m, d}, {1.0 + d}, -z);
        EXPECT_NEAR(one_minus_exclusion_2f1(m, d, z) / ref, 1.0, z < 1e-3 ? 1e-6 : 1e-12);
      }
      for (double z : {2.0, 30.0, 1e4}) EXPECT_NEAR(one_minus_exclusion_2f1(m, d, z) / euler_one_minus(m, d, z), 1.0, 1e-11);
    }
  }
}

TEST(LaplaceCellular, HoytMixtureAnchor) {
  const auto p = default_params();
  const double d = p.delta_c(), tau = p.tau_c;
  const auto f = eta_mu(0.25, 0.5, 1.0);
  const auto& e = std::get<EtaMuParams>(f);
  for (double s : {0.1, 1.0, 10.0}) {
    // sum_n a_n [1 - 2F1(1+2n, delta; 1+delta; -s u^tau w/h)]
    double ref = 0.0;
    const double rho = e.rho();
    double a = std::pow(1.0 - rho, 0.5);
    for (int n = 0; n < 200; ++n) {
      ref += a * euler_exponent(s, 1.0 + 2 * n, e.mean_power / e.h(), d, tau);
      a *= rho * (n + 0.5) / (n + 1.0);
      if (a < 1e-14) break;
    }
    EXPECT_NEAR(cellular_exponent(s, f, p) / ref, 1.0, 1e-7) << s;
    EXPECT_NEAR(cellular_exponent_nested(s, f, p) / ref, 1.0, 1e-7) << s;
  }
}

TEST(LaplaceCellular, OneDimensionalMatchesNestedGeneral) {
  auto p = default_params();
  for (double tau : {3.0, 4.0, 5.0}) {
    p.tau_c = tau;
    for (auto f : {kappa_mu(3.0, 2.0, 1.0), kappa_mu(0.7, 0.8, 2.0), eta_mu(0.2, 1.5, 1.0)}) {
      for (double s : {0.01, 0.3, 4.0, 100.0}) {
        const double a = cellular_exponent(s, f, p), b = cellular_exponent_nested(s, f, p);
        EXPECT_NEAR(a / b, 1.0, 1e-8) << describe(f) << " tau=" << tau << " s=" << s;
      }
    }
  }
}

TEST(LaplaceCellular, RadiusFree) {
  auto p = default_params();
  const auto f = kappa_mu(1.0, 1.5, 1.0);
  const double a = cellular_exponent_nested(2.0, f, p);
  p.lambda_b *= 7.0;
  EXPECT_NEAR(cellular_exponent_nested(2.0, f, p) / a, 1.0, 1e-9);
}

TEST(InterferenceTransformTest, Monotone) {
  const auto p = default_params();
  for (auto t : {InterferenceTransform::d2d(kappa_mu(3.0, 2.0, 1.0), p),
                 InterferenceTransform::cellular(eta_mu(0.5, 1.0, 1.0), p)}) {
    EXPECT_EQ(t(0.0), 1.0);
    double prev = 1.0;
    for (double s = 1e-3; s < 1e4; s *= 1.7) {
      const double v = t(s);
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, prev);
      prev = v;
    }
  }
  EXPECT_EQ(InterferenceTransform::none()(100.0), 1.0);
  EXPECT_THROW(InterferenceTransform::stable(-1.0, 0.5), config_error);
  EXPECT_THROW(InterferenceTransform::stable(1.0, 1.0), config_error);
}

TEST(InterferenceTransformTest, KindAccessors) {
  const auto p = default_params();
  const auto f = kappa_mu(0.0, 1.0, 1.0);
  const auto t = InterferenceTransform::d2d(f, p);
  EXPECT_EQ(t.kind(), LinkKind::d2d);
  EXPECT_EQ(t.delta(), p.delta_d());
  EXPECT_DOUBLE_EQ(t.c(), d2d_constant_c(f, p));
  EXPECT_EQ(InterferenceTransform::cellular(f, p).kind(), LinkKind::cellular);
}
