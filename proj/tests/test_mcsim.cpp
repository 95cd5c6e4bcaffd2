#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "d2dgeo/mcsim.hpp"
#include "d2dgeo/sinr_functional.hpp"

using namespace d2dgeo;

namespace {

SimConfig d2d_cfg(std::size_t drops, std::uint64_t seed = 11) {
  SimConfig c;
  c.drops = drops;
  c.seed = seed;
  c.link = LinkKind::d2d;
  return c;
}

}  // namespace

TEST(D2dSnapshot, NoAlohaNoInterference) {
  auto c = d2d_cfg(2000);
  c.params.epsilon = 0.0;
  for (const auto& s : simulate(c)) EXPECT_EQ(s.interference, 0.0);
}

TEST(D2dSnapshot, MeanSignalIsMeanPower) {
  auto c = d2d_cfg(100000);
  c.fading_intended = kappa_mu(3.0, 2.0, 1.7);
  const auto v = simulate(c);
  const auto m = mean_se(v, [](const Snapshot& s) { return s.signal; });
  EXPECT_LT(std::abs(m.mean - 1.7), 4 * m.se);
}

TEST(D2dSnapshot, LaplaceMatchesClosedForm) {
  auto c = d2d_cfg(40000, 3);
  c.fading_interferer = eta_mu(0.5, 1.0, 1.0);
  const auto v = simulate(c);
  for (double s : {0.1, 1.0, 10.0}) {
    const auto m = mean_se(v, [&](const Snapshot& x) { return std::exp(-s * x.interference); });
    EXPECT_LT(std::abs(m.mean - laplace_d2d(s, c.fading_interferer, c.params)), 3 * m.se + 1e-12) << s;
  }
}

TEST(D2dSnapshot, SinrRecomputesExactly) {
  auto c = d2d_cfg(3000);
  for (const auto& s : simulate(c)) {
    EXPECT_EQ(s.sinr, s.signal / (s.interference + s.noise));
    EXPECT_GE(s.interference, 0.0);
    EXPECT_GE(s.signal, 0.0);
  }
}

TEST(CellularSnapshot, AllD2dLeavesNoTransmitters) {
  SimConfig c;
  c.link = LinkKind::cellular;
  c.drops = 1000;
  c.params.q = 1.0;
  c.params.theta = std::numeric_limits<double>::infinity();
  for (const auto& s : simulate(c)) {
    EXPECT_EQ(s.interference, 0.0);
    EXPECT_TRUE(s.empty_cell);
  }
}

TEST(CellularSnapshot, MeanInverseN) {
  SimConfig c;
  c.link = LinkKind::cellular;
  c.drops = 20000;
  c.window_radius_cells = 10.0;
  for (double lam_ratio : {1.0, 10.0}) {
    c.params.lambda = lam_ratio * c.params.lambda_b;
    const auto v = simulate(c);
    const auto m = mean_se(v, [](const Snapshot& s) { return 1.0 / s.cell_users; });
    EXPECT_LT(std::abs(m.mean - mean_inverse_n(c.params)), 3 * m.se) << lam_ratio;
  }
}

TEST(HexGridTest, NearestAndArea) {
  const auto p = default_params();
  const HexGrid g(p.lambda_b);
  for (int i = -3; i <= 3; ++i) {
    for (int j = -3; j <= 3; ++j) {
      double x, y;
      g.center(i, j, x, y);
      int a, b;
      g.nearest(x + 0.3 * g.a, y - 0.2 * g.a, a, b);
      EXPECT_EQ(a, i);
      EXPECT_EQ(b, j);
    }
  }
  // fraction of a box landing in the center cell equals cell area / box area
  auto rng = substream(9, 0);
  const double half = 2.0 * g.a;
  long hits = 0;
  const long n = 400000;
  for (long k = 0; k < n; ++k) {
    int a, b;
    g.nearest((2 * uniform_open(rng) - 1) * half, (2 * uniform_open(rng) - 1) * half, a, b);
    hits += (a == 0 && b == 0);
  }
  const double pr = 1.0 / p.lambda_b / (4 * half * half);
  EXPECT_LT(std::abs(double(hits) / n - pr), 4 * std::sqrt(pr * (1 - pr) / n));
}

TEST(Estimate, RayleighD2dRateMatchesEngine) {
  const auto c = d2d_cfg(200000, 5);
  const auto mc = estimate(c, McMetric::rate());
  const auto L = InterferenceTransform::d2d(c.fading_interferer, c.params);
  const double analytic =
      rate_prefactor(c.params, LinkKind::d2d) * expect(GFamily::rate(), c.fading_intended, L, c.params.n0);
  const auto& pt = mc.points.front();
  EXPECT_LT(std::abs(pt.y - analytic), 3 * *pt.se) << pt.y << " vs " << analytic;
}

TEST(Estimate, BepAtHugeNoiseIsHalf) {
  auto c = d2d_cfg(2000);
  c.params.n0 = 1e12;
  const auto pt = estimate(c, McMetric::bep(0.5, 0.5)).points.front();
  EXPECT_NEAR(pt.y, 0.5, std::max(*pt.se, 1e-6));
}

TEST(Estimate, CcdfMonotone) {
  SimConfig c;
  c.link = LinkKind::cellular;
  c.drops = 3000;
  std::vector<double> grid;
  for (double x = -10; x <= 30; x += 2) grid.push_back(x);
  const auto cur = estimate(c, McMetric::ccdf(grid));
  for (std::size_t i = 1; i < cur.points.size(); ++i) EXPECT_LE(cur.points[i].y, cur.points[i - 1].y);
  EXPECT_THROW(estimate(d2d_cfg(500), McMetric::rate()), config_error);
}

TEST(Determinism, SeedAndThreads) {
  auto c = d2d_cfg(3000, 42);
  c.threads = 1;
  const auto a = simulate(c);
  c.threads = 3;
  const auto b = simulate(c);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sinr, b[i].sinr);
    EXPECT_EQ(a[i].interference, b[i].interference);
  }
  c.link = LinkKind::cellular;
  c.drops = 1000;
  const auto x = simulate(c);
  c.threads = 1;
  const auto y = simulate(c);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i].sinr, y[i].sinr);
  c.seed = 43;
  EXPECT_NE(simulate(c)[0].sinr, y[0].sinr);
}

TEST(Window, DoublingChangesRateByLessThanOneSe) {
  auto c = d2d_cfg(50000, 8);
  const auto a = estimate(c, McMetric::rate()).points.front();
  c.window_radius_cells = 30.0;
  const auto b = estimate(c, McMetric::rate()).points.front();
  EXPECT_LT(std::abs(a.y - b.y), *a.se);
  c.window_radius_cells = 5.0;
  EXPECT_THROW(simulate(c), config_error);
}

TEST(StableSampler, LaplaceTransform) {
  const double c = 0.7, delta = 0.5;
  auto rng = substream(17, 0);
  const int n = 200000;
  std::vector<double> draws(n);
  for (auto& d : draws) d = stable_interference(c, delta, rng);
  for (double s : {0.01, 0.1, 1.0, 5.0, 20.0}) {
    double s1 = 0, s2 = 0;
    for (double d : draws) {
      const double e = std::exp(-s * d);
      s1 += e;
      s2 += e * e;
    }
    const double m = s1 / n, se = std::sqrt((s2 / n - m * m) / n);
    EXPECT_LT(std::abs(m - std::exp(-c * std::pow(s, delta))), 3 * se + 1e-12) << s;
  }
}

TEST(ModelSampler, MatchesCellularTransform) {
  const auto p = default_params();
  const auto f = kappa_mu(1.0, 2.0, 1.0);
  auto rng = substream(23, 0);
  const int n = 40000;
  std::vector<double> draws(n);
  for (auto& d : draws) d = model_cellular_interference(p, f, 40.0, rng);
  for (double s : {0.1, 0.3, 1.0}) {
    double s1 = 0, s2 = 0;
    for (double d : draws) {
      const double e = std::exp(-s * d);
      s1 += e;
      s2 += e * e;
    }
    const double m = s1 / n, se = std::sqrt((s2 / n - m * m) / n);
    EXPECT_LT(std::abs(m - std::exp(-cellular_exponent(s, f, p))), 3 * se) << s;
  }
}
