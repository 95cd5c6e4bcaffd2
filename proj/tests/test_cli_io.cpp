#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "d2dgeo/io.hpp"

using namespace d2dgeo;
namespace fs = std::filesystem;

namespace {

CurveSeries random_curve(std::uint64_t seed, bool with_se) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CurveSeries c{"curve " + std::to_string(seed), "SNR", "dB", "rate", "nats/channel use", {}, "00ff"};
  double x = -5.0;
  for (int i = 0; i < 40; ++i) {
    x += std::abs(u(rng)) + 1e-9;
    const double y = std::ldexp(u(rng), static_cast<int>(rng() % 200) - 100);
    c.points.push_back({x, y, with_se ? std::optional<double>(std::abs(u(rng)) / 3.0) : std::nullopt});
  }
  c.points[3].y = std::numeric_limits<double>::denorm_min();
  c.points[4].y = 0.1 + 0.2;
  return c;
}

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("d2dgeo_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(D2DGEO_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(CsvIo, RoundTripIsBitExact) {
  for (bool se : {false, true}) {
    const auto c = random_curve(se ? 7 : 8, se);
    const auto pts = parse_csv(to_csv(c));
    ASSERT_EQ(pts.size(), c.points.size());
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(pts[i], c.points[i]) << i;
  }
  EXPECT_EQ(to_csv(random_curve(1, false)).substr(0, 11), "x,y,stderr\n");
  EXPECT_THROW(parse_csv("a,b\n1,2\n"), config_error);
}

TEST(JsonIo, BundleRoundTripIsBitExact) {
  const std::vector<CurveSeries> cs = {random_curve(1, false), random_curve(2, true)};
  const auto text = bundle({{"command", "rate"}}, cs).dump();
  const auto back = curves_from_bundle(json::parse(text));
  ASSERT_EQ(back.size(), cs.size());
  EXPECT_EQ(back[0], cs[0]);
  EXPECT_EQ(back[1], cs[1]);
}

TEST(JsonIo, RejectsDescendingCurve) {
  auto c = random_curve(3, false);
  std::swap(c.points[0], c.points[1]);
  EXPECT_THROW(curve_from_json(curve_to_json(c)), config_error);
}

TEST(Config, DefaultsRoundTripThroughJson) {
  const RunConfig c;
  const auto back = apply_json(RunConfig{}, to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_NEAR(c.resolved().params.n0, std::pow(10.0, -0.5), 1e-15);
}

TEST(Config, HashChangesIffSemanticFieldChanges) {
  const RunConfig base;
  const auto h0 = config_hash(base);
  const json changes = {{"lambda_b_per_m2", 2e-6}, {"lambda_per_m2", 2e-5}, {"xi_per_m2", 2e-5},
                        {"q", 0.3},                {"epsilon", 0.5},       {"beta", 0.4},
                        {"theta_m", "inf"},        {"tau_c", 3.5},         {"tau_d", 3.0},
                        {"snr_db", 10.0},          {"fading_intended", "nakagami:m=2"},
                        {"fading_interferer", "hoyt:q=0.5"},               {"link", "cellular"},
                        {"bep_a", 1.0},            {"bep_b", 1.0},         {"quadrature", "gauss-laguerre"},
                        {"laguerre_order", 32},    {"rel_tol", 1e-9},      {"mc_drops", 5000},
                        {"hybrid_draws", 5000},    {"window_radius_cells", 20.0}, {"seed", 99}};
  ASSERT_EQ(changes.size(), to_json(base).size());
  for (const auto& [k, v] : changes.items()) {
    EXPECT_NE(config_hash(apply_json(base, {{k, v}})), h0) << k;
  }
  // same values spelled differently
  EXPECT_EQ(config_hash(apply_json(base, {{"q", 2e-1}, {"fading_intended", "rayleigh"}, {"theta_m", 1e2}})), h0);
  EXPECT_EQ(config_hash(apply_json(base, {{"fading_interferer", "kappa-mu:kappa=0,mu=1,w=1"}})), h0);
}

TEST(Config, FieldLevelErrors) {
  auto msg = [](const json& j) {
    try {
      apply_json(RunConfig{}, j);
    } catch (const config_error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg({{"bogus", 1}}).find("bogus"), std::string::npos);
  EXPECT_NE(msg({{"q", "high"}}).find("'q'"), std::string::npos);
  EXPECT_NE(msg({{"link", "uplink"}}).find("'link'"), std::string::npos);
  EXPECT_NE(msg({{"q", 1.5}}).find("q"), std::string::npos);
  EXPECT_NE(msg({{"tau_d", 2.0}}).find("tau_d"), std::string::npos);
  EXPECT_NE(msg({{"window_radius_cells", 5.0}}).find("window_radius_cells"), std::string::npos);
  EXPECT_NE(msg({{"fading_intended", "rice:K=-1"}}).find("rice"), std::string::npos);
  EXPECT_NE(msg({{"mc_drops", 10}}).find("mc_drops"), std::string::npos);
}

TEST(Config, LoadFromFile) {
  const auto d = temp_dir("load");
  {
    std::ofstream f(d / "s.json");
    f << R"({"snr_db": 10, "fading_intended": "kappa-mu:kappa=3,mu=2", "theta_m": 200})";
  }
  const auto c = load_config(d / "s.json");
  EXPECT_EQ(c.snr_db, 10.0);
  EXPECT_EQ(c.scenario.params.theta, 200.0);
  EXPECT_EQ(describe(c.scenario.fading_intended), "kappa-mu:kappa=3,mu=2,w=1");
  {
    std::ofstream f(d / "bad.json");
    f << "{not json";
  }
  EXPECT_THROW(load_config(d / "bad.json"), config_error);
  EXPECT_THROW(load_config(d / "missing.json"), config_error);
  fs::remove_all(d);
}

TEST(AtomicWrite, ReplacesWithoutLeavingTemp) {
  const auto d = temp_dir("atomic");
  write_atomic(d / "sub" / "a.csv", "first");
  write_atomic(d / "sub" / "a.csv", "second");
  EXPECT_EQ(slurp(d / "sub" / "a.csv"), "second");
  EXPECT_FALSE(fs::exists(d / "sub" / "a.csv.tmp"));
  fs::remove_all(d);
}

TEST(Cli, ExitCodes) {
  const auto d = temp_dir("exit");
  const auto log = d / "log.txt";
  EXPECT_EQ(run_cli("--help", log), 0);
  EXPECT_EQ(run_cli("rate --from 5 --to 0", log), 2);
  EXPECT_NE(slurp(log).find("empty sweep"), std::string::npos);
  EXPECT_EQ(run_cli("rate --set q=3", log), 2);
  EXPECT_EQ(run_cli("rate --fading-intended weibull", log), 2);
  EXPECT_EQ(run_cli("frobnicate", log), 2);
  // a tolerance below double precision cannot be met
  EXPECT_EQ(run_cli("rate --set rel_tol=1e-16 --from 20 --to 20", log), 3);
  fs::remove_all(d);
}

TEST(Cli, RateJsonReloadsAndMatchesCsv) {
  const auto d = temp_dir("rate");
  const auto log = d / "log.txt";
  ASSERT_EQ(run_cli("rate --from 0 --to 10 --step 5 --format json --out " + d.string(), log), 0) << slurp(log);
  const auto j = json::parse(slurp(d / "rate.json"));
  const auto cs = curves_from_bundle(j);
  ASSERT_EQ(cs.size(), 3u);
  EXPECT_EQ(j["meta"]["config_hash"], config_hash(RunConfig{}));
  ASSERT_EQ(run_cli("rate --from 0 --to 10 --step 5 --out " + d.string(), log), 0) << slurp(log);
  for (const auto& c : cs) {
    EXPECT_FALSE(c.points.front().se.has_value());
    const auto pts = parse_csv(slurp(d / ("rate_" + slug(c.label) + ".csv")));
    ASSERT_EQ(pts.size(), c.points.size());
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(pts[i], c.points[i]);
  }
  fs::remove_all(d);
}

TEST(Cli, CcdfWithSimulationReportsGap) {
  const auto d = temp_dir("ccdf");
  const auto log = d / "log.txt";
  ASSERT_EQ(run_cli("ccdf --mc --drops 4000 --from -5 --to 15 --step 5 --format json --out " + d.string(), log), 0)
      << slurp(log);
  const auto j = json::parse(slurp(d / "ccdf.json"));
  const auto cs = curves_from_bundle(j);
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_TRUE(cs[1].points.front().se.has_value());
  EXPECT_DOUBLE_EQ(j["meta"]["sup_gap"].get<double>(), sup_gap(cs[0], cs[1]));
  fs::remove_all(d);
}

TEST(Cli, BepFallbackNotice) {
  const auto d = temp_dir("bep");
  const auto log = d / "log.txt";
  ASSERT_EQ(run_cli("bep --analytic --fading-intended kappa-mu:kappa=1,mu=1.5 --drops 2000 --from 5 --to 5", log), 0);
  const auto out = slurp(log);
  EXPECT_NE(out.find("notice:"), std::string::npos);
  EXPECT_NE(out.find("Monte Carlo fallback"), std::string::npos);
  fs::remove_all(d);
}

TEST(Cli, ValidateExitStatusFollowsChecks) {
  const auto d = temp_dir("validate");
  const auto log = d / "log.txt";
  EXPECT_EQ(run_cli("validate --checks 1,3,8", log), 0);
  EXPECT_NE(slurp(log).find("3/3 checks passed"), std::string::npos);
  // check 7 is currently red at the default scenario (BEP ordering), so the command must fail
  EXPECT_EQ(run_cli("validate --checks 7", log), 1);
  EXPECT_NE(slurp(log).find("criterion 7: FAIL"), std::string::npos);
  EXPECT_EQ(run_cli("validate --checks 12", log), 2);
  fs::remove_all(d);
}
