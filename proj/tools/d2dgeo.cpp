#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "d2dgeo.hpp"

using namespace d2dgeo;

namespace {

struct Options {
  std::string config;
  std::string fading_intended, fading_interferer, link;
  std::vector<std::string> sets;
  std::string format = "csv";
  std::string out;
  bool mc = false;
  bool analytic = false;
  std::optional<std::size_t> drops;
  std::optional<std::uint64_t> seed;
  std::string sweep = "snr";
  std::optional<double> from, to, step;
  std::string checks;
};

struct usage_error : config_error {
  using config_error::config_error;
};

json parse_scalar(const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (const std::exception&) {
  }
  return v;
}

RunConfig resolve_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  json ov = json::object();
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw usage_error("--set expects key=value, got '" + kv + "'");
    ov[kv.substr(0, eq)] = parse_scalar(kv.substr(eq + 1));
  }
  if (!o.fading_intended.empty()) ov["fading_intended"] = o.fading_intended;
  if (!o.fading_interferer.empty()) ov["fading_interferer"] = o.fading_interferer;
  if (!o.link.empty()) ov["link"] = o.link;
  if (o.drops) ov["mc_drops"] = *o.drops;
  if (o.seed) ov["seed"] = *o.seed;
  return apply_json(c, ov);
}

std::vector<double> make_grid(double from, double to, double step) {
  if (!(step > 0.0) || !(to >= from) || !std::isfinite(from) || !std::isfinite(to)) {
    throw usage_error("empty sweep grid: need --from <= --to and --step > 0");
  }
  std::vector<double> g;
  const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(from + i * step);
  return g;
}

struct Sweep {
  std::string name, unit;
  std::vector<double> grid;
};

Sweep make_sweep(const Options& o) {
  Sweep s;
  double f, t, st;
  if (o.sweep == "snr") {
    s = {"SNR", "dB", {}};
    f = -5, t = 30, st = 1;
  } else if (o.sweep == "beta") {
    s = {"spectrum partition beta", "", {}};
    f = 0, t = 1, st = 0.05;
  } else if (o.sweep == "theta") {
    s = {"mode selection threshold theta", "m", {}};
    f = 20, t = 500, st = 20;
  } else {
    throw usage_error("--sweep must be snr, beta or theta");
  }
  s.grid = make_grid(o.from.value_or(f), o.to.value_or(t), o.step.value_or(st));
  return s;
}

RunConfig at(const RunConfig& base, const std::string& sweep, double x) {
  RunConfig c = base;
  if (sweep == "snr") c.snr_db = x;
  else if (sweep == "beta") c.scenario.params.beta = x;
  else c.scenario.params.theta = x;
  validate(c.resolved());
  return c;
}

CurveSeries new_curve(const std::string& label, const Sweep& sw, const std::string& y, const std::string& yu,
                      const std::string& hash) {
  CurveSeries c;
  c.label = label;
  c.x_name = sw.name;
  c.x_unit = sw.unit;
  c.y_name = y;
  c.y_unit = yu;
  c.config_hash = hash;
  return c;
}

void emit(const Options& o, const std::string& command, const RunConfig& cfg, const std::vector<CurveSeries>& curves,
          json extra = json::object()) {
  for (const auto& c : curves) validate(c);
  json meta = {{"command", command}, {"config", to_json(cfg)}, {"config_hash", config_hash(cfg)}};
  for (auto& [k, v] : extra.items()) meta[k] = v;
  if (o.format == "json") {
    const auto text = bundle(meta, curves).dump(2) + "\n";
    if (o.out.empty()) std::cout << text;
    else write_atomic(std::filesystem::path(o.out) / (command + ".json"), text);
    return;
  }
  for (const auto& c : curves) {
    if (o.out.empty()) {
      std::cout << "# " << c.label << "\n" << to_csv(c);
    } else {
      write_atomic(std::filesystem::path(o.out) / (command + "_" + slug(c.label) + ".csv"), to_csv(c));
    }
  }
}

int cmd_rate(const Options& o) {
  const auto base = resolve_config(o);
  const auto sw = make_sweep(o);
  const auto hash = config_hash(base);
  const std::string y = "average rate", yu = "nats/channel use";
  std::vector<CurveSeries> cs = {new_curve("R_c cellular", sw, y, yu, hash),
                                 new_curve("R_hat_d d2d mode", sw, y, yu, hash),
                                 new_curve("R_d potential d2d", sw, y, yu, hash)};
  std::vector<CurveSeries> mc = {new_curve("R_c cellular (Monte Carlo)", sw, y, yu, hash),
                                 new_curve("R_hat_d d2d mode (Monte Carlo)", sw, y, yu, hash),
                                 new_curve("R_d potential d2d (Monte Carlo)", sw, y, yu, hash)};
  for (double x : sw.grid) {
    const auto s = at(base, o.sweep, x).resolved();
    const auto r = avg_rates(s);
    cs[0].points.push_back({x, r.cellular, std::nullopt});
    cs[1].points.push_back({x, r.d2d_mode, std::nullopt});
    cs[2].points.push_back({x, r.potential_d2d, std::nullopt});
    if (o.mc) {
      const auto c = estimate(sim_config(s, LinkKind::cellular), McMetric::rate()).points.front();
      const auto d = estimate(sim_config(s, LinkKind::d2d), McMetric::rate()).points.front();
      const double pm = p_d2d_mode(s.params);
      mc[0].points.push_back(c);
      mc[1].points.push_back(d);
      mc[0].points.back().x = mc[1].points.back().x = x;
      const double se = std::hypot((1 - pm) * *c.se, pm * *d.se);
      mc[2].points.push_back({x, (1 - pm) * c.y + pm * d.y, se});
    }
  }
  if (o.mc) cs.insert(cs.end(), mc.begin(), mc.end());
  emit(o, "rate", base, cs, {{"sweep", o.sweep}});
  return 0;
}

int cmd_bep(const Options& o) {
  const auto base = resolve_config(o);
  const auto sw = make_sweep(o);
  const auto hash = config_hash(base);
  const std::string y = "average BEP";
  std::vector<CurveSeries> cs = {new_curve("P_ec cellular", sw, y, "", hash),
                                 new_curve("P_hat_ed d2d mode", sw, y, "", hash),
                                 new_curve("P_ed potential d2d", sw, y, "", hash)};
  std::vector<CurveSeries> mc = {new_curve("P_ec cellular (Monte Carlo)", sw, y, "", hash),
                                 new_curve("P_hat_ed d2d mode (Monte Carlo)", sw, y, "", hash)};
  bool fallback = false, noticed = false;
  for (double x : sw.grid) {
    const auto s = at(base, o.sweep, x).resolved();
    const auto b = avg_bep(s);
    if (b.monte_carlo) {
      fallback = true;
      if (!noticed) std::cerr << "notice: " << b.notice << "\n";
      noticed = true;
      cs[0].points.push_back({x, b.cellular, b.se_cellular});
      cs[1].points.push_back({x, b.d2d_mode, b.se_d2d_mode});
      const auto r = avg_rates(s);
      const double pm = p_d2d_mode(s.params);
      const double wc = r.cellular * (1 - pm), wd = r.d2d_mode * pm;
      const double se = wc + wd > 0 ? std::hypot(wc * b.se_cellular, wd * b.se_d2d_mode) / (wc + wd) : b.se_cellular;
      cs[2].points.push_back({x, b.potential_d2d, se});
    } else {
      cs[0].points.push_back({x, b.cellular, std::nullopt});
      cs[1].points.push_back({x, b.d2d_mode, std::nullopt});
      cs[2].points.push_back({x, b.potential_d2d, std::nullopt});
    }
    if (o.mc && !b.monte_carlo) {
      const auto m = McMetric::bep(s.bep_a, s.bep_b);
      auto c = estimate(sim_config(s, LinkKind::cellular), m).points.front();
      auto d = estimate(sim_config(s, LinkKind::d2d), m).points.front();
      c.x = d.x = x;
      mc[0].points.push_back(c);
      mc[1].points.push_back(d);
    }
  }
  if (fallback) {
    for (auto& c : cs) c.label += " (Monte Carlo fallback)";
  }
  if (o.mc && !fallback) cs.insert(cs.end(), mc.begin(), mc.end());
  emit(o, "bep", base, cs, {{"sweep", o.sweep}, {"monte_carlo_fallback", fallback}});
  return 0;
}

int cmd_ccdf(const Options& o) {
  const auto base = resolve_config(o);
  const auto s = base.resolved();
  const auto grid = make_grid(o.from.value_or(-10.0), o.to.value_or(30.0), o.step.value_or(1.0));
  std::vector<CurveSeries> cs = {sir_ccdf(s, grid)};
  cs[0].config_hash = config_hash(base);
  json extra = {{"link", to_string(s.link)}};
  if (o.mc) {
    auto e = estimate(sim_config(s, s.link), McMetric::ccdf(grid));
    e.config_hash = cs[0].config_hash;
    const double gap = sup_gap(e, cs[0]);
    cs.push_back(std::move(e));
    extra["sup_gap"] = gap;
    std::cerr << "sup_gap " << fmt17(gap) << "\n";
  }
  emit(o, "ccdf", base, cs, extra);
  return 0;
}

int cmd_validate(const Options& o) {
  const auto base = resolve_config(o);
  ValidationOptions v;
  v.params = base.resolved().params;
  v.drops = base.scenario.mc_drops;
  if (o.seed) v.seed = *o.seed;
  if (!o.checks.empty() && o.checks != "all") {
    std::stringstream ss(o.checks);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      int id = 0;
      try {
        id = std::stoi(tok);
      } catch (const std::exception&) {
        throw usage_error("--checks expects a comma separated list of 1..9");
      }
      if (id < 1 || id > 9) throw usage_error("--checks expects a comma separated list of 1..9");
      v.only.push_back(id);
    }
  }
  int failed = 0;
  const auto results = run_validation(v, [&](const CheckResult& r) {
    std::cout << format_result(r) << std::endl;
    failed += !r.passed;
  });
  std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"d2dgeo: rate, BEP and SIR CCDF of an overlay D2D network under kappa-mu and eta-mu fading"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "flat JSON scenario file")->check(CLI::ExistingFile);
    c->add_option("--fading-intended", o.fading_intended, "e.g. rayleigh, nakagami:m=2, kappa-mu:kappa=3,mu=2");
    c->add_option("--fading-interferer", o.fading_interferer, "same syntax as --fading-intended");
    c->add_option("--link", o.link, "d2d or cellular (ccdf)")->check(CLI::IsMember({"d2d", "cellular"}));
    c->add_option("--set", o.sets, "override any config key, key=value");
    c->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    c->add_option("--out", o.out, "output directory (default: stdout)");
    c->add_flag("--mc", o.mc, "add Monte Carlo curves");
    c->add_option("--drops", o.drops, "Monte Carlo drops per point");
    c->add_option("--seed", o.seed, "random seed");
  };
  auto sweep = [&](CLI::App* c) {
    c->add_option("--sweep", o.sweep, "snr, beta or theta")->check(CLI::IsMember({"snr", "beta", "theta"}));
    c->add_option("--from", o.from);
    c->add_option("--to", o.to);
    c->add_option("--step", o.step);
  };

  auto* rate = app.add_subcommand("rate", "average rate sweep");
  common(rate);
  sweep(rate);
  auto* bep = app.add_subcommand("bep", "average bit error probability sweep");
  common(bep);
  sweep(bep);
  bep->add_flag("--analytic", o.analytic, "analytic evaluation (default; falls back to Monte Carlo when unavailable)");
  auto* ccdf = app.add_subcommand("ccdf", "SIR CCDF on a dB grid");
  common(ccdf);
  ccdf->add_option("--from", o.from, "dB");
  ccdf->add_option("--to", o.to, "dB");
  ccdf->add_option("--step", o.step, "dB");
  auto* val = app.add_subcommand("validate", "run the analytic and Monte Carlo cross checks");
  common(val);
  val->add_option("--checks", o.checks, "comma separated subset of 1..9");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*rate) return cmd_rate(o);
    if (*bep) return cmd_bep(o);
    if (*ccdf) return cmd_ccdf(o);
    return cmd_validate(o);
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const convergence_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const d2dgeo::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const consistency_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
