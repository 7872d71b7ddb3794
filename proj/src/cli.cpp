#include "kinetic/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "kinetic/branching.hpp"
#include "kinetic/config.hpp"
#include "kinetic/error.hpp"
#include "kinetic/fourier.hpp"
#include "kinetic/limits.hpp"
#include "kinetic/parallel.hpp"
#include "kinetic/spectral.hpp"
#include "kinetic/spine.hpp"

#ifndef KINETIC_VERSION
#define KINETIC_VERSION "unknown"
#endif

namespace kinetic {

namespace {

struct Options {
  std::string command;
  std::string target;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out_dir = ".";
  bool strict = false;
  std::string format = "json";
};

// What a command produced. `passed` is set by commands that check something.
struct Outcome {
  std::string name;
  Json result = Json::object();
  std::optional<bool> passed;
  double capped_fraction = 0.0;
  std::string csv;
  std::string binary;
};

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const RegimeReport& r) {
  Json j;
  j["label"] = to_string(r.label);
  j["provenance"] = r.provenance == Provenance::kClosedForm ? "closed_form" : "estimated";
  j["phi_1"] = r.phi1;
  j["phi_1_se"] = r.phi1_se;
  j["mu_prime_1"] = r.mu_prime1;
  j["phi_2"] = r.phi2;
  j["mu_prime_2"] = r.mu_prime2;
  j["c_mean"] = r.c_mean;
  j["c_second_moment"] = number_or_null(r.c_second_moment);
  j["zero_tolerance"] = r.zero_tolerance;
  j["gamma_star"] = r.gamma_star ? Json(*r.gamma_star) : Json(nullptr);
  Json probe = Json::array();
  for (const auto& [p, phi] : r.phi_at_p) {
    const auto it = r.c_abs_moment_at_p.find(p);
    probe.push_back({{"p", p},
                     {"phi", phi},
                     {"c_abs_moment", it == r.c_abs_moment_at_p.end() ? Json(nullptr)
                                                                      : number_or_null(it->second)}});
  }
  j["probe"] = probe;
  j["notes"] = r.notes;
  return j;
}

Json to_json(const HConstants& h) {
  return {{"label", to_string(h.label)}, {"gamma", h.gamma},   {"m0", h.m0},
          {"c0", h.c0},                  {"sigma0", h.sigma0}, {"c_plus", h.c_plus},
          {"c_minus", h.c_minus}};
}

Json to_json(const ManyToOneResult& r, const Integrand& g) {
  Json j{{"g", g.describe()},   {"tree", r.lhs},          {"tree_se", r.se_lhs},
         {"spine", r.rhs},      {"spine_se", r.se_rhs},   {"overlap_99", r.overlap},
         {"spine_noisy", r.rhs_noisy}};
  if (!r.warning.empty()) j["warning"] = r.warning;
  return j;
}

Json to_json(const CFComparison& c) {
  return {{"sup_distance", c.sup_distance}, {"tolerance", c.tolerance},
          {"xi_limit", c.xi_limit},         {"mode", c.mode},
          {"passed", c.passed},             {"capped_fraction", c.capped_fraction},
          {"bias_flag", c.bias_flag}};
}

SimulationPlan base_plan(const ScenarioConfig& cfg, std::vector<double> checkpoints,
                         std::vector<double> gammas) {
  SimulationPlan plan{.model = cfg.model,
                      .ic = cfg.ic,
                      .checkpoints = std::move(checkpoints),
                      .gammas = std::move(gammas),
                      .alive_integrands = {},
                      .dead_integrands = {},
                      .max_alive = cfg.simulate.max_alive,
                      .max_events = cfg.simulate.max_events,
                      .seed = cfg.seed};
  return plan;
}

std::string grid_csv(const std::vector<const CFGrid*>& grids) {
  std::ostringstream os;
  bool header = true;
  for (const CFGrid* g : grids) {
    g->write_csv(os, header);
    header = false;
  }
  return os.str();
}

Outcome cmd_classify(const ScenarioConfig& cfg) {
  Outcome o;
  o.name = "classify";
  const auto profile = SpectralProfile::from_model(cfg.model, cfg.seed);
  o.result["model"] = cfg.model.describe();
  o.result["regime"] = to_json(classify_regime(profile));
  o.result["ic"] = cfg.ic.describe();
  o.result["h_constants"] = to_json(cfg.ic.h_constants());
  return o;
}

Outcome cmd_simulate(const ScenarioConfig& cfg, unsigned threads) {
  Outcome o;
  o.name = "simulate";
  const auto& s = cfg.simulate;
  const SimulationPlan plan = base_plan(cfg, s.checkpoints, s.gammas);
  const Ensemble ens = simulate_ensemble(plan, s.n, threads);
  std::ostringstream csv;
  write_summary_csv(csv, ens, plan);
  o.csv = csv.str();
  if (s.dump) {
    std::ostringstream bin;
    write_binary_dump(bin, ens, plan);
    o.binary = bin.str();
  }
  o.capped_fraction = ens.capped_fraction;
  o.result["model"] = cfg.model.describe();
  o.result["ic"] = cfg.ic.describe();
  o.result["replicates"] = s.n;
  o.result["capped"] = ens.capped;
  o.result["bias_flag"] = ens.bias_flag;
  o.result["checkpoints"] = s.checkpoints;
  o.result["gammas"] = s.gammas;
  return o;
}

Outcome cmd_solve(const ScenarioConfig& cfg, unsigned threads) {
  Outcome o;
  o.name = "solve";
  const auto& s = cfg.solve;
  const auto panel = QuadraturePanel::build(cfg.model, s.panel_m, cfg.seed);
  const CFGrid phi0 = CFGrid::from_function(s.xi_max, s.n_points,
                                            [&](double xi) { return cfg.ic.cf(xi); });
  EvolveOptions eo;
  eo.t_end = s.t_end;
  eo.dt = s.dt;
  eo.checkpoints = s.checkpoints;
  eo.threads = threads;
  const auto res = evolve(phi0, panel, eo);
  std::vector<const CFGrid*> grids;
  for (const auto& g : res.checkpoints) grids.push_back(&g);
  if (grids.empty() || grids.back()->time() != res.final_grid.time()) grids.push_back(&res.final_grid);
  o.csv = grid_csv(grids);
  const double clamp = res.evaluations == 0 ? 0.0
                                            : static_cast<double>(res.clamped) /
                                                  static_cast<double>(res.evaluations);
  o.result["steps"] = res.steps;
  o.result["panel_atoms"] = panel.atoms.size();
  o.result["clamp_fraction"] = clamp;
  o.result["max_pre_projection_modulus"] = res.max_premodulus;
  o.result["acceptance_eligible"] = res.clamped == 0;
  return o;
}

Outcome cmd_many_to_one(const ScenarioConfig& cfg, unsigned threads) {
  Outcome o;
  o.name = "verify_many_to_one";
  const auto& v = cfg.verify;
  std::vector<Integrand> gs = v.integrands;
  if (gs.empty()) {
    gs = {{IntegrandKind::kOne, 0.0, 1.0},
          {IntegrandKind::kExpGamma, v.alpha, 1.0},
          {IntegrandKind::kVExpGamma, v.alpha, 1.0},
          {IntegrandKind::kExpGammaAbsP, v.alpha, 1.5}};
  }
  ManyToOneSetup setup;
  setup.alpha = v.alpha;
  setup.t = v.t;
  setup.n_trees = v.n_trees;
  setup.n_paths = v.n_paths;
  setup.seed = cfg.seed;
  setup.threads = threads;
  const auto profile = SpectralProfile::from_model(cfg.model, cfg.seed);
  const auto batch = many_to_one_batch(profile, cfg.ic, gs, setup);
  bool all = true;
  Json alive = Json::array(), dead = Json::array();
  for (std::size_t k = 0; k < gs.size(); ++k) {
    alive.push_back(to_json(batch.alive[k], gs[k]));
    dead.push_back(to_json(batch.dead[k], gs[k]));
    all = all && batch.alive[k].overlap && batch.dead[k].overlap;
  }
  o.result["alive_particles"] = alive;
  o.result["dead_particles"] = dead;
  o.result["alpha"] = v.alpha;
  o.result["t"] = v.t;
  o.passed = all;
  return o;
}

Outcome cmd_martingale(const ScenarioConfig& cfg, unsigned threads) {
  Outcome o;
  o.name = "verify_martingale";
  const auto& v = cfg.verify;
  const auto profile = SpectralProfile::from_model(cfg.model, cfg.seed);
  const double phi = profile.phi(v.gamma);
  const SimulationPlan plan = base_plan(cfg, v.checkpoints, {v.gamma});
  const Ensemble ens = simulate_ensemble(plan, v.n, threads);
  const auto series = martingale_series(ens, plan, 0, phi);
  std::ostringstream csv;
  csv.precision(17);
  csv << "t,n,mean,se,variance,variance_se\n";
  Json rows = Json::array();
  bool all = true;
  for (const auto& p : series) {
    const bool ok = std::abs(p.mean - 1.0) <= 3.0 * p.se + 1e-12;
    all = all && ok;
    csv << p.t << ',' << p.n << ',' << p.mean << ',' << p.se << ',' << p.variance << ','
        << p.variance_se << '\n';
    rows.push_back({{"t", p.t}, {"mean", p.mean}, {"se", p.se}, {"variance", p.variance},
                    {"within_3se", ok}});
  }
  o.csv = csv.str();
  o.result["gamma"] = v.gamma;
  o.result["phi_gamma"] = phi;
  o.result["mu_prime_gamma"] = profile.mu_prime(v.gamma);
  o.result["series"] = rows;
  if (series.size() >= 2) {
    const auto vp = variance_plateau(series, series.size() - 2, series.size() - 1);
    o.result["variance_plateau"] = {{"t1", vp.t1}, {"t2", vp.t2}, {"var1", vp.var1},
                                    {"var2", vp.var2}, {"combined_se", vp.combined_se},
                                    {"plateau", vp.plateau}};
  }
  Json drift = Json::array();
  for (const auto& d : max_position_drift(ens, plan, v.gamma, phi)) {
    drift.push_back({{"t", d.t}, {"q25", number_or_null(d.q25)}, {"median", number_or_null(d.median)},
                     {"q75", number_or_null(d.q75)}, {"extinct", d.extinct}});
  }
  o.result["max_position_drift"] = drift;
  o.capped_fraction = ens.capped_fraction;
  o.passed = all;
  return o;
}

Outcome cmd_fixpoint(const ScenarioConfig& cfg, unsigned threads) {
  Outcome o;
  o.name = "verify_fixpoint";
  const auto& v = cfg.verify;
  const auto profile = SpectralProfile::from_model(cfg.model, cfg.seed);
  const auto regime = classify_regime(profile).label;
  if (regime != Regime::kC && regime != Regime::kD) {
    throw Error(ErrorCode::kRegimeMismatch, std::string("fixed point check needs regime C or D, model is ") +
                                                to_string(regime));
  }
  SimulationPlan plan = base_plan(cfg, {v.horizon}, {});
  plan.ic = InitialCondition::point(0.0);
  const Ensemble ens = simulate_ensemble(plan, v.n, threads);
  const auto rep = fixpoint_residual_c(cfg.model, column(ens, 0, Field::kC), cfg.seed + 1);
  o.result = {{"regime", to_string(regime)},
              {"horizon", v.horizon},
              {"n", rep.n},
              {"ks", rep.ks},
              {"ks_threshold", rep.ks_threshold},
              {"cf_sup_distance", rep.cf_sup},
              {"transformed_mean", rep.transformed_mean},
              {"transformed_se", rep.transformed_se},
              {"passed", rep.passed}};
  o.capped_fraction = ens.capped_fraction;
  o.passed = rep.passed;
  return o;
}

MixtureOptions mixture_options(const ScenarioConfig& cfg, unsigned threads) {
  const auto& l = cfg.limit;
  MixtureOptions opt;
  opt.sim = {l.n, cfg.seed, threads};
  opt.m = l.m;
  opt.mixture_seed = cfg.seed + 1;
  opt.xi_limit = l.xi_limit;
  opt.n_points = l.n_points;
  opt.tolerance = l.tolerance;
  return opt;
}

Outcome cmd_limit(const ScenarioConfig& cfg, const std::string& which, unsigned threads) {
  Outcome o;
  o.name = "limit_" + which;
  const auto& l = cfg.limit;
  const auto profile = SpectralProfile::from_model(cfg.model, cfg.seed);
  const std::string c = l.which_case;
  o.result["case"] = c;
  if (which == "thm2") {
    const Thm2Case tc = c == "a" || c == "A" ? Thm2Case::kA
                        : c == "b" || c == "B" ? Thm2Case::kB
                        : c == "c" || c == "C" ? Thm2Case::kC
                                               : throw Error(ErrorCode::kConfig, "thm2 case must be a, b or c");
    const auto rep = verify_thm2(profile, tc, l.t_grid, {l.n, cfg.seed, threads});
    Json ratios = Json::array();
    for (const auto& r : rep.ratios) {
      ratios.push_back({{"t", r.t}, {"median", r.median}, {"q25", r.q25}, {"q75", r.q75}, {"n", r.n}});
    }
    o.result["mode"] = rep.mode;
    o.result["ratios"] = ratios;
    if (tc == Thm2Case::kC) {
      o.result["c_inf_mean"] = rep.c_inf_mean;
      o.result["c_inf_se"] = rep.c_inf_se;
      o.result["c_inf_expected"] = rep.c_inf_expected;
      o.result["cauchy_gap_median"] = rep.cauchy_gap_median;
      o.result["final_abs_median"] = rep.c_final_abs_median;
    }
    o.passed = rep.passed;
  } else if (which == "thm3" || (which == "thm4" && (c == "E" || c == "e"))) {
    const auto cmp = verify_thm3e_thm4(profile, cfg.ic, l.t, mixture_options(cfg, threads));
    o.result.update(to_json(cmp));
    o.capped_fraction = cmp.capped_fraction;
    o.passed = cmp.passed;
  } else if (which == "thm4" || which == "thm5") {
    LimitCase lc = LimitCase::kThm5;
    if (which == "thm4") {
      if (c == "A" || c == "a") {
        lc = LimitCase::kThm4A;
      } else if (c == "C" || c == "c") {
        lc = LimitCase::kThm4C;
      } else if (c == "D" || c == "d") {
        lc = LimitCase::kThm4D;
      } else {
        throw Error(ErrorCode::kConfig, "thm4 case must be A, C, D or E");
      }
    }
    const auto cmp = verify_thm4_thm5(lc, profile, cfg.model, cfg.ic, l.gamma, l.t,
                                      mixture_options(cfg, threads));
    o.result.update(to_json(cmp));
    o.capped_fraction = cmp.capped_fraction;
    o.passed = cmp.passed;
  } else if (which == "thm6") {
    const Thm6Case tc = c == "A" || c == "a" ? Thm6Case::kA
                        : c == "B" || c == "b" ? Thm6Case::kB
                        : c == "C" || c == "c" ? Thm6Case::kC
                        : c == "D" || c == "d" ? Thm6Case::kD
                                               : throw Error(ErrorCode::kConfig, "thm6 case must be A, B, C or D");
    Thm6Options opt;
    opt.sim = {l.n, cfg.seed, threads};
    opt.reference_seed = cfg.seed + 1;
    opt.ks_tolerance = l.ks_tolerance;
    const auto rep = verify_thm6(tc, profile, cfg.model, cfg.ic, l.t, opt);
    o.result["mode"] = rep.mode;
    if (tc == Thm6Case::kA || tc == Thm6Case::kB) {
      o.result["ratio_median"] = rep.ratio_median;
      o.result["ratio_q25"] = rep.ratio_q25;
      o.result["ratio_q75"] = rep.ratio_q75;
    } else {
      o.result["ks"] = rep.ks;
      o.result["ks_tolerance"] = rep.ks_tolerance;
      o.result["cauchy_gap_median"] = rep.cauchy_gap_median;
      o.result["final_abs_median"] = rep.w_final_abs_median;
    }
    o.passed = rep.passed;
  } else {
    throw Error(ErrorCode::kConfig, "limit target must be thm2, thm3, thm4, thm5 or thm6");
  }
  o.result["passed"] = *o.passed;
  return o;
}

Outcome cmd_crosscheck(const ScenarioConfig& cfg, unsigned threads) {
  Outcome o;
  o.name = "crosscheck";
  const auto& x = cfg.crosscheck;
  SimulationPlan plan = base_plan(cfg, {x.t}, {});
  const Ensemble ens = simulate_ensemble(plan, x.n, threads);
  const CFGrid mc = empirical_cf(column(ens, 0, Field::kW), x.xi_max, x.n_points);
  const auto panel = QuadraturePanel::build(cfg.model, x.panel_m, cfg.seed + 1);
  const CFGrid phi0 = CFGrid::from_function(x.xi_max, x.n_points,
                                            [&](double xi) { return cfg.ic.cf(xi); });
  EvolveOptions eo;
  eo.t_end = x.t;
  eo.dt = x.dt;
  eo.threads = threads;
  const auto res = evolve(phi0, panel, eo);
  const double d = sup_distance(mc, res.final_grid);
  std::ostringstream csv;
  csv.precision(17);
  csv << "xi,mc_re,mc_im,solver_re,solver_im\n";
  for (std::size_t i = 0; i < mc.size(); ++i) {
    csv << mc.xi(i) << ',' << mc[i].real() << ',' << mc[i].imag() << ','
        << res.final_grid[i].real() << ',' << res.final_grid[i].imag() << '\n';
  }
  o.csv = csv.str();
  o.capped_fraction = ens.capped_fraction;
  o.passed = d <= x.tolerance && res.clamped == 0 && !ens.bias_flag;
  o.result = {{"t", x.t},
              {"replicates", x.n},
              {"panel_m", x.panel_m},
              {"sup_distance", d},
              {"tolerance", x.tolerance},
              {"solver_clamped", res.clamped},
              {"passed", *o.passed}};
  return o;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnstable: return kExitUnstable;
    case ErrorCode::kInvariantViolation: return kExitInternal;
    default: return kExitInvalid;
  }
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::kConfig, "cannot write " + p.string());
  f << bytes;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options opt;
  opt.threads = default_threads();
  CLI::App app{"Kinetic equations and branching random walks"};
  app.add_option("command", opt.command,
                 "classify | simulate | solve | verify | limit | crosscheck")
      ->required();
  app.add_option("target", opt.target,
                 "verify: many-to-one | martingale | fixpoint; limit: thm2 .. thm6");
  app.add_option("--config", opt.config_path, "scenario JSON")->required();
  app.add_option("--seed", opt.seed, "override the config seed");
  app.add_option("--threads", opt.threads, "worker threads (default 1)");
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_flag("--strict", opt.strict, "nonzero exit when a check fails");
  app.add_option("--format", opt.format, "stdout format")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << e.what() << '\n';
    return kExitInvalid;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    ScenarioConfig cfg = load_config(opt.config_path);
    if (opt.seed) cfg.seed = *opt.seed;
    const unsigned threads = std::max(1u, opt.threads);

    Outcome o;
    if (opt.command == "classify") {
      o = cmd_classify(cfg);
    } else if (opt.command == "simulate") {
      o = cmd_simulate(cfg, threads);
    } else if (opt.command == "solve") {
      o = cmd_solve(cfg, threads);
    } else if (opt.command == "verify") {
      if (opt.target == "many-to-one") {
        o = cmd_many_to_one(cfg, threads);
      } else if (opt.target == "martingale") {
        o = cmd_martingale(cfg, threads);
      } else if (opt.target == "fixpoint") {
        o = cmd_fixpoint(cfg, threads);
      } else {
        throw Error(ErrorCode::kConfig, "verify target must be many-to-one, martingale or fixpoint");
      }
    } else if (opt.command == "limit") {
      o = cmd_limit(cfg, opt.target, threads);
    } else if (opt.command == "crosscheck") {
      o = cmd_crosscheck(cfg, threads);
    } else {
      throw Error(ErrorCode::kConfig, "unknown command '" + opt.command + "'");
    }

    Json report;
    report["command"] = opt.command + (opt.target.empty() ? "" : " " + opt.target);
    report["version"] = KINETIC_VERSION;
    report["config_hash"] = hex64(config_hash(cfg.source));
    report["seed"] = cfg.seed;
    report["capped_fraction"] = o.capped_fraction;
    report["result"] = o.result;
    if (o.passed) report["passed"] = *o.passed;
    const std::string json_text = report.dump(2) + "\n";

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Json meta{{"command", report["command"]},
              {"version", KINETIC_VERSION},
              {"config_hash", report["config_hash"]},
              {"seed", cfg.seed},
              {"capped_fraction", o.capped_fraction},
              {"wall_clock_seconds", wall},
              {"threads", threads}};

    const std::filesystem::path dir(opt.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / (o.name + ".json"), json_text);
    if (!o.csv.empty()) write_file(dir / (o.name + ".csv"), o.csv);
    if (!o.binary.empty()) write_file(dir / (o.name + ".bin"), o.binary);
    write_file(dir / (o.name + ".run_meta.json"), meta.dump(2) + "\n");

    out << (opt.format == "csv" && !o.csv.empty() ? o.csv : json_text);
    if (o.passed && !*o.passed) {
      err << o.name << ": check failed\n";
      if (opt.strict) return kExitCheckFailed;
    }
    return kExitOk;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace kinetic
