#include "kinetic/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kinetic/error.hpp"

namespace kinetic {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::kConfig, msg); }

std::size_t as_size(double v, const std::string& what) {
  if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
    fail(what + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

ConfigObject::ConfigObject(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) fail(path_ + " must be an object");
}

bool ConfigObject::has(const std::string& key) const { return j_.contains(key); }

const Json& ConfigObject::get(const std::string& key) {
  if (!j_.contains(key)) fail(path_ + "." + key + " is required");
  seen_.push_back(key);
  return j_.at(key);
}

double ConfigObject::number(const std::string& key) {
  const Json& v = get(key);
  if (!v.is_number()) fail(path_ + "." + key + " must be a number");
  return v.get<double>();
}

double ConfigObject::number(const std::string& key, double fallback) {
  return has(key) ? number(key) : fallback;
}

std::uint64_t ConfigObject::integer(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  const Json& v = get(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  // 1e5 style literals arrive as floats.
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d < 1.8e19 && d == static_cast<double>(static_cast<std::uint64_t>(d))) {
      return static_cast<std::uint64_t>(d);
    }
  }
  fail(path_ + "." + key + " must be a non-negative integer");
}

bool ConfigObject::boolean(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const Json& v = get(key);
  if (!v.is_boolean()) fail(path_ + "." + key + " must be true or false");
  return v.get<bool>();
}

std::string ConfigObject::string(const std::string& key) {
  const Json& v = get(key);
  if (!v.is_string()) fail(path_ + "." + key + " must be a string");
  return v.get<std::string>();
}

std::string ConfigObject::string(const std::string& key, const std::string& fallback) {
  return has(key) ? string(key) : fallback;
}

std::vector<double> ConfigObject::numbers(const std::string& key) {
  const Json& v = get(key);
  if (!v.is_array()) fail(path_ + "." + key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(path_ + "." + key + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<double> ConfigObject::numbers(const std::string& key, std::vector<double> fallback) {
  return has(key) ? numbers(key) : fallback;
}

ConfigObject ConfigObject::object(const std::string& key) {
  return ConfigObject(get(key), path_ + "." + key);
}

const Json& ConfigObject::raw(const std::string& key) { return get(key); }

void ConfigObject::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it) {
    if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
      fail("unknown key " + path_ + "." + it.key());
    }
  }
}

CLaw parse_c_law(ConfigObject obj) {
  const std::string law = obj.string("law");
  CLaw out = CLaw::constant(0.0);
  if (law == "constant") {
    out = CLaw::constant(obj.number("value"));
  } else if (law == "centered_exponential") {
    out = CLaw::centered_exponential(obj.number("scale"));
  } else if (law == "gaussian") {
    out = CLaw::gaussian(obj.number("sigma"));
  } else if (law == "two_point") {
    out = CLaw::two_point(obj.number("value"));
  } else {
    fail(obj.path() + ".law: unknown C law '" + law + "'");
  }
  obj.finish();
  return out;
}

CollisionModel parse_model(ConfigObject obj) {
  const std::string family = obj.string("family");
  auto c_law = [&] {
    return obj.has("c") ? parse_c_law(obj.object("c")) : CLaw::constant(1.0);
  };
  std::optional<CollisionModel> m;
  if (family == "diag") {
    const std::size_t n = as_size(obj.number("n"), obj.path() + ".n");
    const double a = obj.number("a");
    m = CollisionModel::diag(n, a, c_law());
  } else if (family == "kac") {
    m = CollisionModel::kac(c_law());
  } else if (family == "poisson_plus_one") {
    const double lambda = obj.number("lambda");
    const double lo = obj.number("lo");
    const double hi = obj.number("hi");
    m = CollisionModel::poisson_plus_one(lambda, lo, hi, c_law());
  } else if (family == "wealth") {
    const Json& blocks = obj.raw("blocks");
    if (!blocks.is_array()) fail(obj.path() + ".blocks must be an array");
    std::vector<WealthBlock> parsed;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      ConfigObject b(blocks[i], obj.path() + ".blocks[" + std::to_string(i) + "]");
      WealthBlock wb;
      wb.probability = b.number("probability");
      wb.shifts = b.numbers("shifts");
      const Json& rows = b.raw("matrix");
      if (!rows.is_array()) fail(b.path() + ".matrix must be an array of rows");
      for (const auto& row : rows) {
        if (!row.is_array()) fail(b.path() + ".matrix must be an array of rows");
        std::vector<double> r;
        for (const auto& e : row) {
          if (!e.is_number()) fail(b.path() + ".matrix entries must be numbers");
          r.push_back(e.get<double>());
        }
        wb.matrix.push_back(std::move(r));
      }
      b.finish();
      parsed.push_back(std::move(wb));
    }
    m = CollisionModel::wealth(std::move(parsed));
  } else if (family == "tabulated") {
    const Json& atoms = obj.raw("atoms");
    if (!atoms.is_array()) fail(obj.path() + ".atoms must be an array");
    std::vector<TabulatedAtom> parsed;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      ConfigObject a(atoms[i], obj.path() + ".atoms[" + std::to_string(i) + "]");
      parsed.push_back({a.number("probability"), a.numbers("weights")});
      a.finish();
    }
    m = CollisionModel::tabulated(std::move(parsed), c_law());
  } else {
    fail(obj.path() + ".family: unknown model family '" + family + "'");
  }
  obj.finish();
  require_valid(*m);
  return *m;
}

InitialCondition parse_ic(ConfigObject obj) {
  const std::string family = obj.string("family");
  std::optional<InitialCondition> ic;
  if (family == "point") {
    ic = InitialCondition::point(obj.number("r", 0.0));
  } else if (family == "shifted_mean") {
    ic = InitialCondition::shifted_mean(obj.number("m0"));
  } else if (family == "gaussian") {
    ic = InitialCondition::gaussian(obj.number("sigma0"));
  } else if (family == "cauchy") {
    const double m0 = obj.number("m0", 0.0);
    ic = InitialCondition::cauchy(m0, obj.number("c0"));
  } else if (family == "pareto2") {
    const double gamma = obj.number("gamma");
    const double cp = obj.number("c_plus");
    const double cm = obj.number("c_minus");
    ic = InitialCondition::pareto2(gamma, cp, cm, obj.boolean("centered", gamma > 1.0));
  } else if (family == "two_point") {
    ic = InitialCondition::two_point(obj.number("r"));
  } else {
    fail(obj.path() + ".family: unknown initial condition '" + family + "'");
  }
  obj.finish();
  return *ic;
}

Integrand parse_integrand(ConfigObject obj) {
  const std::string kind = obj.string("kind");
  Integrand g;
  if (kind == "one") {
    g.kind = IntegrandKind::kOne;
  } else if (kind == "exp_gamma") {
    g.kind = IntegrandKind::kExpGamma;
  } else if (kind == "v_exp_gamma") {
    g.kind = IntegrandKind::kVExpGamma;
  } else if (kind == "exp_gamma_abs_p") {
    g.kind = IntegrandKind::kExpGammaAbsP;
  } else {
    fail(obj.path() + ".kind: integrand must be one of one, exp_gamma, v_exp_gamma, exp_gamma_abs_p");
  }
  g.gamma = obj.number("gamma", g.kind == IntegrandKind::kOne ? 0.0 : 1.0);
  g.p = obj.number("p", 1.0);
  obj.finish();
  return g;
}

ScenarioConfig parse_config(const Json& j) {
  ScenarioConfig cfg;
  cfg.source = j;
  ConfigObject root(j, "config");
  cfg.model = parse_model(root.object("model"));
  if (root.has("ic")) cfg.ic = parse_ic(root.object("ic"));
  cfg.seed = root.integer("seed", 1);

  if (root.has("simulate")) {
    auto s = root.object("simulate");
    auto& o = cfg.simulate;
    o.checkpoints = s.numbers("checkpoints", o.checkpoints);
    o.gammas = s.numbers("gammas", o.gammas);
    o.n = s.integer("n", o.n);
    o.max_alive = s.integer("max_alive", o.max_alive);
    o.max_events = s.integer("max_events", o.max_events);
    o.dump = s.boolean("dump", o.dump);
    s.finish();
  }
  if (root.has("solve")) {
    auto s = root.object("solve");
    auto& o = cfg.solve;
    o.t_end = s.number("t_end", o.t_end);
    o.dt = s.number("dt", o.dt);
    o.xi_max = s.number("xi_max", o.xi_max);
    o.n_points = s.integer("n_points", o.n_points);
    o.panel_m = s.integer("panel_m", o.panel_m);
    o.checkpoints = s.numbers("checkpoints", o.checkpoints);
    s.finish();
  }
  if (root.has("verify")) {
    auto s = root.object("verify");
    auto& o = cfg.verify;
    o.t = s.number("t", o.t);
    o.alpha = s.number("alpha", o.alpha);
    o.n_trees = s.integer("n_trees", o.n_trees);
    o.n_paths = s.integer("n_paths", o.n_paths);
    if (s.has("integrands")) {
      const Json& list = s.raw("integrands");
      if (!list.is_array()) fail("config.verify.integrands must be an array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        o.integrands.push_back(parse_integrand(
            ConfigObject(list[i], "config.verify.integrands[" + std::to_string(i) + "]")));
      }
    }
    o.gamma = s.number("gamma", o.gamma);
    o.checkpoints = s.numbers("checkpoints", o.checkpoints);
    o.n = s.integer("n", o.n);
    o.horizon = s.number("horizon", o.horizon);
    s.finish();
  }
  if (root.has("limit")) {
    auto s = root.object("limit");
    auto& o = cfg.limit;
    o.which_case = s.string("case", o.which_case);
    o.t = s.number("t", o.t);
    o.t_grid = s.numbers("t_grid", o.t_grid);
    o.gamma = s.number("gamma", o.gamma);
    o.n = s.integer("n", o.n);
    o.m = s.integer("m", o.m);
    o.xi_limit = s.number("xi_limit", o.xi_limit);
    o.n_points = s.integer("n_points", o.n_points);
    o.tolerance = s.number("tolerance", o.tolerance);
    o.ks_tolerance = s.number("ks_tolerance", o.ks_tolerance);
    s.finish();
  }
  if (root.has("crosscheck")) {
    auto s = root.object("crosscheck");
    auto& o = cfg.crosscheck;
    o.t = s.number("t", o.t);
    o.n = s.integer("n", o.n);
    o.panel_m = s.integer("panel_m", o.panel_m);
    o.dt = s.number("dt", o.dt);
    o.xi_max = s.number("xi_max", o.xi_max);
    o.n_points = s.integer("n_points", o.n_points);
    o.tolerance = s.number("tolerance", o.tolerance);
    s.finish();
  }
  root.finish();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    fail(path + ": " + e.what());
  }
  return parse_config(j);
}

std::uint64_t config_hash(const Json& j) {
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace kinetic
