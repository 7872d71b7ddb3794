#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kinetic/branching.hpp"
#include "kinetic/collision.hpp"
#include "kinetic/initial.hpp"

namespace kinetic {

using Json = nlohmann::json;

// Checked view of a JSON object: every key must be read or listed, otherwise
// finish() throws kConfig naming the stray key.
class ConfigObject {
 public:
  ConfigObject(const Json& j, std::string path);

  bool has(const std::string& key) const;
  double number(const std::string& key);
  double number(const std::string& key, double fallback);
  std::uint64_t integer(const std::string& key, std::uint64_t fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key);
  std::string string(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key);
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback);
  ConfigObject object(const std::string& key);
  const Json& raw(const std::string& key);
  void finish() const;
  const std::string& path() const { return path_; }

 private:
  const Json& get(const std::string& key);

  const Json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

CLaw parse_c_law(ConfigObject obj);
CollisionModel parse_model(ConfigObject obj);
InitialCondition parse_ic(ConfigObject obj);
Integrand parse_integrand(ConfigObject obj);

struct SimulateSection {
  std::vector<double> checkpoints{1.0};
  std::vector<double> gammas{1.0};
  std::size_t n = 1000;
  std::size_t max_alive = 1000000;
  std::size_t max_events = 10000000;
  bool dump = false;
};

struct SolveSection {
  double t_end = 1.0;
  double dt = 0.02;
  double xi_max = 20.0;
  std::size_t n_points = 2001;
  std::size_t panel_m = 10000;
  std::vector<double> checkpoints;
};

struct VerifySection {
  double t = 1.0;
  double alpha = 1.0;
  std::size_t n_trees = 10000;
  std::size_t n_paths = 100000;
  std::vector<Integrand> integrands;
  double gamma = 1.0;
  std::vector<double> checkpoints{2.0, 4.0, 6.0, 8.0};
  std::size_t n = 2000;
  double horizon = 10.0;
};

struct LimitSection {
  std::string which_case = "A";
  double t = 8.0;
  std::vector<double> t_grid{4.0, 8.0};
  double gamma = 1.0;
  std::size_t n = 2000;
  std::size_t m = 2000;
  double xi_limit = 5.0;
  std::size_t n_points = 201;
  double tolerance = 0.03;
  double ks_tolerance = 0.03;
};

struct CrosscheckSection {
  double t = 1.0;
  std::size_t n = 100000;
  std::size_t panel_m = 10000;
  double dt = 0.02;
  double xi_max = 20.0;
  std::size_t n_points = 2001;
  double tolerance = 0.02;
};

struct ScenarioConfig {
  Json source;
  CollisionModel model = CollisionModel::diag(2, 0.5, CLaw::constant(1.0));
  InitialCondition ic = InitialCondition::point(0.0);
  std::uint64_t seed = 1;
  SimulateSection simulate;
  SolveSection solve;
  VerifySection verify;
  LimitSection limit;
  CrosscheckSection crosscheck;
};

// Parses and validates a whole scenario. Throws kConfig on schema errors and
// kInvalidModel / kInvalidArgument when the described objects are invalid.
ScenarioConfig parse_config(const Json& j);
ScenarioConfig load_config(const std::string& path);

// FNV-1a over the canonical (sorted-key) dump.
std::uint64_t config_hash(const Json& j);
std::string hex64(std::uint64_t v);

}  // namespace kinetic
