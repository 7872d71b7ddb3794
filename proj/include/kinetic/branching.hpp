#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kinetic/collision.hpp"
#include "kinetic/initial.hpp"
#include "kinetic/random.hpp"

namespace kinetic {

// Whitelisted test functions g(v, m). For alive particles m is the mark R,
// for dead particles m is the shift C.
enum class IntegrandKind { kOne, kExpGamma, kVExpGamma, kExpGammaAbsP };

struct Integrand {
  IntegrandKind kind = IntegrandKind::kOne;
  double gamma = 0.0;
  double p = 1.0;

  double operator()(double v, double m) const;
  std::string describe() const;
};

struct SimulationPlan {
  CollisionModel model;
  InitialCondition ic;
  std::vector<double> checkpoints;
  std::vector<double> gammas;
  std::vector<Integrand> alive_integrands;
  std::vector<Integrand> dead_integrands;
  std::size_t max_alive = 1000000;
  std::size_t max_events = 10000000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CheckpointValues {
  double t = 0.0;
  bool missing = false;
  double w = 0.0;
  double x = 0.0;
  double c = 0.0;
  std::vector<double> z;        // Z_t(gamma) per plan gamma
  std::vector<double> vz;       // sum V e^{gamma V} per plan gamma
  std::vector<double> alive_g;  // per alive integrand
  std::vector<double> dead_g;   // per dead integrand
  std::uint64_t alive = 0;
  std::uint64_t dead = 0;
  double max_position = 0.0;    // -inf when nobody is alive
};

enum class RecordStatus { kCompleted, kCapped };

struct ReplicateRecord {
  RecordStatus status = RecordStatus::kCompleted;
  double capped_at = 0.0;
  std::uint64_t events = 0;
  std::vector<CheckpointValues> checkpoints;
};

// Positions of the particles alive at the last checkpoint, plus C at that time.
struct Frontier {
  std::vector<double> positions;
  double c = 0.0;
};

// One tree started from a single particle at 0. Tree and C draws come from
// the (seed, index, kTree) stream; marks from (seed, index, kMarks).
ReplicateRecord simulate_once(const SimulationPlan& plan, std::uint64_t index,
                              Frontier* frontier = nullptr);

// General form: a forest rooted at `roots` driven by caller-owned streams.
ReplicateRecord simulate_forest(const SimulationPlan& plan,
                                const std::vector<double>& roots,
                                RandomStream& tree_rng, RandomStream& marks_rng,
                                Frontier* frontier = nullptr);

struct Ensemble {
  std::vector<ReplicateRecord> records;
  std::size_t capped = 0;
  double capped_fraction = 0.0;
  // More than 1% of replicates capped.
  bool bias_flag = false;
};

Ensemble simulate_ensemble(const SimulationPlan& plan, std::size_t n_replicates,
                           unsigned threads);

enum class Field { kW, kX, kC, kZ, kVZ, kAliveG, kDeadG, kAlive, kDead, kMaxPosition };

// Values of one functional at checkpoint `cp` over completed replicates, in
// replicate order.
std::vector<double> column(const Ensemble& ens, std::size_t cp, Field field,
                           std::size_t which = 0);

struct SeriesPoint {
  double t = 0.0;
  double mean = 0.0;
  double se = 0.0;
  double variance = 0.0;
  double variance_se = 0.0;
  std::size_t n = 0;
};

// M_t(gamma) = e^{-Phi(gamma) t} Z_t(gamma) summarised per checkpoint.
std::vector<SeriesPoint> martingale_series(const Ensemble& ens,
                                           const SimulationPlan& plan,
                                           std::size_t gamma_index, double phi_gamma);

struct VariancePlateau {
  double t1 = 0.0;
  double t2 = 0.0;
  double var1 = 0.0;
  double var2 = 0.0;
  double combined_se = 0.0;
  bool plateau = false;
};

VariancePlateau variance_plateau(const std::vector<SeriesPoint>& series,
                                 std::size_t cp1, std::size_t cp2, double z = 3.0);

struct DriftQuantiles {
  double t = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  std::size_t extinct = 0;
};

// Quantiles of gamma * max V - Phi(gamma) t per checkpoint; extinct replicates
// count as -inf.
std::vector<DriftQuantiles> max_position_drift(const Ensemble& ens,
                                               const SimulationPlan& plan,
                                               double gamma, double phi_gamma);

// One row per checkpoint and statistic: t,statistic,n,mean,se,variance,median.
void write_summary_csv(std::ostream& out, const Ensemble& ens, const SimulationPlan& plan);

// Little-endian columnar dump; see README for the layout.
void write_binary_dump(std::ostream& out, const Ensemble& ens, const SimulationPlan& plan);

// Structural assertion: throws kInvariantViolation when `ok` is false. Both
// outcomes are counted process-wide.
void invariant(bool ok, const char* what);
std::uint64_t invariant_checks_passed();
std::uint64_t invariant_violations();
void count_invariant_check();

}  // namespace kinetic
