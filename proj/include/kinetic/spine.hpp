#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kinetic/branching.hpp"
#include "kinetic/spectral.hpp"
#include "kinetic/stats.hpp"

namespace kinetic {

// One tilted walk up to a horizon. step_positions[k] is S_k, step_weights[k]
// the importance weight after k steps, step_c[k] the shift drawn at step k+1.
struct SpinePath {
  double alpha = 0.0;
  double horizon = 0.0;
  std::vector<double> event_times;
  std::vector<double> step_positions;
  std::vector<double> step_weights;
  std::vector<double> step_c;
  bool killed = false;

  std::size_t steps() const { return event_times.size(); }
};

// Size-biased spine: child k is chosen with probability A_k^alpha / sum A^alpha
// and the weight is multiplied by sum A^alpha * e^{-lambda(alpha)}.
SpinePath spine_walk(const CollisionModel& model, double alpha, double lambda_alpha,
                     double t, RandomStream& rng);

struct ManyToOneResult {
  double lhs = 0.0;
  double se_lhs = 0.0;
  double rhs = 0.0;
  double se_rhs = 0.0;
  bool overlap = false;
  bool rhs_noisy = false;
  std::string warning;
};

struct ManyToOneSetup {
  double alpha = 1.0;
  double t = 1.0;
  std::size_t n_paths = 100000;
  std::size_t n_trees = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double z = kZ99;
};

// Alive-particle formula: g(v, U) summed over particles alive at t, with U
// drawn from `marks`.
ManyToOneResult many_to_one_I(const SpectralProfile& profile,
                              const InitialCondition& marks, const Integrand& g,
                              const ManyToOneSetup& setup);

// Dead-particle formula: g(v, C) summed over particles dead by t.
ManyToOneResult many_to_one_II(const SpectralProfile& profile, const Integrand& g,
                               const ManyToOneSetup& setup);

// Both formulas for several g at once; one tree ensemble and one set of spine
// paths serve every g.
struct ManyToOneBatch {
  std::vector<ManyToOneResult> alive;
  std::vector<ManyToOneResult> dead;
};

ManyToOneBatch many_to_one_batch(const SpectralProfile& profile,
                                 const InitialCondition& marks,
                                 const std::vector<Integrand>& gs,
                                 const ManyToOneSetup& setup);

inline constexpr double kMzConstant = 2.0;

// c_p e^{t Phi(p gamma)} E|U|^p with c_p = 2.
double mz_budget(const SpectralProfile& profile, const InitialCondition& marks,
                 double gamma, double p, double t);

}  // namespace kinetic
