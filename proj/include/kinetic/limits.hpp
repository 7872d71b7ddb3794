#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kinetic/branching.hpp"
#include "kinetic/fourier.hpp"
#include "kinetic/spectral.hpp"

namespace kinetic {

// Empirical CF (1/n) sum e^{i xi x_j} on a symmetric grid. The optional `se`
// receives the per-node envelope sqrt((1 - |phi|^2) / n).
CFGrid empirical_cf(const std::vector<double>& samples, double xi_max,
                    std::size_t n_points, std::vector<double>* se = nullptr);

// (1/m) sum_j f(j, xi) on the positive half of a grid; the negative half is the
// conjugate. f must itself be Hermitian in xi.
CFGrid mixture_cf(std::size_t m, double xi_max, std::size_t n_points,
                  const std::function<cplx(std::size_t, double)>& f);

struct MartingaleLimitSample {
  double gamma = 0.0;
  double horizon = 0.0;
  std::vector<double> values;
  std::vector<char> survived;
  // C_T from the same replicates, for coupled limits.
  std::vector<double> c_values;
  double mean = 0.0;
  double se = 0.0;
  double zero_fraction = 0.0;
  VariancePlateau plateau;
  double xlogx_mean = 0.0;
  double capped_fraction = 0.0;
  std::vector<std::string> warnings;
};

struct LimitRunOptions {
  std::size_t n = 2000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

// M_T(gamma) as a proxy for M_infinity(gamma), with a variance plateau check
// between T-2 and T and an empirical x log x moment.
MartingaleLimitSample sample_m_infinity(const SpectralProfile& profile, double gamma,
                                        double horizon, const LimitRunOptions& opt);

// Smallest root of q = E[q^N].
double extinction_probability(const CollisionModel& model);

enum class Thm2Case { kA, kB, kC };

struct RatioSummary {
  double t = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  std::size_t n = 0;
};

struct Thm2Report {
  Thm2Case which = Thm2Case::kA;
  std::vector<RatioSummary> ratios;
  // Case (c).
  double c_inf_mean = 0.0;
  double c_inf_se = 0.0;
  double c_inf_expected = 0.0;
  double cauchy_gap_median = 0.0;
  double c_final_abs_median = 0.0;
  bool passed = false;
  std::string mode;
};

Thm2Report verify_thm2(const SpectralProfile& profile, Thm2Case which,
                       const std::vector<double>& t_grid, const LimitRunOptions& opt);

struct FixpointReport {
  double ks = 0.0;
  double ks_threshold = 0.0;
  double cf_sup = 0.0;
  double transformed_mean = 0.0;
  double transformed_se = 0.0;
  std::size_t n = 0;
  bool passed = false;
};

// One step of the inhomogeneous smoothing transform applied to a sample by
// resampling with replacement, compared with the sample itself.
FixpointReport fixpoint_residual_c(const CollisionModel& model,
                                   const std::vector<double>& samples,
                                   std::uint64_t seed, double xi_max = 5.0);

// One-step transformed sample (exposed for tests).
std::vector<double> smoothing_transform_sample(const CollisionModel& model,
                                               const std::vector<double>& samples,
                                               std::size_t n_out, std::uint64_t seed);

struct CFComparison {
  double sup_distance = 0.0;
  double tolerance = 0.0;
  double xi_limit = 0.0;
  bool passed = false;
  std::string mode;
  double capped_fraction = 0.0;
  bool bias_flag = false;
};

struct MixtureOptions {
  LimitRunOptions sim;
  std::size_t m = 10000;  // mixture samples
  std::uint64_t mixture_seed = 2;
  double xi_limit = 5.0;
  std::size_t n_points = 201;
  double tolerance = 0.03;
  // Mixture draws from an earlier run with the same oracle, gamma, horizon and
  // m; when set they are used instead of simulating again.
  const MartingaleLimitSample* reuse = nullptr;
};

// Empirical CF of exp(-mu(2) t) W_t against the Gaussian mixture with variance
// M_inf(2) (sigma0^2 + E C^2 / Phi(2)). A point IC at 0 gives the C_t-only case.
CFComparison verify_thm3e_thm4(const SpectralProfile& profile, const InitialCondition& ic,
                               double t, const MixtureOptions& opt);

// Same, sharing one ensemble between a Gaussian(sigma0) IC and the point IC at
// 0 (the trees do not depend on the marks). Returns {gaussian, point}.
std::pair<CFComparison, CFComparison> verify_thm3e_thm4_pair(const SpectralProfile& profile,
                                                             double sigma0, double t,
                                                             const MixtureOptions& opt);

enum class LimitCase { kThm4A, kThm4C, kThm4D, kThm5 };

const char* to_string(LimitCase c);

// Oracle side of a mixture-limit test. `oracle` supplies the limit constants
// (gamma, Phi, E C) and the model used to sample (M_inf, C_inf); the
// simulated side uses `sim_model`, normally the same model.
CFComparison verify_thm4_thm5(LimitCase which, const SpectralProfile& oracle,
                              const CollisionModel& sim_model, const InitialCondition& ic,
                              double gamma, double t, const MixtureOptions& opt);

enum class Thm6Case { kA, kB, kC, kD };

struct Thm6Report {
  Thm6Case which = Thm6Case::kA;
  double ratio_median = 0.0;
  double ratio_q25 = 0.0;
  double ratio_q75 = 0.0;
  double ks = 0.0;
  double ks_tolerance = 0.0;
  double cauchy_gap_median = 0.0;
  double w_final_abs_median = 0.0;
  bool passed = false;
  std::string mode;
};

struct Thm6Options {
  LimitRunOptions sim;
  std::uint64_t reference_seed = 3;
  double ratio_lo = 0.9;
  double ratio_hi = 1.1;
  double ks_tolerance = 0.03;
  double t_early = 0.0;  // for the Cauchy gap in cases (C)/(D); 0 means t - 4
};

Thm6Report verify_thm6(Thm6Case which, const SpectralProfile& oracle,
                       const CollisionModel& sim_model, const InitialCondition& ic,
                       double t, const Thm6Options& opt);

}  // namespace kinetic
