#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kinetic/random.hpp"

namespace kinetic {

// One draw of the coefficient vector (N, C, A_1, ..., A_N).
struct CollisionSample {
  std::size_t n = 0;
  double c = 0.0;
  std::vector<double> weights;
};

enum class CLawKind {
  kConstant,             // C = value
  kCenteredExponential,  // C = value * (E - 1), E unit exponential
  kGaussian,             // C ~ N(0, value^2)
  kTwoPoint,             // C = +-value with probability 1/2 each
};

// Law of the shift C when it is drawn independently of the weights.
class CLaw {
 public:
  static CLaw constant(double c) { return {CLawKind::kConstant, c}; }
  static CLaw centered_exponential(double scale);
  static CLaw gaussian(double sigma);
  static CLaw two_point(double c);

  CLawKind kind() const { return kind_; }
  double parameter() const { return value_; }

  double sample(RandomStream& rng) const;
  double mean() const;
  double second_moment() const;
  // E|C|^p for p >= 0.
  double abs_moment(double p) const;
  std::string describe() const;

 private:
  CLaw(CLawKind kind, double value) : kind_(kind), value_(value) {}

  CLawKind kind_;
  double value_;
};

enum class Family { kDiag, kKac, kPoissonPlusOne, kWealth, kTabulated };

const char* to_string(Family family);

// Conditional on N = n, an interaction picks row k uniformly among n rows and
// uses C = shifts[k], A_j = matrix[k][j].
struct WealthBlock {
  double probability = 0.0;
  std::vector<double> shifts;
  std::vector<std::vector<double>> matrix;
};

// A weight vector drawn with the given probability; C comes from the C-law.
struct TabulatedAtom {
  double probability = 0.0;
  std::vector<double> weights;
};

// Generative description of the coefficient vector. Immutable after
// construction; sampling takes a caller-owned stream.
class CollisionModel {
 public:
  // N = n, A_k = a, C from c_law.
  static CollisionModel diag(std::size_t n, double a, CLaw c_law);
  // N = 2, (A_1, A_2) = (sin T, cos T), T uniform on (0, pi/2).
  static CollisionModel kac(CLaw c_law);
  // N = 1 + Poisson(lambda), A_k i.i.d. uniform(lo, hi).
  static CollisionModel poisson_plus_one(double lambda, double lo, double hi,
                                         CLaw c_law);
  static CollisionModel wealth(std::vector<WealthBlock> blocks);
  static CollisionModel tabulated(std::vector<TabulatedAtom> atoms, CLaw c_law);

  Family family() const { return family_; }
  // Meaningless for the wealth family, whose shifts are row-bound.
  const CLaw& c_law() const { return c_law_; }

  void sample(RandomStream& rng, CollisionSample& out) const;
  CollisionSample sample(RandomStream& rng) const;

  // Phi(s) = E[sum A_k^s] - 1 when the family has a closed form. Throws
  // kOutOfDomain for s < 0.
  std::optional<double> phi(double s) const;
  // d/ds Phi(s) when available in closed form.
  std::optional<double> phi_derivative(double s) const;

  double mean_offspring() const;
  double c_mean() const;
  double c_second_moment() const;
  double c_abs_moment(double p) const;

  // Largest weight the family can produce (upper bound).
  double max_weight() const;

  std::string describe() const;

  // Parameters, exposed for serialization.
  std::size_t diag_n() const { return diag_n_; }
  double diag_a() const { return diag_a_; }
  double lambda() const { return lambda_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<WealthBlock>& wealth_blocks() const { return blocks_; }
  const std::vector<TabulatedAtom>& atoms() const { return atoms_; }

 private:
  explicit CollisionModel(Family family, CLaw c_law)
      : family_(family), c_law_(c_law) {}

  Family family_;
  CLaw c_law_;
  std::size_t diag_n_ = 0;
  double diag_a_ = 0.0;
  double lambda_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::vector<WealthBlock> blocks_;
  std::vector<double> block_cdf_;
  std::vector<TabulatedAtom> atoms_;
  std::vector<double> atom_cdf_;
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  bool analytic = true;
  std::string detail;
};

struct ValidationReport {
  bool accepted = false;
  double mean_offspring = 0.0;
  std::vector<ValidationCheck> checks;
};

// Confirms E[N] in (1, inf), positive weights and non-degeneracy of the
// weights at 1. Sampled checks use `draws` draws from a stream seeded by
// `seed`.
ValidationReport validate_model(const CollisionModel& model,
                                std::size_t draws = 100000,
                                std::uint64_t seed = 0x5eed);

// Throws kInvalidModel listing the failed checks.
void require_valid(const CollisionModel& model);

}  // namespace kinetic
