#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kinetic/collision.hpp"
#include "kinetic/random.hpp"

namespace kinetic {

struct PhiEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  double kurtosis = 0.0;
  bool heavy_tail = false;
  std::size_t n = 0;
};

// Sample mean of sum_k A_k^s - 1 over n_samples fresh draws.
PhiEstimate phi_estimate(const CollisionModel& model, double s,
                         std::size_t n_samples, RandomStream& rng);

inline constexpr double kHeavyTailKurtosis = 50.0;

enum class Provenance { kClosedForm, kEstimated };

// Phi and the quantities derived from it. An estimated profile freezes one
// panel of weight vectors, so Phi(s) is smooth in s and comparisons between
// different s share random numbers.
class SpectralProfile {
 public:
  static SpectralProfile closed_form(const CollisionModel& model);
  static SpectralProfile estimated(const CollisionModel& model,
                                   std::size_t n_samples, std::uint64_t seed);
  // Closed form when the family has one, otherwise a 10^5 draw panel.
  static SpectralProfile from_model(const CollisionModel& model,
                                    std::uint64_t seed = 0x5eed);

  Provenance provenance() const { return provenance_; }
  bool is_closed_form() const { return provenance_ == Provenance::kClosedForm; }
  std::size_t n_samples() const { return panel_.size(); }
  const CollisionModel& model() const { return *model_; }

  double phi(double s) const;
  // Zero for closed forms.
  double phi_se(double s) const;
  double phi_prime(double s) const;
  double lambda(double alpha) const;
  double mu(double s) const;
  // (s Phi'(s) - Phi(s)) / s^2. Uses the attached derivative when there is
  // one; otherwise central differences at h and h/2 which must agree in sign.
  double mu_prime(double s) const;

  // Bisection on [lo, hi]; nullopt when Phi has no sign change there.
  std::optional<double> phi_zero(double lo, double hi) const;
  // Minimiser of mu on (0, s_max], located by the sign change of mu'.
  std::optional<double> gamma_star(double s_max = 20.0) const;

 private:
  SpectralProfile() = default;
  double finite_difference(double s, double h) const;

  std::shared_ptr<const CollisionModel> model_;
  Provenance provenance_ = Provenance::kClosedForm;
  std::vector<std::vector<double>> panel_;
};

enum class Regime { kA, kB, kC, kD, kE, kNone };

const char* to_string(Regime regime);

struct RegimeReport {
  Regime label = Regime::kNone;
  Provenance provenance = Provenance::kClosedForm;
  double phi1 = 0.0;
  double phi1_se = 0.0;
  double mu_prime1 = 0.0;
  double phi2 = 0.0;
  double mu_prime2 = 0.0;
  std::map<double, double> phi_at_p;
  std::map<double, double> c_abs_moment_at_p;
  double c_mean = 0.0;
  double c_second_moment = 0.0;
  double zero_tolerance = 0.0;
  std::optional<double> gamma_star;
  std::vector<std::string> notes;
};

inline const std::vector<double> kDefaultProbe = {1.1, 1.25, 1.5, 2.0};

// Throws kAmbiguousRegime when Phi is estimated and |Phi(1)| < 3 SE.
RegimeReport classify_regime(const SpectralProfile& profile,
                             const std::vector<double>& p_probe = kDefaultProbe);

}  // namespace kinetic
