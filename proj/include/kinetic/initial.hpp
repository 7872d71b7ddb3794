#pragma once

#include <complex>
#include <optional>
#include <string>

#include "kinetic/random.hpp"

namespace kinetic {

using cplx = std::complex<double>;

enum class HLabel { kH1a, kH1b, kH2, kHgamma };

const char* to_string(HLabel label);

// Which (H_gamma) case an initial law certifies, with its constants. Only the
// fields relevant to the label are meaningful.
struct HConstants {
  HLabel label = HLabel::kH2;
  double gamma = 2.0;
  double m0 = 0.0;
  double c0 = 0.0;
  double sigma0 = 0.0;
  double c_plus = 0.0;
  double c_minus = 0.0;
};

// The limit characteristic function g_gamma attached to an (H_gamma) case.
class LimitCF {
 public:
  explicit LimitCF(HConstants h);

  cplx operator()(double xi) const;
  double gamma() const { return h_.gamma; }
  double k0() const { return k0_; }
  double b0() const { return b0_; }
  const HConstants& constants() const { return h_; }

 private:
  HConstants h_;
  double k0_ = 0.0;
  double b0_ = 0.0;
};

enum class IcFamily { kPoint, kShiftedMean, kGaussian, kCauchy, kPareto2, kTwoPoint };

const char* to_string(IcFamily family);

class InitialCondition {
 public:
  static InitialCondition point(double r);
  // m0 + (E - 1) with E unit exponential.
  static InitialCondition shifted_mean(double m0);
  static InitialCondition gaussian(double sigma0);
  // Location m0, scale pi * c0.
  static InitialCondition cauchy(double m0, double c0);
  // Two-sided Pareto tails P[R > x] ~ c_plus x^-gamma, P[R < -x] ~ c_minus x^-gamma.
  // gamma in (0,1) or (1,2); centering is mandatory for gamma > 1.
  static InitialCondition pareto2(double gamma, double c_plus, double c_minus,
                                  bool centered);
  // +-r with probability 1/2 each.
  static InitialCondition two_point(double r);

  IcFamily family() const { return family_; }
  double sample(RandomStream& rng) const;
  bool has_closed_cf() const { return family_ != IcFamily::kPareto2; }
  // Throws kNoClosedForm for pareto2.
  cplx cf(double xi) const;
  HConstants h_constants() const;
  LimitCF limit_cf() const { return LimitCF(h_constants()); }

  // E|R|^p: +inf when infinite, nullopt when finite but not known in closed form.
  std::optional<double> abs_moment(double p) const;
  bool finite_abs_moment(double p) const;
  // E[R] when it exists.
  std::optional<double> mean() const;

  std::string describe() const;

  double p1() const { return p1_; }
  double p2() const { return p2_; }
  double p3() const { return p3_; }
  bool centered() const { return centered_; }

 private:
  InitialCondition(IcFamily family, double p1, double p2, double p3, bool centered)
      : family_(family), p1_(p1), p2_(p2), p3_(p3), centered_(centered) {}
  double pareto_shift() const;

  IcFamily family_;
  double p1_;
  double p2_;
  double p3_;
  bool centered_;
};

}  // namespace kinetic
