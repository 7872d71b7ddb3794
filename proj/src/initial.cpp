#include "kinetic/initial.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kinetic/error.hpp"

namespace kinetic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

}  // namespace

const char* to_string(HLabel label) {
  switch (label) {
    case HLabel::kH1a: return "H1(a)";
    case HLabel::kH1b: return "H1(b)";
    case HLabel::kH2: return "H2";
    case HLabel::kHgamma: return "Hgamma";
  }
  return "?";
}

const char* to_string(IcFamily family) {
  switch (family) {
    case IcFamily::kPoint: return "point";
    case IcFamily::kShiftedMean: return "shifted_mean";
    case IcFamily::kGaussian: return "gaussian";
    case IcFamily::kCauchy: return "cauchy";
    case IcFamily::kPareto2: return "pareto2";
    case IcFamily::kTwoPoint: return "two_point";
  }
  return "?";
}

LimitCF::LimitCF(HConstants h) : h_(h) {
  if (!(h_.gamma > 0.0 && h_.gamma <= 2.0)) {
    throw Error(ErrorCode::kOutOfDomain, "limit CF needs gamma in (0, 2]");
  }
  switch (h_.label) {
    case HLabel::kH1a:
    case HLabel::kH1b:
      if (h_.gamma != 1.0) throw Error(ErrorCode::kInvalidArgument, "H1 cases need gamma = 1");
      break;
    case HLabel::kH2:
      if (h_.gamma != 2.0) throw Error(ErrorCode::kInvalidArgument, "H2 needs gamma = 2");
      break;
    case HLabel::kHgamma: {
      if (h_.gamma == 1.0 || h_.gamma == 2.0) {
        throw Error(ErrorCode::kInvalidArgument, "Hgamma needs gamma in (0,1) or (1,2)");
      }
      const double c = h_.c_plus + h_.c_minus;
      if (!(c > 0.0)) throw Error(ErrorCode::kInvalidArgument, "Hgamma needs c+ + c- > 0");
      k0_ = c * kPi / (2.0 * std::tgamma(h_.gamma) * std::sin(kPi * h_.gamma / 2.0));
      b0_ = (h_.c_plus - h_.c_minus) / c;
      break;
    }
  }
}

cplx LimitCF::operator()(double xi) const {
  switch (h_.label) {
    case HLabel::kH1a:
      return std::polar(1.0, h_.m0 * xi);
    case HLabel::kH1b:
      return std::polar(std::exp(-kPi * h_.c0 * std::abs(xi)), h_.m0 * xi);
    case HLabel::kH2:
      return {std::exp(-h_.sigma0 * h_.sigma0 * xi * xi / 2.0), 0.0};
    case HLabel::kHgamma: {
      if (xi == 0.0) return {1.0, 0.0};
      const double scale = k0_ * std::pow(std::abs(xi), h_.gamma);
      const double sgn = xi > 0.0 ? 1.0 : -1.0;
      const double phase = scale * b0_ * std::tan(kPi * h_.gamma / 2.0) * sgn;
      return std::polar(std::exp(-scale), phase);
    }
  }
  return {1.0, 0.0};
}

InitialCondition InitialCondition::point(double r) {
  return {IcFamily::kPoint, r, 0.0, 0.0, false};
}

InitialCondition InitialCondition::shifted_mean(double m0) {
  return {IcFamily::kShiftedMean, m0, 0.0, 0.0, false};
}

InitialCondition InitialCondition::gaussian(double sigma0) {
  if (!(sigma0 >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "gaussian sigma0 must be >= 0");
  return {IcFamily::kGaussian, sigma0, 0.0, 0.0, false};
}

InitialCondition InitialCondition::cauchy(double m0, double c0) {
  if (!(c0 > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cauchy c0 must be > 0");
  return {IcFamily::kCauchy, m0, c0, 0.0, false};
}

InitialCondition InitialCondition::pareto2(double gamma, double c_plus,
                                           double c_minus, bool centered) {
  if (!(gamma > 0.0 && gamma < 2.0) || gamma == 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "pareto2 needs gamma in (0,1) or (1,2)");
  }
  if (!(c_plus >= 0.0 && c_minus >= 0.0 && c_plus + c_minus > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "pareto2 needs c+, c- >= 0 with c+ + c- > 0");
  }
  if (gamma > 1.0 && !centered) {
    throw Error(ErrorCode::kInvalidArgument, "pareto2 with gamma > 1 must be centered");
  }
  if (gamma < 1.0 && centered) {
    throw Error(ErrorCode::kInvalidArgument, "pareto2 with gamma < 1 has no mean to remove");
  }
  return {IcFamily::kPareto2, gamma, c_plus, c_minus, centered};
}

InitialCondition InitialCondition::two_point(double r) {
  if (!(r >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "two_point r must be >= 0");
  return {IcFamily::kTwoPoint, r, 0.0, 0.0, false};
}

double InitialCondition::pareto_shift() const {
  if (!centered_) return 0.0;
  const double c = p2_ + p3_;
  const double magnitude_mean = std::pow(c, 1.0 / p1_) * p1_ / (p1_ - 1.0);
  return (p2_ - p3_) / c * magnitude_mean;
}

double InitialCondition::sample(RandomStream& rng) const {
  switch (family_) {
    case IcFamily::kPoint: return p1_;
    case IcFamily::kShiftedMean: return p1_ + rng.exponential() - 1.0;
    case IcFamily::kGaussian: return p1_ * rng.normal();
    case IcFamily::kCauchy: return p1_ + kPi * p2_ * std::tan(kPi * (rng.uniform() - 0.5));
    case IcFamily::kPareto2: {
      const double c = p2_ + p3_;
      const double magnitude = std::pow(c / rng.uniform(), 1.0 / p1_);
      const double sign = rng.uniform() * c < p2_ ? 1.0 : -1.0;
      return sign * magnitude - pareto_shift();
    }
    case IcFamily::kTwoPoint: return rng.uniform() < 0.5 ? -p1_ : p1_;
  }
  return 0.0;
}

cplx InitialCondition::cf(double xi) const {
  switch (family_) {
    case IcFamily::kPoint: return std::polar(1.0, xi * p1_);
    case IcFamily::kShiftedMean: return std::polar(1.0, xi * (p1_ - 1.0)) / cplx(1.0, -xi);
    case IcFamily::kGaussian: return {std::exp(-p1_ * p1_ * xi * xi / 2.0), 0.0};
    case IcFamily::kCauchy: return std::polar(std::exp(-kPi * p2_ * std::abs(xi)), p1_ * xi);
    case IcFamily::kPareto2:
      throw Error(ErrorCode::kNoClosedForm, "pareto2 has no closed-form CF; use an empirical CF");
    case IcFamily::kTwoPoint: return {std::cos(p1_ * xi), 0.0};
  }
  return {1.0, 0.0};
}

HConstants InitialCondition::h_constants() const {
  HConstants h;
  switch (family_) {
    case IcFamily::kPoint:
      if (p1_ == 0.0) {
        h.label = HLabel::kH2;
        h.gamma = 2.0;
      } else {
        h.label = HLabel::kH1a;
        h.gamma = 1.0;
        h.m0 = p1_;
      }
      break;
    case IcFamily::kShiftedMean:
      h.label = HLabel::kH1a;
      h.gamma = 1.0;
      h.m0 = p1_;
      break;
    case IcFamily::kGaussian:
      h.label = HLabel::kH2;
      h.sigma0 = p1_;
      break;
    case IcFamily::kCauchy:
      h.label = HLabel::kH1b;
      h.gamma = 1.0;
      h.m0 = p1_;
      h.c0 = p2_;
      break;
    case IcFamily::kPareto2:
      h.label = HLabel::kHgamma;
      h.gamma = p1_;
      h.c_plus = p2_;
      h.c_minus = p3_;
      break;
    case IcFamily::kTwoPoint:
      h.label = HLabel::kH2;
      h.sigma0 = p1_;
      break;
  }
  return h;
}

std::optional<double> InitialCondition::abs_moment(double p) const {
  if (!(p >= 0.0)) throw Error(ErrorCode::kOutOfDomain, "abs_moment needs p >= 0");
  if (p == 0.0) return 1.0;
  switch (family_) {
    case IcFamily::kPoint:
    case IcFamily::kTwoPoint:
      return std::pow(std::abs(p1_), p);
    case IcFamily::kGaussian:
      return std::pow(p1_, p) * std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) /
             std::sqrt(kPi);
    case IcFamily::kShiftedMean:
      return std::nullopt;
    case IcFamily::kCauchy:
      if (p >= 1.0) return kInf;
      if (p1_ == 0.0) return std::pow(kPi * p2_, p) / std::cos(kPi * p / 2.0);
      return std::nullopt;
    case IcFamily::kPareto2:
      if (p >= p1_) return kInf;
      if (!centered_) {
        const double c = p2_ + p3_;
        return std::pow(c, p / p1_) / (1.0 - p / p1_);
      }
      return std::nullopt;
  }
  return std::nullopt;
}

bool InitialCondition::finite_abs_moment(double p) const {
  const auto m = abs_moment(p);
  return !m || std::isfinite(*m);
}

std::optional<double> InitialCondition::mean() const {
  switch (family_) {
    case IcFamily::kPoint:
    case IcFamily::kShiftedMean:
      return p1_;
    case IcFamily::kGaussian:
    case IcFamily::kTwoPoint:
      return 0.0;
    case IcFamily::kCauchy:
      return std::nullopt;
    case IcFamily::kPareto2:
      if (p1_ > 1.0) return 0.0;
      return std::nullopt;
  }
  return std::nullopt;
}

std::string InitialCondition::describe() const {
  std::ostringstream os;
  os << to_string(family_) << "(";
  switch (family_) {
    case IcFamily::kPoint: os << "r=" << p1_; break;
    case IcFamily::kShiftedMean: os << "m0=" << p1_; break;
    case IcFamily::kGaussian: os << "sigma0=" << p1_; break;
    case IcFamily::kCauchy: os << "m0=" << p1_ << ", c0=" << p2_; break;
    case IcFamily::kPareto2:
      os << "gamma=" << p1_ << ", c+=" << p2_ << ", c-=" << p3_
         << (centered_ ? ", centered" : "");
      break;
    case IcFamily::kTwoPoint: os << "r=" << p1_; break;
  }
  os << ")";
  return os.str();
}

}  // namespace kinetic
