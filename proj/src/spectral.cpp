#include "kinetic/spectral.hpp"

#include <cmath>
#include <limits>

#include "kinetic/error.hpp"
#include "kinetic/stats.hpp"

namespace kinetic {

PhiEstimate phi_estimate(const CollisionModel& model, double s,
                         std::size_t n_samples, RandomStream& rng) {
  if (!(s >= 0.0)) throw Error(ErrorCode::kOutOfDomain, "phi_estimate needs s >= 0");
  if (n_samples < 100) {
    throw Error(ErrorCode::kInvalidArgument, "phi_estimate needs at least 100 draws");
  }
  RunningStats stats;
  CollisionSample draw;
  for (std::size_t i = 0; i < n_samples; ++i) {
    model.sample(rng, draw);
    double acc = 0.0;
    for (double a : draw.weights) acc += std::pow(a, s);
    stats.add(acc);
  }
  PhiEstimate out;
  out.value = stats.mean() - 1.0;
  out.standard_error = stats.standard_error();
  out.kurtosis = stats.kurtosis();
  out.heavy_tail = out.kurtosis > kHeavyTailKurtosis;
  out.n = n_samples;
  return out;
}

SpectralProfile SpectralProfile::closed_form(const CollisionModel& model) {
  if (!model.phi(1.0)) {
    throw Error(ErrorCode::kNoClosedForm, model.describe() + " has no closed-form Phi");
  }
  SpectralProfile p;
  p.model_ = std::make_shared<const CollisionModel>(model);
  p.provenance_ = Provenance::kClosedForm;
  return p;
}

SpectralProfile SpectralProfile::estimated(const CollisionModel& model,
                                           std::size_t n_samples,
                                           std::uint64_t seed) {
  if (n_samples < 100) {
    throw Error(ErrorCode::kInvalidArgument, "estimated profile needs at least 100 draws");
  }
  SpectralProfile p;
  p.model_ = std::make_shared<const CollisionModel>(model);
  p.provenance_ = Provenance::kEstimated;
  RandomStream rng(seed, 0, StreamTag::kEstimate);
  CollisionSample draw;
  p.panel_.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    model.sample(rng, draw);
    p.panel_.push_back(draw.weights);
  }
  return p;
}

SpectralProfile SpectralProfile::from_model(const CollisionModel& model,
                                            std::uint64_t seed) {
  if (model.phi(1.0)) return closed_form(model);
  return estimated(model, 100000, seed);
}

double SpectralProfile::phi(double s) const {
  if (is_closed_form()) return *model_->phi(s);
  if (!(s >= 0.0)) throw Error(ErrorCode::kOutOfDomain, "Phi needs s >= 0");
  KahanSum acc;
  for (const auto& w : panel_) {
    for (double a : w) acc.add(std::pow(a, s));
  }
  return acc.value() / static_cast<double>(panel_.size()) - 1.0;
}

double SpectralProfile::phi_se(double s) const {
  if (is_closed_form()) return 0.0;
  RunningStats stats;
  for (const auto& w : panel_) {
    double acc = 0.0;
    for (double a : w) acc += std::pow(a, s);
    stats.add(acc);
  }
  return stats.standard_error();
}

double SpectralProfile::finite_difference(double s, double h) const {
  return (phi(s + h) - phi(s - h)) / (2.0 * h);
}

double SpectralProfile::phi_prime(double s) const {
  if (is_closed_form()) {
    if (auto d = model_->phi_derivative(s)) return *d;
  }
  const double h = 1e-5 * std::max(1.0, s);
  const double d1 = finite_difference(s, h);
  const double d2 = finite_difference(s, h / 2.0);
  if ((d1 > 0.0) != (d2 > 0.0) && d1 != 0.0 && d2 != 0.0) {
    throw Error(ErrorCode::kIllConditioned,
                "finite-difference Phi' changes sign between h and h/2 at s = " +
                    std::to_string(s));
  }
  // Richardson combination of the two central differences.
  return (4.0 * d2 - d1) / 3.0;
}

double SpectralProfile::lambda(double alpha) const {
  const double v = phi(alpha) + 1.0;
  if (!(v > 0.0)) {
    throw Error(ErrorCode::kOutOfDomain, "lambda needs Phi(alpha) > -1");
  }
  return std::log(v);
}

double SpectralProfile::mu(double s) const {
  if (!(s > 0.0)) throw Error(ErrorCode::kOutOfDomain, "mu needs s > 0");
  return phi(s) / s;
}

double SpectralProfile::mu_prime(double s) const {
  if (!(s > 0.0)) throw Error(ErrorCode::kOutOfDomain, "mu' needs s > 0");
  return (s * phi_prime(s) - phi(s)) / (s * s);
}

std::optional<double> SpectralProfile::phi_zero(double lo, double hi) const {
  if (!(lo < hi)) throw Error(ErrorCode::kInvalidArgument, "empty bracket");
  double flo = phi(lo);
  const double fhi = phi(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) return std::nullopt;
  const double tol = is_closed_form() ? 1e-10 : 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = phi(mid);
    const double accept = is_closed_form() ? tol : phi_se(mid);
    if (std::abs(fm) < accept && hi - lo < 1e-9) return mid;
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

std::optional<double> SpectralProfile::gamma_star(double s_max) const {
  const double step = 0.05;
  double prev_s = step;
  double prev = mu_prime(prev_s);
  for (double s = 2 * step; s <= s_max + 1e-12; s += step) {
    const double cur = mu_prime(s);
    if (prev < 0.0 && cur >= 0.0) {
      double lo = prev_s;
      double hi = s;
      for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mu_prime(mid) < 0.0) lo = mid; else hi = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = cur;
    prev_s = s;
  }
  return std::nullopt;
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::kA: return "A";
    case Regime::kB: return "B";
    case Regime::kC: return "C";
    case Regime::kD: return "D";
    case Regime::kE: return "E";
    case Regime::kNone: return "none";
  }
  return "none";
}

RegimeReport classify_regime(const SpectralProfile& profile,
                             const std::vector<double>& p_probe) {
  const CollisionModel& model = profile.model();
  RegimeReport r;
  r.provenance = profile.provenance();
  r.phi1 = profile.phi(1.0);
  r.phi1_se = profile.phi_se(1.0);
  r.mu_prime1 = profile.mu_prime(1.0);
  r.phi2 = profile.phi(2.0);
  r.mu_prime2 = profile.mu_prime(2.0);
  r.c_mean = model.c_mean();
  r.c_second_moment = model.c_second_moment();
  for (double p : p_probe) {
    r.phi_at_p[p] = profile.phi(p);
    r.c_abs_moment_at_p[p] = model.c_abs_moment(p);
  }
  r.gamma_star = profile.gamma_star();
  r.zero_tolerance = profile.is_closed_form() ? 1e-10 : 3.0 * r.phi1_se;

  const bool mean_zero = std::abs(r.c_mean) < 1e-12;
  const bool c_moment_finite = std::isfinite(model.c_abs_moment(2.0));

  if (!mean_zero) {
    if (!c_moment_finite) {
      r.notes.push_back("E|C|^p is infinite for every probed p > 1");
      return r;
    }
    if (!(r.mu_prime1 < 0.0)) {
      r.notes.push_back("mu'(1) >= 0, so the non-zero-mean conditions fail");
      return r;
    }
    if (std::abs(r.phi1) < r.zero_tolerance) {
      if (!profile.is_closed_form()) {
        throw Error(ErrorCode::kAmbiguousRegime,
                    "|Phi(1)| = " + std::to_string(std::abs(r.phi1)) +
                        " is within 3 SE of zero; cannot separate A, B and C");
      }
      r.label = Regime::kB;
    } else {
      r.label = r.phi1 > 0.0 ? Regime::kA : Regime::kC;
    }
    return r;
  }

  bool d_holds = false;
  if (r.mu_prime1 < 0.0) {
    for (double p : p_probe) {
      if (r.phi_at_p[p] < 0.0 && std::isfinite(r.c_abs_moment_at_p[p])) {
        d_holds = true;
        r.notes.push_back("Phi(" + std::to_string(p) + ") < 0 witnesses D");
        break;
      }
    }
  }
  const bool e_holds = r.phi2 > 0.0 && r.mu_prime2 < 0.0 && r.c_second_moment > 0.0 &&
                       std::isfinite(r.c_second_moment);
  if (d_holds && e_holds) {
    throw Error(ErrorCode::kInvariantViolation, "conditions D and E cannot hold together");
  }
  if (d_holds) r.label = Regime::kD;
  if (e_holds) r.label = Regime::kE;
  return r;
}

}  // namespace kinetic
