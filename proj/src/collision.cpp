#include "kinetic/collision.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kinetic/error.hpp"
#include "kinetic/stats.hpp"

namespace kinetic {

namespace {

constexpr double kProbabilityTolerance = 1e-9;

// \int_0^1 y^p e^y dy as the series sum_k 1 / (k! (p + k + 1)).
double integral_power_exp(double p) {
  double term = 1.0;
  double sum = 0.0;
  for (int k = 0; k < 60; ++k) {
    if (k > 0) term /= k;
    sum += term / (p + k + 1.0);
    if (term < 1e-18) break;
  }
  return sum;
}

std::vector<double> cumulative(const std::vector<double>& probabilities) {
  std::vector<double> cdf;
  cdf.reserve(probabilities.size());
  double acc = 0.0;
  for (double p : probabilities) {
    acc += p;
    cdf.push_back(acc);
  }
  return cdf;
}

std::size_t pick(const std::vector<double>& cdf, double u) {
  const double scaled = u * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), scaled);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()),
                               cdf.size() - 1);
}

void check_domain(double s) {
  if (!(s >= 0.0)) {
    throw Error(ErrorCode::kOutOfDomain,
                "Phi is evaluated on s >= 0 only (got " + std::to_string(s) + ")");
  }
}

double sum_powers(const std::vector<double>& w, double s) {
  double acc = 0.0;
  for (double a : w) acc += std::pow(a, s);
  return acc;
}

double sum_powers_log(const std::vector<double>& w, double s) {
  double acc = 0.0;
  for (double a : w) acc += std::pow(a, s) * std::log(a);
  return acc;
}

}  // namespace

const char* to_string(Family family) {
  switch (family) {
    case Family::kDiag: return "diag";
    case Family::kKac: return "kac";
    case Family::kPoissonPlusOne: return "poisson_plus_one";
    case Family::kWealth: return "wealth";
    case Family::kTabulated: return "tabulated";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// CLaw

CLaw CLaw::centered_exponential(double scale) {
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "centered exponential scale must be > 0");
  }
  return {CLawKind::kCenteredExponential, scale};
}

CLaw CLaw::gaussian(double sigma) {
  if (!(sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gaussian sigma must be >= 0");
  }
  return {CLawKind::kGaussian, sigma};
}

CLaw CLaw::two_point(double c) {
  if (!(c >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "two-point half-gap must be >= 0");
  }
  return {CLawKind::kTwoPoint, c};
}

double CLaw::sample(RandomStream& rng) const {
  switch (kind_) {
    case CLawKind::kConstant: return value_;
    case CLawKind::kCenteredExponential: return value_ * (rng.exponential() - 1.0);
    case CLawKind::kGaussian: return value_ * rng.normal();
    case CLawKind::kTwoPoint: return rng.uniform() < 0.5 ? -value_ : value_;
  }
  return 0.0;
}

double CLaw::mean() const {
  return kind_ == CLawKind::kConstant ? value_ : 0.0;
}

double CLaw::second_moment() const { return abs_moment(2.0); }

double CLaw::abs_moment(double p) const {
  if (p < 0.0) throw Error(ErrorCode::kOutOfDomain, "abs_moment needs p >= 0");
  if (p == 0.0) return 1.0;
  switch (kind_) {
    case CLawKind::kConstant:
    case CLawKind::kTwoPoint:
      return std::pow(std::abs(value_), p);
    case CLawKind::kGaussian:
      return std::pow(value_, p) * std::pow(2.0, p / 2.0) *
             std::tgamma((p + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
    case CLawKind::kCenteredExponential: {
      // E|E-1|^p = e^{-1} (\int_0^1 y^p e^y dy + Gamma(p+1)).
      const double m = std::exp(-1.0) * (integral_power_exp(p) + std::tgamma(p + 1.0));
      return std::pow(value_, p) * m;
    }
  }
  return 0.0;
}

std::string CLaw::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case CLawKind::kConstant: os << "constant(" << value_ << ")"; break;
    case CLawKind::kCenteredExponential: os << "centered_exponential(" << value_ << ")"; break;
    case CLawKind::kGaussian: os << "gaussian(" << value_ << ")"; break;
    case CLawKind::kTwoPoint: os << "two_point(" << value_ << ")"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// CollisionModel

CollisionModel CollisionModel::diag(std::size_t n, double a, CLaw c_law) {
  CollisionModel m(Family::kDiag, c_law);
  m.diag_n_ = n;
  m.diag_a_ = a;
  return m;
}

CollisionModel CollisionModel::kac(CLaw c_law) {
  return CollisionModel(Family::kKac, c_law);
}

CollisionModel CollisionModel::poisson_plus_one(double lambda, double lo,
                                                double hi, CLaw c_law) {
  if (!(lambda >= 0.0) || !(hi >= lo)) {
    throw Error(ErrorCode::kInvalidArgument,
                "poisson_plus_one needs lambda >= 0 and lo <= hi");
  }
  CollisionModel m(Family::kPoissonPlusOne, c_law);
  m.lambda_ = lambda;
  m.lo_ = lo;
  m.hi_ = hi;
  return m;
}

CollisionModel CollisionModel::wealth(std::vector<WealthBlock> blocks) {
  if (blocks.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "wealth model needs at least one block");
  }
  std::vector<double> probs;
  for (const auto& b : blocks) {
    if (b.matrix.size() != b.shifts.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "wealth block: one shift per row required");
    }
    for (const auto& row : b.matrix) {
      if (row.size() != b.matrix.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "wealth block: rows must have n entries for N = n");
      }
    }
    probs.push_back(b.probability);
  }
  CollisionModel m(Family::kWealth, CLaw::constant(0.0));
  m.blocks_ = std::move(blocks);
  m.block_cdf_ = cumulative(probs);
  return m;
}

CollisionModel CollisionModel::tabulated(std::vector<TabulatedAtom> atoms,
                                         CLaw c_law) {
  if (atoms.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "tabulated model needs at least one atom");
  }
  std::vector<double> probs;
  for (const auto& a : atoms) probs.push_back(a.probability);
  CollisionModel m(Family::kTabulated, c_law);
  m.atoms_ = std::move(atoms);
  m.atom_cdf_ = cumulative(probs);
  return m;
}

void CollisionModel::sample(RandomStream& rng, CollisionSample& out) const {
  switch (family_) {
    case Family::kDiag:
      out.n = diag_n_;
      out.weights.assign(diag_n_, diag_a_);
      out.c = c_law_.sample(rng);
      return;
    case Family::kKac: {
      const double theta = 0.5 * std::numbers::pi * rng.uniform();
      out.n = 2;
      out.weights.resize(2);
      out.weights[0] = std::sin(theta);
      out.weights[1] = std::cos(theta);
      out.c = c_law_.sample(rng);
      return;
    }
    case Family::kPoissonPlusOne: {
      out.n = 1 + static_cast<std::size_t>(rng.poisson(lambda_));
      out.weights.resize(out.n);
      for (auto& w : out.weights) w = lo_ == hi_ ? lo_ : rng.uniform(lo_, hi_);
      out.c = c_law_.sample(rng);
      return;
    }
    case Family::kWealth: {
      const auto& block = blocks_[pick(block_cdf_, rng.uniform())];
      out.n = block.matrix.size();
      if (out.n == 0) {
        out.weights.clear();
        out.c = 0.0;
        return;
      }
      const auto row = static_cast<std::size_t>(rng.below(out.n));
      out.weights = block.matrix[row];
      out.c = block.shifts[row];
      return;
    }
    case Family::kTabulated: {
      const auto& atom = atoms_[pick(atom_cdf_, rng.uniform())];
      out.n = atom.weights.size();
      out.weights = atom.weights;
      out.c = c_law_.sample(rng);
      return;
    }
  }
}

CollisionSample CollisionModel::sample(RandomStream& rng) const {
  CollisionSample out;
  sample(rng, out);
  return out;
}

std::optional<double> CollisionModel::phi(double s) const {
  check_domain(s);
  switch (family_) {
    case Family::kDiag:
      return static_cast<double>(diag_n_) * std::pow(diag_a_, s) - 1.0;
    case Family::kKac:
      // E[sin^s + cos^s] over a uniform quarter turn.
      return 2.0 / std::sqrt(std::numbers::pi) *
                 std::exp(std::lgamma((s + 1.0) / 2.0) - std::lgamma(s / 2.0 + 1.0)) -
             1.0;
    case Family::kPoissonPlusOne: {
      double moment = 0.0;
      if (hi_ == lo_) {
        moment = std::pow(lo_, s);
      } else {
        moment = (std::pow(hi_, s + 1.0) - std::pow(lo_, s + 1.0)) /
                 ((s + 1.0) * (hi_ - lo_));
      }
      return (1.0 + lambda_) * moment - 1.0;
    }
    case Family::kWealth: {
      double acc = 0.0;
      for (const auto& b : blocks_) {
        if (b.matrix.empty()) continue;
        double rows = 0.0;
        for (const auto& row : b.matrix) rows += sum_powers(row, s);
        acc += b.probability * rows / static_cast<double>(b.matrix.size());
      }
      return acc - 1.0;
    }
    case Family::kTabulated: {
      double acc = 0.0;
      for (const auto& a : atoms_) acc += a.probability * sum_powers(a.weights, s);
      return acc - 1.0;
    }
  }
  return std::nullopt;
}

std::optional<double> CollisionModel::phi_derivative(double s) const {
  check_domain(s);
  switch (family_) {
    case Family::kDiag:
      return static_cast<double>(diag_n_) * std::pow(diag_a_, s) * std::log(diag_a_);
    case Family::kKac:
      return std::nullopt;
    case Family::kPoissonPlusOne: {
      if (hi_ == lo_) return (1.0 + lambda_) * std::pow(lo_, s) * std::log(lo_);
      const double s1 = s + 1.0;
      auto antiderivative = [s1](double a) {
        return std::pow(a, s1) * (std::log(a) / s1 - 1.0 / (s1 * s1));
      };
      return (1.0 + lambda_) * (antiderivative(hi_) - antiderivative(lo_)) / (hi_ - lo_);
    }
    case Family::kWealth: {
      double acc = 0.0;
      for (const auto& b : blocks_) {
        if (b.matrix.empty()) continue;
        double rows = 0.0;
        for (const auto& row : b.matrix) rows += sum_powers_log(row, s);
        acc += b.probability * rows / static_cast<double>(b.matrix.size());
      }
      return acc;
    }
    case Family::kTabulated: {
      double acc = 0.0;
      for (const auto& a : atoms_) acc += a.probability * sum_powers_log(a.weights, s);
      return acc;
    }
  }
  return std::nullopt;
}

double CollisionModel::mean_offspring() const {
  switch (family_) {
    case Family::kDiag: return static_cast<double>(diag_n_);
    case Family::kKac: return 2.0;
    case Family::kPoissonPlusOne: return 1.0 + lambda_;
    case Family::kWealth: {
      double acc = 0.0;
      for (const auto& b : blocks_) acc += b.probability * static_cast<double>(b.matrix.size());
      return acc;
    }
    case Family::kTabulated: {
      double acc = 0.0;
      for (const auto& a : atoms_) acc += a.probability * static_cast<double>(a.weights.size());
      return acc;
    }
  }
  return 0.0;
}

double CollisionModel::c_mean() const {
  if (family_ != Family::kWealth) return c_law_.mean();
  double acc = 0.0;
  for (const auto& b : blocks_) {
    if (b.shifts.empty()) continue;
    double s = 0.0;
    for (double c : b.shifts) s += c;
    acc += b.probability * s / static_cast<double>(b.shifts.size());
  }
  return acc;
}

double CollisionModel::c_second_moment() const { return c_abs_moment(2.0); }

double CollisionModel::c_abs_moment(double p) const {
  if (family_ != Family::kWealth) return c_law_.abs_moment(p);
  double acc = 0.0;
  for (const auto& b : blocks_) {
    if (b.shifts.empty()) {
      acc += b.probability * (p == 0.0 ? 1.0 : 0.0);
      continue;
    }
    double s = 0.0;
    for (double c : b.shifts) s += std::pow(std::abs(c), p);
    acc += b.probability * s / static_cast<double>(b.shifts.size());
  }
  return acc;
}

double CollisionModel::max_weight() const {
  switch (family_) {
    case Family::kDiag: return diag_a_;
    case Family::kKac: return 1.0;
    case Family::kPoissonPlusOne: return hi_;
    case Family::kWealth: {
      double m = 0.0;
      for (const auto& b : blocks_)
        for (const auto& row : b.matrix)
          for (double a : row) m = std::max(m, a);
      return m;
    }
    case Family::kTabulated: {
      double m = 0.0;
      for (const auto& a : atoms_)
        for (double w : a.weights) m = std::max(m, w);
      return m;
    }
  }
  return 0.0;
}

std::string CollisionModel::describe() const {
  std::ostringstream os;
  os << to_string(family_) << "(";
  switch (family_) {
    case Family::kDiag: os << "n=" << diag_n_ << ", a=" << diag_a_ << ", c=" << c_law_.describe(); break;
    case Family::kKac: os << "c=" << c_law_.describe(); break;
    case Family::kPoissonPlusOne:
      os << "lambda=" << lambda_ << ", a~U(" << lo_ << "," << hi_ << "), c=" << c_law_.describe();
      break;
    case Family::kWealth: os << blocks_.size() << " blocks"; break;
    case Family::kTabulated: os << atoms_.size() << " atoms, c=" << c_law_.describe(); break;
  }
  os << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_model(const CollisionModel& model, std::size_t draws,
                                std::uint64_t seed) {
  ValidationReport report;
  report.mean_offspring = model.mean_offspring();

  auto add = [&report](std::string name, bool passed, bool analytic, std::string detail) {
    report.checks.push_back({std::move(name), passed, analytic, std::move(detail)});
  };

  bool probabilities_ok = true;
  bool positive = true;
  bool non_degenerate = true;
  switch (model.family()) {
    case Family::kDiag:
      positive = model.diag_a() > 0.0;
      non_degenerate = model.diag_a() != 1.0;
      break;
    case Family::kKac:
      break;
    case Family::kPoissonPlusOne:
      positive = model.lo() > 0.0;
      non_degenerate = !(model.lo() == 1.0 && model.hi() == 1.0);
      break;
    case Family::kWealth: {
      double total = 0.0;
      non_degenerate = false;
      for (const auto& b : model.wealth_blocks()) {
        total += b.probability;
        if (b.probability < 0.0) probabilities_ok = false;
        for (const auto& row : b.matrix) {
          for (double a : row) {
            if (!(a > 0.0)) positive = false;
            if (b.probability > 0.0 && a != 1.0) non_degenerate = true;
          }
        }
      }
      probabilities_ok = probabilities_ok && std::abs(total - 1.0) < kProbabilityTolerance;
      break;
    }
    case Family::kTabulated: {
      double total = 0.0;
      non_degenerate = false;
      for (const auto& a : model.atoms()) {
        total += a.probability;
        if (a.probability < 0.0) probabilities_ok = false;
        for (double w : a.weights) {
          if (!(w > 0.0)) positive = false;
          if (a.probability > 0.0 && w != 1.0) non_degenerate = true;
        }
      }
      probabilities_ok = probabilities_ok && std::abs(total - 1.0) < kProbabilityTolerance;
      break;
    }
  }

  const double mean_n = report.mean_offspring;
  add("probabilities", probabilities_ok, true, "atom/block probabilities sum to 1");
  add("supercritical", mean_n > 1.0 && std::isfinite(mean_n), true,
      "E[N] = " + std::to_string(mean_n) + " must lie in (1, inf)");
  add("positive_weights", positive, true, "A_k > 0 for every k <= N");
  add("non_degenerate", non_degenerate, true, "weights are not a.s. all equal to 1");

  // Sampled confirmation of positivity and of the offspring mean.
  if (draws > 0 && probabilities_ok && model.family() != Family::kDiag) {
    RandomStream rng(seed, 0, StreamTag::kValidation);
    CollisionSample s;
    RunningStats n_stats;
    bool sampled_positive = true;
    for (std::size_t i = 0; i < draws; ++i) {
      model.sample(rng, s);
      n_stats.add(static_cast<double>(s.n));
      if (s.weights.size() != s.n) sampled_positive = false;
      for (double w : s.weights) {
        if (!(w > 0.0)) sampled_positive = false;
      }
    }
    add("sampled_positive_weights", sampled_positive, false,
        std::to_string(draws) + " draws");
    const bool mean_consistent =
        std::abs(n_stats.mean() - mean_n) <= 5.0 * n_stats.standard_error() + 1e-12;
    add("sampled_offspring_mean", mean_consistent, false,
        "empirical E[N] = " + std::to_string(n_stats.mean()));
  }

  report.accepted = std::all_of(report.checks.begin(), report.checks.end(),
                                [](const ValidationCheck& c) { return c.passed; });
  return report;
}

void require_valid(const CollisionModel& model) {
  const auto report = validate_model(model, 0);
  if (report.accepted) return;
  std::string failed;
  for (const auto& c : report.checks) {
    if (!c.passed) failed += (failed.empty() ? "" : "; ") + c.name + " (" + c.detail + ")";
  }
  throw Error(ErrorCode::kInvalidModel, model.describe() + ": " + failed);
}

}  // namespace kinetic
