#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "kinetic/collision.hpp"
#include "kinetic/initial.hpp"

namespace kinetic {

// Characteristic function sampled on the uniform grid [-xi_max, xi_max] with an
// odd number of nodes. Node n_points/2 is xi = 0.
class CFGrid {
 public:
  CFGrid(double xi_max, std::size_t n_points);
  static CFGrid from_function(double xi_max, std::size_t n_points,
                              const std::function<cplx(double)>& f);

  double xi_max() const { return xi_max_; }
  std::size_t size() const { return values_.size(); }
  std::size_t center() const { return values_.size() / 2; }
  double spacing() const { return spacing_; }
  double xi(std::size_t i) const;
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  const std::vector<cplx>& values() const { return values_; }

  // Piecewise-linear value at an arbitrary xi; outside the grid the boundary
  // node is used and `clamped` is set.
  cplx at(double x, bool& clamped) const;

  // phi(0) = 1, negative half = conjugate of the positive half, |phi| <= 1.
  // Returns the largest modulus seen before clipping.
  double project();

  // Exact node constraints with modulus slack `tol`.
  bool satisfies_constraints(double tol = 1e-9) const;

  void write_csv(std::ostream& out, bool header = true) const;

 private:
  double xi_max_;
  double spacing_;
  double time_ = 0.0;
  std::vector<cplx> values_;
};

double sup_distance(const CFGrid& a, const CFGrid& b, double xi_limit = -1.0);

// Fixed set of collision draws reused for every evaluation of Q. Identical
// draws are merged with a multiplicity. With `with_l` every draw also carries
// an independent L ~ U(0,1) and nothing is merged.
struct QuadraturePanel {
  struct Atom {
    double c = 0.0;
    std::vector<double> weights;
    double multiplicity = 1.0;
    double l = 1.0;
  };
  std::vector<Atom> atoms;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  bool with_l = false;

  static QuadraturePanel build(const CollisionModel& model, std::size_t m,
                               std::uint64_t seed, bool with_l = false);
};

struct ApplyStats {
  std::uint64_t evaluations = 0;
  std::uint64_t clamped = 0;
  // Monte Carlo standard error of the panel average at each node (modulus).
  std::vector<double> node_se;

  double clamp_fraction() const {
    return evaluations == 0 ? 0.0 : static_cast<double>(clamped) / static_cast<double>(evaluations);
  }
};

// (Q_s psi)(xi) = panel mean of e^{i xi s c} prod psi(a_k xi).
CFGrid apply_q(const CFGrid& psi, const QuadraturePanel& panel, double s_scale,
               ApplyStats* stats = nullptr, unsigned threads = 1);

struct EvolveOptions {
  double t_end = 1.0;
  double dt = 0.02;
  std::vector<double> checkpoints;
  unsigned threads = 1;
};

struct EvolveResult {
  CFGrid final_grid;
  std::vector<CFGrid> checkpoints;
  std::size_t steps = 0;
  std::uint64_t clamped = 0;
  std::uint64_t evaluations = 0;
  double max_premodulus = 0.0;
};

inline constexpr double kInstabilityModulus = 1.0 + 1e-3;

// Heun steps of phi' = Q phi - phi with projection after every step. Throws
// kUnstable if a pre-projection modulus exceeds 1 + 1e-3.
EvolveResult evolve(const CFGrid& phi0, const QuadraturePanel& panel,
                    const EvolveOptions& options);

struct ResidualReport {
  double residual = 0.0;
  double xi_at_max = 0.0;
  double panel_se_at_max = 0.0;
  double max_panel_se = 0.0;
  double clamp_fraction = 0.0;
};

// sup |w(xi) - panel mean of prod w(L^{-alpha} a_k xi)|. The panel must carry L.
ResidualReport stationary_residual(const CFGrid& w, const QuadraturePanel& panel,
                                   double alpha);

inline constexpr double kDefaultXiMax = 20.0;
inline constexpr std::size_t kDefaultGridPoints = 2001;

}  // namespace kinetic
