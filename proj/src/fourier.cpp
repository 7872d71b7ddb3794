#include "kinetic/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "kinetic/branching.hpp"
#include "kinetic/error.hpp"
#include "kinetic/parallel.hpp"

namespace kinetic {

namespace {

constexpr std::size_t kBlock = 64;

// Linear interpolation on the non-negative half h[0..H] at fractional index f.
inline cplx half_at(const cplx* h, std::size_t last, double f, bool& clamped) {
  if (f >= static_cast<double>(last)) {
    if (f > static_cast<double>(last)) clamped = true;
    return h[last];
  }
  const auto j = static_cast<std::size_t>(f);
  const double frac = f - static_cast<double>(j);
  return h[j] + frac * (h[j + 1] - h[j]);
}

}  // namespace

CFGrid::CFGrid(double xi_max, std::size_t n_points)
    : xi_max_(xi_max), values_(n_points, cplx(1.0, 0.0)) {
  if (!(xi_max > 0.0) || n_points < 3 || n_points % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs xi_max > 0 and an odd n_points >= 3");
  }
  spacing_ = xi_max / static_cast<double>(n_points / 2);
}

CFGrid CFGrid::from_function(double xi_max, std::size_t n_points,
                             const std::function<cplx(double)>& f) {
  CFGrid g(xi_max, n_points);
  const std::size_t c = g.center();
  for (std::size_t i = c; i < g.size(); ++i) g.values_[i] = f(g.xi(i));
  for (std::size_t k = 1; k <= c; ++k) g.values_[c - k] = std::conj(g.values_[c + k]);
  g.values_[c] = 1.0;
  return g;
}

double CFGrid::xi(std::size_t i) const {
  return (static_cast<double>(i) - static_cast<double>(center())) * spacing_;
}

cplx CFGrid::at(double x, bool& clamped) const {
  const std::size_t c = center();
  const double f = std::abs(x) / spacing_;
  const cplx v = half_at(values_.data() + c, c, f, clamped);
  return x < 0.0 ? std::conj(v) : v;
}

double CFGrid::project() {
  const std::size_t c = center();
  double max_mod = 0.0;
  for (std::size_t i = c; i < values_.size(); ++i) {
    const double m = std::abs(values_[i]);
    max_mod = std::max(max_mod, m);
    if (m > 1.0) values_[i] /= m;
  }
  values_[c] = 1.0;
  for (std::size_t k = 1; k <= c; ++k) values_[c - k] = std::conj(values_[c + k]);
  return max_mod;
}

bool CFGrid::satisfies_constraints(double tol) const {
  const std::size_t c = center();
  if (values_[c] != cplx(1.0, 0.0)) return false;
  for (std::size_t k = 1; k <= c; ++k) {
    if (values_[c - k] != std::conj(values_[c + k])) return false;
  }
  for (const auto& v : values_) {
    if (!(std::abs(v) <= 1.0 + tol)) return false;
  }
  return true;
}

void CFGrid::write_csv(std::ostream& out, bool header) const {
  if (header) out << "t,xi,re,im\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    out << time_ << ',' << xi(i) << ',' << values_[i].real() << ',' << values_[i].imag() << '\n';
  }
  out.precision(old);
}

double sup_distance(const CFGrid& a, const CFGrid& b, double xi_limit) {
  if (a.size() != b.size() || a.xi_max() != b.xi_max()) {
    throw Error(ErrorCode::kInvalidArgument, "grids differ");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (xi_limit >= 0.0 && std::abs(a.xi(i)) > xi_limit + 1e-12) continue;
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return d;
}

QuadraturePanel QuadraturePanel::build(const CollisionModel& model, std::size_t m,
                                       std::uint64_t seed, bool with_l) {
  if (m < 1000) throw Error(ErrorCode::kInvalidArgument, "quadrature panel needs M >= 1000");
  QuadraturePanel panel;
  panel.m = m;
  panel.seed = seed;
  panel.with_l = with_l;
  RandomStream rng(seed, 0, StreamTag::kPanel);
  CollisionSample draw;
  if (with_l) {
    panel.atoms.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      model.sample(rng, draw);
      panel.atoms.push_back({draw.c, draw.weights, 1.0, rng.uniform()});
    }
    return panel;
  }
  // Merge identical draws; first-seen order keeps the result deterministic.
  std::map<std::pair<double, std::vector<double>>, std::size_t> index;
  for (std::size_t i = 0; i < m; ++i) {
    model.sample(rng, draw);
    auto key = std::make_pair(draw.c, draw.weights);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(std::move(key), panel.atoms.size());
      panel.atoms.push_back({draw.c, draw.weights, 1.0, 1.0});
    } else {
      panel.atoms[it->second].multiplicity += 1.0;
    }
  }
  return panel;
}

CFGrid apply_q(const CFGrid& psi, const QuadraturePanel& panel, double s_scale,
               ApplyStats* stats, unsigned threads) {
  if (!(s_scale >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "s_scale must be >= 0");
  const std::size_t c = psi.center();
  const std::size_t half = c + 1;
  const cplx* h = psi.values().data() + c;
  const double dxi = psi.spacing();
  const double inv_m = 1.0 / static_cast<double>(panel.m);

  std::vector<cplx> out(half);
  std::vector<double> second(half);
  const std::size_t blocks = (half + kBlock - 1) / kBlock;
  std::vector<std::uint64_t> block_clamped(blocks, 0);

  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t i0 = b * kBlock;
    const std::size_t i1 = std::min(half, i0 + kBlock);
    cplx acc[kBlock] = {};
    double acc2[kBlock] = {};
    std::uint64_t clamped = 0;
    for (const auto& atom : panel.atoms) {
      const double omega = dxi * s_scale * atom.c;
      cplx phase = std::polar(1.0, omega * static_cast<double>(i0));
      const cplx rot = std::polar(1.0, omega);
      for (std::size_t i = i0; i < i1; ++i) {
        cplx prod = phase;
        const double fi = static_cast<double>(i);
        for (double a : atom.weights) {
          bool cl = false;
          prod *= half_at(h, c, a * fi, cl);
          clamped += cl ? 1 : 0;
        }
        acc[i - i0] += atom.multiplicity * prod;
        acc2[i - i0] += atom.multiplicity * std::norm(prod);
        phase *= rot;
      }
    }
    for (std::size_t i = i0; i < i1; ++i) {
      out[i] = acc[i - i0] * inv_m;
      second[i] = acc2[i - i0] * inv_m;
    }
    block_clamped[b] = clamped;
  });

  CFGrid result(psi.xi_max(), psi.size());
  result.set_time(psi.time());
  for (std::size_t i = 0; i < half; ++i) result[c + i] = out[i];
  for (std::size_t k = 1; k <= c; ++k) result[c - k] = std::conj(result[c + k]);

  if (stats != nullptr) {
    std::uint64_t evals = 0;
    for (const auto& atom : panel.atoms) evals += atom.weights.size();
    stats->evaluations += evals * half;
    for (auto v : block_clamped) stats->clamped += v;
    stats->node_se.assign(psi.size(), 0.0);
    for (std::size_t i = 0; i < half; ++i) {
      const double var = std::max(0.0, second[i] - std::norm(out[i]));
      const double se = std::sqrt(var * inv_m);
      stats->node_se[c + i] = se;
      stats->node_se[c - i] = se;
    }
  }
  return result;
}

EvolveResult evolve(const CFGrid& phi0, const QuadraturePanel& panel,
                    const EvolveOptions& options) {
  if (!(options.dt > 0.0 && options.dt <= 0.05)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must lie in (0, 0.05]");
  }
  if (!(options.t_end > 0.0 && options.t_end <= 10.0)) {
    throw Error(ErrorCode::kInvalidArgument, "t_end must lie in (0, 10]");
  }
  const auto steps = static_cast<std::size_t>(std::ceil(options.t_end / options.dt - 1e-9));
  const double dt = options.t_end / static_cast<double>(steps);

  EvolveResult res{phi0, {}, steps, 0, 0, 0.0};
  CFGrid& phi = res.final_grid;
  phi.set_time(0.0);
  phi.project();
  std::size_t next_cp = 0;
  const std::size_t n = phi.size();
  ApplyStats st;
  for (std::size_t s = 1; s <= steps; ++s) {
    const CFGrid q1 = apply_q(phi, panel, 1.0, &st, options.threads);
    CFGrid pred = phi;
    for (std::size_t i = 0; i < n; ++i) pred[i] = phi[i] + dt * (q1[i] - phi[i]);
    const CFGrid q2 = apply_q(pred, panel, 1.0, &st, options.threads);
    for (std::size_t i = 0; i < n; ++i) {
      phi[i] += 0.5 * dt * ((q1[i] - phi[i]) + (q2[i] - pred[i]));
    }
    const double t = dt * static_cast<double>(s);
    phi.set_time(t);
    const double pre = phi.project();
    invariant(phi.satisfies_constraints(1e-12), "solver CF node constraints");
    res.max_premodulus = std::max(res.max_premodulus, pre);
    if (pre > kInstabilityModulus) {
      throw Error(ErrorCode::kUnstable, "pre-projection modulus " + std::to_string(pre) +
                                            " at t = " + std::to_string(t));
    }
    while (next_cp < options.checkpoints.size() &&
           options.checkpoints[next_cp] <= t + 0.5 * dt) {
      res.checkpoints.push_back(phi);
      ++next_cp;
    }
  }
  res.clamped = st.clamped;
  res.evaluations = st.evaluations;
  return res;
}

ResidualReport stationary_residual(const CFGrid& w, const QuadraturePanel& panel,
                                   double alpha) {
  if (!panel.with_l) throw Error(ErrorCode::kInvalidArgument, "residual panel must carry L draws");
  ResidualReport rep;
  const std::size_t c = w.center();
  const cplx* h = w.values().data() + c;
  const double inv_m = 1.0 / static_cast<double>(panel.m);
  std::uint64_t evals = 0;
  std::uint64_t clamped = 0;
  std::vector<double> scale(panel.atoms.size());
  for (std::size_t j = 0; j < panel.atoms.size(); ++j) {
    scale[j] = std::pow(panel.atoms[j].l, -alpha);
  }
  for (std::size_t i = 1; i <= c; ++i) {
    const double fi = static_cast<double>(i);
    cplx acc = 0.0;
    double acc2 = 0.0;
    for (std::size_t j = 0; j < panel.atoms.size(); ++j) {
      cplx prod = 1.0;
      for (double a : panel.atoms[j].weights) {
        bool cl = false;
        prod *= half_at(h, c, scale[j] * a * fi, cl);
        clamped += cl ? 1 : 0;
        ++evals;
      }
      acc += prod;
      acc2 += std::norm(prod);
    }
    const cplx mean = acc * inv_m;
    const double se = std::sqrt(std::max(0.0, acc2 * inv_m - std::norm(mean)) * inv_m);
    const double d = std::abs(h[i] - mean);
    rep.max_panel_se = std::max(rep.max_panel_se, se);
    if (d > rep.residual) {
      rep.residual = d;
      rep.xi_at_max = w.xi(c + i);
      rep.panel_se_at_max = se;
    }
  }
  rep.clamp_fraction = evals == 0 ? 0.0 : static_cast<double>(clamped) / static_cast<double>(evals);
  return rep;
}

}  // namespace kinetic
