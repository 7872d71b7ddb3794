#include "kinetic/branching.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "kinetic/error.hpp"
#include "kinetic/parallel.hpp"
#include "kinetic/stats.hpp"

namespace kinetic {

namespace {

std::atomic<std::uint64_t> g_invariant_checks{0};
std::atomic<std::uint64_t> g_invariant_violations{0};

struct Particle {
  double death;
  double v;
  std::uint64_t seq;
};

bool earlier(const Particle& a, const Particle& b) {
  if (a.death != b.death) return a.death < b.death;
  return a.seq < b.seq;
}

// Binary min-heap on (death, seq). A death followed by births replaces the top
// in place, which saves one sift per event.
class EventQueue {
 public:
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  const Particle& top() const { return items_.front(); }
  const std::vector<Particle>& items() const { return items_; }
  void reserve(std::size_t n) { items_.reserve(n); }

  void push(const Particle& p) {
    items_.push_back(p);
    sift_up(items_.size() - 1);
  }
  void replace_top(const Particle& p) {
    items_.front() = p;
    sift_down(0);
  }
  void pop() {
    items_.front() = items_.back();
    items_.pop_back();
    if (!items_.empty()) sift_down(0);
  }

 private:
  void sift_up(std::size_t i) {
    const Particle p = items_[i];
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!earlier(p, items_[parent])) break;
      items_[i] = items_[parent];
      i = parent;
    }
    items_[i] = p;
  }
  void sift_down(std::size_t i) {
    const std::size_t n = items_.size();
    const Particle p = items_[i];
    for (;;) {
      const std::size_t first = 2 * i + 1;
      if (first >= n) break;
      std::size_t best = first;
      if (first + 1 < n && earlier(items_[first + 1], items_[first])) best = first + 1;
      if (!earlier(items_[best], p)) break;
      items_[i] = items_[best];
      i = best;
    }
    items_[i] = p;
  }

  std::vector<Particle> items_;
};

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

void invariant(bool ok, const char* what) {
  if (!ok) {
    g_invariant_violations.fetch_add(1, std::memory_order_relaxed);
    throw Error(ErrorCode::kInvariantViolation, what);
  }
  count_invariant_check();
}

std::uint64_t invariant_violations() { return g_invariant_violations.load(); }

std::uint64_t invariant_checks_passed() { return g_invariant_checks.load(); }
void count_invariant_check() { g_invariant_checks.fetch_add(1, std::memory_order_relaxed); }

double Integrand::operator()(double v, double m) const {
  switch (kind) {
    case IntegrandKind::kOne: return 1.0;
    case IntegrandKind::kExpGamma: return std::exp(gamma * v);
    case IntegrandKind::kVExpGamma: return v * std::exp(gamma * v);
    case IntegrandKind::kExpGammaAbsP: return std::exp(gamma * v) * std::pow(std::abs(m), p);
  }
  return 0.0;
}

std::string Integrand::describe() const {
  std::ostringstream os;
  switch (kind) {
    case IntegrandKind::kOne: os << "1"; break;
    case IntegrandKind::kExpGamma: os << "exp(" << gamma << "v)"; break;
    case IntegrandKind::kVExpGamma: os << "v*exp(" << gamma << "v)"; break;
    case IntegrandKind::kExpGammaAbsP: os << "exp(" << gamma << "v)|m|^" << p; break;
  }
  return os.str();
}

void SimulationPlan::validate() const {
  if (checkpoints.empty()) throw Error(ErrorCode::kInvalidArgument, "plan needs checkpoints");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i] > 0.0) || (i > 0 && !(checkpoints[i] > checkpoints[i - 1]))) {
      throw Error(ErrorCode::kInvalidArgument, "checkpoints must be positive and increasing");
    }
  }
  if (max_alive == 0 || max_events == 0) {
    throw Error(ErrorCode::kInvalidArgument, "caps must be positive");
  }
}

ReplicateRecord simulate_once(const SimulationPlan& plan, std::uint64_t index,
                              Frontier* frontier) {
  RandomStream tree(plan.seed, index, StreamTag::kTree);
  RandomStream marks(plan.seed, index, StreamTag::kMarks);
  static const std::vector<double> kRoot{0.0};
  return simulate_forest(plan, kRoot, tree, marks, frontier);
}

ReplicateRecord simulate_forest(const SimulationPlan& plan,
                                const std::vector<double>& roots,
                                RandomStream& tree_rng, RandomStream& marks_rng,
                                Frontier* frontier) {
  const std::size_t n_gamma = plan.gammas.size();
  const std::size_t n_alive_g = plan.alive_integrands.size();
  const std::size_t n_dead_g = plan.dead_integrands.size();

  ReplicateRecord rec;
  rec.checkpoints.resize(plan.checkpoints.size());

  EventQueue heap;
  heap.reserve(std::min<std::size_t>(plan.max_alive, 1024));
  std::uint64_t seq = 0;
  for (double v : roots) heap.push({tree_rng.exponential(), v, seq++});

  KahanSum c_sum;
  std::vector<KahanSum> dead_sums(n_dead_g);
  std::uint64_t dead = 0;
  std::uint64_t children = 0;
  CollisionSample draw;
  bool capped = false;
  // Many families repeat the same weight; remember its log.
  double last_a = 1.0;
  double last_log_a = 0.0;

  for (std::size_t j = 0; j < plan.checkpoints.size(); ++j) {
    const double t = plan.checkpoints[j];
    CheckpointValues& cp = rec.checkpoints[j];
    cp.t = t;

    while (!capped && !heap.empty() && heap.top().death <= t) {
      const Particle x = heap.top();

      plan.model.sample(tree_rng, draw);
      const double ev = std::exp(x.v);
      c_sum.add(ev * draw.c);
      for (std::size_t k = 0; k < n_dead_g; ++k) {
        dead_sums[k].add(plan.dead_integrands[k](x.v, draw.c));
      }
      ++dead;
      ++rec.events;
      if (draw.weights.empty()) heap.pop();
      for (std::size_t k = 0; k < draw.weights.size(); ++k) {
        if (draw.weights[k] != last_a) {
          last_a = draw.weights[k];
          last_log_a = std::log(last_a);
        }
        const Particle child{x.death + tree_rng.exponential(), x.v + last_log_a, seq++};
        if (k == 0) {
          heap.replace_top(child);
        } else {
          heap.push(child);
        }
      }
      children += draw.weights.size();
      if (heap.size() > plan.max_alive || rec.events > plan.max_events) {
        capped = true;
        rec.status = RecordStatus::kCapped;
        rec.capped_at = x.death;
      }
    }

    if (capped) {
      cp.missing = true;
      continue;
    }

    invariant(heap.size() + dead == roots.size() + children,
              "alive = roots + children - dead");

    KahanSum x_sum;
    std::vector<KahanSum> z_sums(n_gamma);
    std::vector<KahanSum> vz_sums(n_gamma);
    std::vector<KahanSum> alive_sums(n_alive_g);
    double max_v = kNegInf;
    for (const Particle& p : heap.items()) {
      const double r = plan.ic.sample(marks_rng);
      x_sum.add(std::exp(p.v) * r);
      for (std::size_t g = 0; g < n_gamma; ++g) {
        const double e = std::exp(plan.gammas[g] * p.v);
        z_sums[g].add(e);
        vz_sums[g].add(p.v * e);
      }
      for (std::size_t k = 0; k < n_alive_g; ++k) {
        alive_sums[k].add(plan.alive_integrands[k](p.v, r));
      }
      max_v = std::max(max_v, p.v);
    }

    cp.x = x_sum.value();
    cp.c = c_sum.value();
    cp.w = cp.x + cp.c;
    cp.alive = heap.size();
    cp.dead = dead;
    cp.max_position = max_v;
    cp.z.resize(n_gamma);
    cp.vz.resize(n_gamma);
    for (std::size_t g = 0; g < n_gamma; ++g) {
      cp.z[g] = z_sums[g].value();
      cp.vz[g] = vz_sums[g].value();
      if (plan.gammas[g] == 0.0) {
        invariant(cp.z[g] == static_cast<double>(cp.alive), "Z_t(0) = alive count");
      }
    }
    cp.alive_g.resize(n_alive_g);
    for (std::size_t k = 0; k < n_alive_g; ++k) cp.alive_g[k] = alive_sums[k].value();
    cp.dead_g.resize(n_dead_g);
    for (std::size_t k = 0; k < n_dead_g; ++k) cp.dead_g[k] = dead_sums[k].value();
    invariant(cp.w == cp.x + cp.c, "W_t = X_t + C_t");
    if (j > 0 && !rec.checkpoints[j - 1].missing) {
      invariant(cp.dead >= rec.checkpoints[j - 1].dead, "dead count nondecreasing");
    }
  }

  if (frontier != nullptr && !capped) {
    frontier->positions.clear();
    frontier->positions.reserve(heap.size());
    // Heap layout is deterministic; sort anyway so the frontier is canonical.
    std::vector<Particle> alive = heap.items();
    std::sort(alive.begin(), alive.end(),
              [](const Particle& a, const Particle& b) { return a.seq < b.seq; });
    for (const Particle& p : alive) frontier->positions.push_back(p.v);
    frontier->c = c_sum.value();
  }
  return rec;
}

Ensemble simulate_ensemble(const SimulationPlan& plan, std::size_t n_replicates,
                           unsigned threads) {
  if (n_replicates == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one replicate");
  plan.validate();
  Ensemble ens;
  ens.records.resize(n_replicates);
  parallel_for(n_replicates, threads,
               [&](std::size_t i) { ens.records[i] = simulate_once(plan, i); });
  for (const auto& r : ens.records) {
    if (r.status == RecordStatus::kCapped) ++ens.capped;
  }
  ens.capped_fraction = static_cast<double>(ens.capped) / static_cast<double>(n_replicates);
  ens.bias_flag = ens.capped_fraction > 0.01;
  return ens;
}

std::vector<double> column(const Ensemble& ens, std::size_t cp, Field field,
                           std::size_t which) {
  std::vector<double> out;
  out.reserve(ens.records.size());
  for (const auto& r : ens.records) {
    if (r.status == RecordStatus::kCapped) continue;
    const CheckpointValues& v = r.checkpoints.at(cp);
    switch (field) {
      case Field::kW: out.push_back(v.w); break;
      case Field::kX: out.push_back(v.x); break;
      case Field::kC: out.push_back(v.c); break;
      case Field::kZ: out.push_back(v.z.at(which)); break;
      case Field::kVZ: out.push_back(v.vz.at(which)); break;
      case Field::kAliveG: out.push_back(v.alive_g.at(which)); break;
      case Field::kDeadG: out.push_back(v.dead_g.at(which)); break;
      case Field::kAlive: out.push_back(static_cast<double>(v.alive)); break;
      case Field::kDead: out.push_back(static_cast<double>(v.dead)); break;
      case Field::kMaxPosition: out.push_back(v.max_position); break;
    }
  }
  return out;
}

std::vector<SeriesPoint> martingale_series(const Ensemble& ens,
                                           const SimulationPlan& plan,
                                           std::size_t gamma_index, double phi_gamma) {
  if (gamma_index >= plan.gammas.size()) {
    throw Error(ErrorCode::kInvalidArgument, "gamma not in plan");
  }
  std::vector<SeriesPoint> out;
  for (std::size_t j = 0; j < plan.checkpoints.size(); ++j) {
    const double t = plan.checkpoints[j];
    const double scale = std::exp(-phi_gamma * t);
    RunningStats rs;
    for (double z : column(ens, j, Field::kZ, gamma_index)) rs.add(scale * z);
    out.push_back({t, rs.mean(), rs.standard_error(), rs.variance(),
                   rs.variance_standard_error(), rs.count()});
  }
  return out;
}

VariancePlateau variance_plateau(const std::vector<SeriesPoint>& series,
                                 std::size_t cp1, std::size_t cp2, double z) {
  VariancePlateau p;
  p.t1 = series.at(cp1).t;
  p.t2 = series.at(cp2).t;
  p.var1 = series[cp1].variance;
  p.var2 = series[cp2].variance;
  p.combined_se = std::hypot(series[cp1].variance_se, series[cp2].variance_se);
  // The absolute slack covers degenerate cases where both variances are roundoff.
  p.plateau = std::abs(p.var2 - p.var1) <= z * p.combined_se + 1e-12;
  return p;
}

std::vector<DriftQuantiles> max_position_drift(const Ensemble& ens,
                                               const SimulationPlan& plan,
                                               double gamma, double phi_gamma) {
  std::vector<DriftQuantiles> out;
  for (std::size_t j = 0; j < plan.checkpoints.size(); ++j) {
    const double t = plan.checkpoints[j];
    std::vector<double> d;
    std::size_t extinct = 0;
    for (double m : column(ens, j, Field::kMaxPosition)) {
      if (m == kNegInf) {
        ++extinct;
        d.push_back(kNegInf);
      } else {
        d.push_back(gamma * m - phi_gamma * t);
      }
    }
    out.push_back({t, quantile(d, 0.25), quantile(d, 0.5), quantile(d, 0.75), extinct});
  }
  return out;
}

void write_summary_csv(std::ostream& out, const Ensemble& ens, const SimulationPlan& plan) {
  out << "t,statistic,n,mean,se,variance,median\n";
  out.precision(17);
  auto row = [&](double t, const std::string& name, const std::vector<double>& v) {
    RunningStats rs;
    for (double x : v) rs.add(x);
    out << t << ',' << name << ',' << rs.count() << ',' << rs.mean() << ','
        << rs.standard_error() << ',' << rs.variance() << ',' << median(v) << '\n';
  };
  for (std::size_t j = 0; j < plan.checkpoints.size(); ++j) {
    const double t = plan.checkpoints[j];
    row(t, "W", column(ens, j, Field::kW));
    row(t, "X", column(ens, j, Field::kX));
    row(t, "C", column(ens, j, Field::kC));
    for (std::size_t g = 0; g < plan.gammas.size(); ++g) {
      std::ostringstream name;
      name << "Z(" << plan.gammas[g] << ")";
      row(t, name.str(), column(ens, j, Field::kZ, g));
      std::ostringstream vname;
      vname << "VZ(" << plan.gammas[g] << ")";
      row(t, vname.str(), column(ens, j, Field::kVZ, g));
    }
    for (std::size_t k = 0; k < plan.alive_integrands.size(); ++k) {
      row(t, "alive:" + plan.alive_integrands[k].describe(), column(ens, j, Field::kAliveG, k));
    }
    for (std::size_t k = 0; k < plan.dead_integrands.size(); ++k) {
      row(t, "dead:" + plan.dead_integrands[k].describe(), column(ens, j, Field::kDeadG, k));
    }
    row(t, "alive_count", column(ens, j, Field::kAlive));
    row(t, "dead_count", column(ens, j, Field::kDead));
  }
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, sizeof(U));
}

}  // namespace

void write_binary_dump(std::ostream& out, const Ensemble& ens, const SimulationPlan& plan) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.write("KLDUMP01", 8);
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ens.records.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(plan.checkpoints.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(plan.gammas.size()));
  for (double t : plan.checkpoints) put_le<double>(out, t);
  for (double g : plan.gammas) put_le<double>(out, g);
  for (const auto& r : ens.records) {
    out.put(r.status == RecordStatus::kCapped ? 1 : 0);
  }
  auto col = [&](std::size_t j, auto get) {
    for (const auto& r : ens.records) {
      const auto& v = r.checkpoints[j];
      put_le<double>(out, v.missing ? nan : get(v));
    }
  };
  for (std::size_t j = 0; j < plan.checkpoints.size(); ++j) {
    col(j, [](const CheckpointValues& v) { return v.w; });
    col(j, [](const CheckpointValues& v) { return v.x; });
    col(j, [](const CheckpointValues& v) { return v.c; });
    for (std::size_t g = 0; g < plan.gammas.size(); ++g) {
      col(j, [g](const CheckpointValues& v) { return v.z[g]; });
    }
    for (const auto& r : ens.records) {
      const auto& v = r.checkpoints[j];
      put_le<std::uint64_t>(out, v.missing ? ~0ULL : v.alive);
    }
    for (const auto& r : ens.records) {
      const auto& v = r.checkpoints[j];
      put_le<std::uint64_t>(out, v.missing ? ~0ULL : v.dead);
    }
    col(j, [](const CheckpointValues& v) { return v.max_position; });
  }
}

}  // namespace kinetic
