#include "kinetic/spine.hpp"

#include <cmath>
#include <sstream>

#include "kinetic/error.hpp"
#include "kinetic/parallel.hpp"

namespace kinetic {

namespace {

constexpr std::size_t kPathsPerTask = 2000;

// Fold per-path values computed in parallel chunks, in path order.
template <typename F>
MeanEstimate spine_estimate(const ManyToOneSetup& setup, F&& path_value) {
  const std::size_t tasks = (setup.n_paths + kPathsPerTask - 1) / kPathsPerTask;
  std::vector<double> values(setup.n_paths);
  parallel_for(tasks, setup.threads, [&](std::size_t task) {
    RandomStream rng(setup.seed, task, StreamTag::kSpine);
    const std::size_t begin = task * kPathsPerTask;
    const std::size_t end = std::min(setup.n_paths, begin + kPathsPerTask);
    for (std::size_t i = begin; i < end; ++i) values[i] = path_value(rng);
  });
  return estimate_mean(values);
}

void finish(ManyToOneResult& r, double z) {
  r.overlap = intervals_overlap(r.lhs, r.se_lhs, r.rhs, r.se_rhs, z);
  if (r.rhs != 0.0 && r.se_rhs / std::abs(r.rhs) > 0.2) {
    r.rhs_noisy = true;
    r.warning = "spine estimate has relative SE above 20%; try alpha = gamma";
  }
}

SimulationPlan tree_plan(const SpectralProfile& profile, const InitialCondition& marks,
                         double t, std::uint64_t seed) {
  return SimulationPlan{.model = profile.model(),
                        .ic = marks,
                        .checkpoints = {t},
                        .gammas = {},
                        .alive_integrands = {},
                        .dead_integrands = {},
                        .seed = seed};
}

}  // namespace

SpinePath spine_walk(const CollisionModel& model, double alpha, double lambda_alpha,
                     double t, RandomStream& rng) {
  SpinePath path;
  path.alpha = alpha;
  path.horizon = t;
  path.step_positions.push_back(0.0);
  path.step_weights.push_back(1.0);
  const double scale = std::exp(-lambda_alpha);
  CollisionSample draw;
  std::vector<double> tilt;
  double clock = rng.exponential();
  while (clock <= t) {
    model.sample(rng, draw);
    path.event_times.push_back(clock);
    path.step_c.push_back(draw.c);
    if (draw.n == 0) {
      path.killed = true;
      path.step_positions.push_back(path.step_positions.back());
      path.step_weights.push_back(0.0);
      break;
    }
    tilt.resize(draw.n);
    double total = 0.0;
    for (std::size_t k = 0; k < draw.n; ++k) {
      tilt[k] = std::pow(draw.weights[k], alpha);
      total += tilt[k];
    }
    double u = rng.uniform() * total;
    std::size_t chosen = draw.n - 1;
    for (std::size_t k = 0; k < draw.n; ++k) {
      if (u < tilt[k]) {
        chosen = k;
        break;
      }
      u -= tilt[k];
    }
    path.step_positions.push_back(path.step_positions.back() + std::log(draw.weights[chosen]));
    path.step_weights.push_back(path.step_weights.back() * total * scale);
    clock += rng.exponential();
  }
  return path;
}

ManyToOneResult many_to_one_I(const SpectralProfile& profile,
                              const InitialCondition& marks, const Integrand& g,
                              const ManyToOneSetup& setup) {
  ManyToOneResult r;
  SimulationPlan plan = tree_plan(profile, marks, setup.t, setup.seed);
  plan.alive_integrands = {g};
  const Ensemble ens = simulate_ensemble(plan, setup.n_trees, setup.threads);
  const auto lhs = estimate_mean(column(ens, 0, Field::kAliveG, 0));
  r.lhs = lhs.mean;
  r.se_lhs = lhs.standard_error;

  const double lambda = profile.lambda(setup.alpha);
  const CollisionModel& model = profile.model();
  const auto rhs = spine_estimate(setup, [&](RandomStream& rng) {
    const SpinePath path = spine_walk(model, setup.alpha, lambda, setup.t, rng);
    const double w = path.step_weights.back();
    if (w == 0.0) return 0.0;
    const double s = path.step_positions.back();
    const double eta = static_cast<double>(path.steps());
    const double u = marks.sample(rng);
    return w * std::exp(-setup.alpha * s + lambda * eta) * g(s, u);
  });
  r.rhs = rhs.mean;
  r.se_rhs = rhs.standard_error;
  finish(r, setup.z);
  return r;
}

ManyToOneResult many_to_one_II(const SpectralProfile& profile, const Integrand& g,
                               const ManyToOneSetup& setup) {
  ManyToOneResult r;
  SimulationPlan plan =
      tree_plan(profile, InitialCondition::point(0.0), setup.t, setup.seed);
  plan.dead_integrands = {g};
  const Ensemble ens = simulate_ensemble(plan, setup.n_trees, setup.threads);
  const auto lhs = estimate_mean(column(ens, 0, Field::kDeadG, 0));
  r.lhs = lhs.mean;
  r.se_lhs = lhs.standard_error;

  const double lambda = profile.lambda(setup.alpha);
  const CollisionModel& model = profile.model();
  const auto rhs = spine_estimate(setup, [&](RandomStream& rng) {
    const SpinePath path = spine_walk(model, setup.alpha, lambda, setup.t, rng);
    double acc = 0.0;
    for (std::size_t k = 0; k < path.steps(); ++k) {
      const double w = path.step_weights[k];
      const double s = path.step_positions[k];
      acc += w * std::exp(-setup.alpha * s + lambda * static_cast<double>(k)) *
             g(s, path.step_c[k]);
    }
    return acc;
  });
  r.rhs = rhs.mean;
  r.se_rhs = rhs.standard_error;
  finish(r, setup.z);
  return r;
}

ManyToOneBatch many_to_one_batch(const SpectralProfile& profile,
                                 const InitialCondition& marks,
                                 const std::vector<Integrand>& gs,
                                 const ManyToOneSetup& setup) {
  SimulationPlan plan = tree_plan(profile, marks, setup.t, setup.seed);
  plan.alive_integrands = gs;
  plan.dead_integrands = gs;
  const Ensemble ens = simulate_ensemble(plan, setup.n_trees, setup.threads);

  const std::size_t n_g = gs.size();
  const double lambda = profile.lambda(setup.alpha);
  const CollisionModel& model = profile.model();
  const std::size_t tasks = (setup.n_paths + kPathsPerTask - 1) / kPathsPerTask;
  // values[path * 2 n_g + k]: alive formula for k < n_g, dead formula after.
  std::vector<double> values(setup.n_paths * 2 * n_g, 0.0);
  parallel_for(tasks, setup.threads, [&](std::size_t task) {
    RandomStream rng(setup.seed, task, StreamTag::kSpine);
    const std::size_t begin = task * kPathsPerTask;
    const std::size_t end = std::min(setup.n_paths, begin + kPathsPerTask);
    for (std::size_t i = begin; i < end; ++i) {
      const SpinePath path = spine_walk(model, setup.alpha, lambda, setup.t, rng);
      const double u = marks.sample(rng);
      double* row = values.data() + i * 2 * n_g;
      const double w = path.step_weights.back();
      if (w != 0.0) {
        const double s = path.step_positions.back();
        const double tilt = w * std::exp(-setup.alpha * s +
                                         lambda * static_cast<double>(path.steps()));
        for (std::size_t k = 0; k < n_g; ++k) row[k] = tilt * gs[k](s, u);
      }
      for (std::size_t j = 0; j < path.steps(); ++j) {
        const double s = path.step_positions[j];
        const double tilt = path.step_weights[j] *
                            std::exp(-setup.alpha * s + lambda * static_cast<double>(j));
        for (std::size_t k = 0; k < n_g; ++k) row[n_g + k] += tilt * gs[k](s, path.step_c[j]);
      }
    }
  });

  ManyToOneBatch out;
  for (std::size_t k = 0; k < 2 * n_g; ++k) {
    RunningStats rs;
    for (std::size_t i = 0; i < setup.n_paths; ++i) rs.add(values[i * 2 * n_g + k]);
    const bool alive = k < n_g;
    const std::size_t g = alive ? k : k - n_g;
    const auto lhs = estimate_mean(column(ens, 0, alive ? Field::kAliveG : Field::kDeadG, g));
    ManyToOneResult r;
    r.lhs = lhs.mean;
    r.se_lhs = lhs.standard_error;
    r.rhs = rs.mean();
    r.se_rhs = rs.standard_error();
    finish(r, setup.z);
    (alive ? out.alive : out.dead).push_back(r);
  }
  return out;
}

double mz_budget(const SpectralProfile& profile, const InitialCondition& marks,
                 double gamma, double p, double t) {
  if (!(p >= 1.0 && p <= 2.0)) throw Error(ErrorCode::kOutOfDomain, "MZ bound needs p in [1,2]");
  if (!(gamma > 0.0)) throw Error(ErrorCode::kOutOfDomain, "MZ bound needs gamma > 0");
  const auto m = marks.mean();
  if (!m || *m != 0.0) throw Error(ErrorCode::kInvalidArgument, "MZ bound needs a centered mark law");
  const auto moment = marks.abs_moment(p);
  if (!moment) throw Error(ErrorCode::kNoClosedForm, "E|U|^p unknown for " + marks.describe());
  return kMzConstant * std::exp(t * profile.phi(p * gamma)) * *moment;
}

}  // namespace kinetic
