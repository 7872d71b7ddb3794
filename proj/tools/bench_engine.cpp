#include <chrono>
#include <cstdio>

#include "kinetic/branching.hpp"

using namespace kinetic;

int main(int argc, char** argv) {
  const double t = argc > 1 ? std::atof(argv[1]) : 8.0;
  const int n = argc > 2 ? std::atoi(argv[2]) : 200;
  SimulationPlan plan{.model = CollisionModel::diag(2, 0.9, CLaw::constant(1.0)),
                      .ic = InitialCondition::point(0.0),
                      .checkpoints = {t},
                      .gammas = {1.0}};
  const auto start = std::chrono::steady_clock::now();
  auto ens = simulate_ensemble(plan, n, 1);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  double ev = 0;
  for (auto& r : ens.records) ev += r.events;
  std::printf("t=%g n=%d: %.3f s total, %.3f ms/replicate, %.1f ns/event\n", t, n, secs,
              1e3 * secs / n, 1e9 * secs / ev);
}
