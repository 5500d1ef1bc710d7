#include "riskmon/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "riskmon/random.hpp"

namespace riskmon {

void Bounds::validate() const {
  if (lo.size() != hi.size() || lo.empty())
    throw std::invalid_argument("bounds: lo/hi must be non-empty and equally sized");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("bounds: lo > hi");
}

OptimizationResult pattern_search(const Objective& objective, std::span<const double> init,
                                  const Bounds& bounds, const PatternSearchConfig& cfg) {
  bounds.validate();
  if (init.size() != bounds.dims())
    throw std::invalid_argument("pattern_search: init/bounds dimension mismatch");
  if (cfg.max_iterations < 1) throw std::invalid_argument("pattern_search: iterations < 1");

  OptimizationResult res;
  res.params.assign(init.begin(), init.end());
  for (std::size_t i = 0; i < res.params.size(); ++i)
    if (res.params[i] < bounds.lo[i] || res.params[i] > bounds.hi[i])
      throw std::invalid_argument("pattern_search: init outside bounds");
  res.cost = objective(res.params);
  res.evaluations = 1;
  if (!std::isfinite(res.cost)) res.cost = std::numeric_limits<double>::infinity();

  double mesh = cfg.initial_mesh;
  std::vector<double> trial(res.params.size());
  std::vector<double> best_trial;
  while (res.iterations < cfg.max_iterations && mesh >= cfg.min_mesh) {
    ++res.iterations;
    double best_cost = res.cost;
    best_trial.clear();
    for (std::size_t i = 0; i < res.params.size(); ++i) {
      const double step = mesh * (bounds.hi[i] - bounds.lo[i]);
      for (double sign : {1.0, -1.0}) {
        trial = res.params;
        trial[i] = std::clamp(res.params[i] + sign * step, bounds.lo[i], bounds.hi[i]);
        if (trial[i] == res.params[i]) continue;
        const double c = objective(trial);
        ++res.evaluations;
        if (std::isfinite(c) && c < best_cost) {
          best_cost = c;
          best_trial = trial;
        }
      }
    }
    if (!best_trial.empty()) {
      res.params = best_trial;
      res.cost = best_cost;
      mesh *= cfg.expansion;
    } else {
      mesh *= cfg.contraction;
    }
    res.history.push_back(res.cost);
  }
  return res;
}

OptimizationResult particle_swarm(const Objective& objective, const Bounds& bounds,
                                  const SwarmConfig& cfg,
                                  std::span<const std::vector<double>> seeds) {
  bounds.validate();
  if (cfg.swarm_size < 1 || cfg.iterations < 1)
    throw std::invalid_argument("particle_swarm: swarm_size and iterations must be >= 1");
  const std::size_t dims = bounds.dims();
  const auto n = static_cast<std::size_t>(cfg.swarm_size);
  Rng rng(cfg.seed);

  std::vector<std::vector<double>> pos(n, std::vector<double>(dims));
  std::vector<std::vector<double>> vel(n, std::vector<double>(dims));
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t d = 0; d < dims; ++d) {
      const double range = bounds.hi[d] - bounds.lo[d];
      pos[p][d] = p < seeds.size() ? std::clamp(seeds[p].at(d), bounds.lo[d], bounds.hi[d])
                                   : rng.uniform(bounds.lo[d], bounds.hi[d]);
      vel[p][d] = rng.uniform(-range, range);
    }

  auto evaluate = [&](const std::vector<double>& x) {
    const double c = objective(x);
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
  };

  OptimizationResult res;
  std::vector<std::vector<double>> personal = pos;
  std::vector<double> personal_cost(n);
  res.cost = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n; ++p) {
    personal_cost[p] = evaluate(pos[p]);
    if (personal_cost[p] < res.cost || res.params.empty()) {
      res.cost = personal_cost[p];
      res.params = pos[p];
    }
  }
  res.evaluations = static_cast<long>(n);
  res.iterations = 1;
  res.history.push_back(res.cost);

  for (int it = 1; it < cfg.iterations; ++it) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double range = bounds.hi[d] - bounds.lo[d];
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        double v = cfg.inertia * vel[p][d] +
                   cfg.cognitive * r1 * (personal[p][d] - pos[p][d]) +
                   cfg.social * r2 * (res.params[d] - pos[p][d]);
        v = std::clamp(v, -range, range);
        double x = pos[p][d] + v;
        if (x < bounds.lo[d] || x > bounds.hi[d]) {
          x = std::clamp(x, bounds.lo[d], bounds.hi[d]);
          v = 0.0;
        }
        vel[p][d] = v;
        pos[p][d] = x;
      }
      const double c = evaluate(pos[p]);
      ++res.evaluations;
      if (c < personal_cost[p]) {
        personal_cost[p] = c;
        personal[p] = pos[p];
      }
      if (c < res.cost) {
        res.cost = c;
        res.params = pos[p];
      }
    }
    ++res.iterations;
    res.history.push_back(res.cost);
  }
  return res;
}

}  // namespace riskmon
