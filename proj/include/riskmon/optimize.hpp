#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace riskmon {

using Objective = std::function<double(std::span<const double>)>;

struct Bounds {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dims() const { return lo.size(); }
  void validate() const;
};

struct OptimizationResult {
  std::vector<double> params;
  double cost = 0.0;
  int iterations = 0;
  long evaluations = 0;
  std::vector<double> history;  ///< best cost after each iteration
};

struct PatternSearchConfig {
  int max_iterations = 1000;
  double initial_mesh = 0.05;  ///< fraction of each coordinate's bound width
  double min_mesh = 1e-6;
  double expansion = 2.0;
  double contraction = 0.5;
};

/// Generalized coordinate pattern search with a complete poll: every
/// coordinate is probed at +/- mesh, the best improving point is taken, and
/// the mesh expands on success and contracts on failure. Poll points are
/// clamped into the bounds; non-finite objective values are skipped.
OptimizationResult pattern_search(const Objective& objective, std::span<const double> init,
                                  const Bounds& bounds, const PatternSearchConfig& cfg);

struct SwarmConfig {
  int swarm_size = 100;
  int iterations = 20;  ///< generations, the initial one included
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  std::uint64_t seed = 0;
};

/// Canonical global-best particle swarm. `seeds` are injected as the first
/// particles; the rest start uniformly in the bounds.
OptimizationResult particle_swarm(const Objective& objective, const Bounds& bounds,
                                  const SwarmConfig& cfg,
                                  std::span<const std::vector<double>> seeds = {});

}  // namespace riskmon
