#include <cmath>

#include "doctest.h"
#include "riskmon/optimize.hpp"

using namespace riskmon;

TEST_CASE("pattern search finds a one-dimensional minimum") {
  const Objective f = [](std::span<const double> x) { return (x[0] - 2) * (x[0] - 2); };
  const std::vector<double> init{0.0};
  const auto r = pattern_search(f, init, {{-10}, {10}}, {});
  CHECK(std::abs(r.params[0] - 2) <= 1e-4);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1]);
}

TEST_CASE("pattern search keeps the start on a flat objective") {
  const Objective f = [](std::span<const double>) { return 1.0; };
  const std::vector<double> init{0.3, -0.7};
  const auto r = pattern_search(f, init, {{-1, -1}, {1, 1}}, {});
  CHECK(r.params == init);
  CHECK(r.cost == 1.0);
}

TEST_CASE("pattern search stays in bounds and skips non-finite values") {
  const Objective f = [](std::span<const double> x) {
    return x[0] > 0.5 ? std::numeric_limits<double>::infinity() : -x[0];
  };
  const std::vector<double> init{0.0};
  const auto r = pattern_search(f, init, {{-1}, {1}}, {});
  CHECK(r.params[0] <= 0.5);
  CHECK(r.params[0] > 0.49);
}

TEST_CASE("particle swarm on the sphere") {
  const Objective sphere = [](std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v * v;
    return s;
  };
  const Bounds b{{-5, -5, -5}, {5, 5, 5}};
  SwarmConfig cfg;
  cfg.seed = 9;
  cfg.iterations = 60;
  const auto r = particle_swarm(sphere, b, cfg);
  CHECK(r.cost <= 1e-3);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1]);
  for (std::size_t d = 0; d < 3; ++d) CHECK(std::abs(r.params[d]) <= 5);

  const auto again = particle_swarm(sphere, b, cfg);
  CHECK(again.params == r.params);
  CHECK(again.cost == r.cost);
}

TEST_CASE("particle swarm keeps an injected optimum") {
  const Objective f = [](std::span<const double> x) { return std::abs(x[0] - 0.123) + std::abs(x[1]); };
  const std::vector<std::vector<double>> seeds{{0.123, 0.0}};
  SwarmConfig cfg;
  cfg.iterations = 3;
  const auto r = particle_swarm(f, {{-1, -1}, {1, 1}}, cfg, seeds);
  CHECK(r.cost == 0.0);
}

TEST_CASE("bounds validation") {
  CHECK_THROWS(Bounds{{0, 1}, {1}}.validate());
  CHECK_THROWS(Bounds{{1}, {0}}.validate());
  CHECK_THROWS(Bounds{{}, {}}.validate());
}
