#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "riskmon/alignment.hpp"
#include "riskmon/depth.hpp"
#include "riskmon/fuzzy.hpp"
#include "riskmon/geometry.hpp"
#include "riskmon/random.hpp"
#include "riskmon/retrieval.hpp"

namespace riskmon {

enum class ObstacleKind { kStatic, kCrossing };

struct ScenarioConfig {
  double ego_speed0 = 10.0;
  double obstacle_distance0 = 40.0;
  ObstacleKind obstacle_kind = ObstacleKind::kStatic;
  double detector_miss_prob = 0.0;
  double detector_depth_noise = 0.05;  ///< relative std, truncated at 3 sigma
  double shield_threshold = 0.5;
  double decel = 4.0;
  double dt = 0.1;
  int horizon = 200;
  std::uint64_t seed = 0;
  bool shield_enabled = true;

  // Obstacle geometry. The body spans [ground_clearance, obstacle_height]
  // above the road.
  double obstacle_width = 1.8;
  double obstacle_height = 1.8;
  double ground_clearance = 0.3;
  double ego_width = 1.8;
  double lateral_offset0 = 0.0;  ///< obstacle lateral position at t = 0
  double lateral_speed = 0.0;    ///< crossing obstacles only

  void validate() const;
};

/// Forward-looking pinhole sensor mounted above a flat road.
struct SensorModel {
  CameraModel camera{120.0, 120.0, 80.0, 60.0, 160, 120};
  double mount_height = 1.5;
  double max_range = 80.0;
};

struct ScenarioState {
  double t = 0.0;
  double ego_pos = 0.0;
  double ego_vel = 0.0;
  double obstacle_pos = 0.0;
  double obstacle_lat = 0.0;
  double risk = 0.0;
  bool shield_active = false;
  bool collided = false;

  double gap() const { return obstacle_pos - ego_pos; }
};

ScenarioState initial_state(const ScenarioConfig& cfg);

struct SensorFrame {
  DepthMap depth;
  ObjectList predictions;
  ObjectList ground_truths;
};

/// Road-only depth raster for the sensor (sky beyond max_range).
DepthMap road_depth(const SensorModel& sensor);

/// Renders the depth map with the obstacle, its ground truth, and detector
/// predictions (ground truth with perturbed depth, dropped with the miss
/// probability).
SensorFrame synth_frame(const ScenarioState& state, const ScenarioConfig& cfg,
                        const SensorModel& sensor, Rng& rng);

/// Kinematic update; velocity is clamped at zero and collisions latch.
ScenarioState step(const ScenarioState& state, double accel, const ScenarioConfig& cfg);

/// Deceleration shield that stays engaged until the ego stands still.
class Shield {
 public:
  explicit Shield(const ScenarioConfig& cfg) : threshold_(cfg.shield_threshold), decel_(cfg.decel) {}

  /// Acceleration command for the current risk.
  double command(double risk, double ego_vel);
  bool engaged() const { return latched_; }

 private:
  double threshold_;
  double decel_;
  bool latched_ = false;
};

struct ScenarioOutcome {
  bool collided = false;
  double min_gap = 0.0;
  std::optional<double> stop_time;
  bool shield_triggered = false;
  std::vector<double> risk_trace;
};

/// Per step: render, retrieve, align detector predictions against the
/// retrieved objects, infer risk, shield, advance. Ends at the horizon, on
/// standstill, or on collision.
ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const FISConfig& fis,
                             const RetrievalConfig& retrieval, const MatchThresholds& t,
                             const SensorModel& sensor = {});

struct SweepConfig {
  int runs = 100;
  double speed_min = 6.0;
  double speed_max = 10.0;
  double gap_min = 30.0;
  double gap_max = 60.0;
  double crossing_fraction = 0.0;
};

struct SweepRow {
  std::uint64_t seed = 0;
  ScenarioOutcome outcome;
};

/// Runs `sweep.runs` scenarios; run i uses seed base.seed + i and draws its
/// speed, distance and obstacle kind from that seed.
std::vector<SweepRow> run_sweep(const ScenarioConfig& base, const SweepConfig& sweep,
                                const FISConfig& fis, const RetrievalConfig& retrieval,
                                const MatchThresholds& t, const SensorModel& sensor = {});

}  // namespace riskmon
