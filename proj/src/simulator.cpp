#include "riskmon/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "riskmon/synthetic.hpp"

namespace riskmon {

void ScenarioConfig::validate() const {
  if (!(ego_speed0 > 0.0 && obstacle_distance0 > 0.0 && decel > 0.0 && dt > 0.0))
    throw std::invalid_argument("scenario: speed, distance, decel and dt must be > 0");
  if (!(detector_miss_prob >= 0.0 && detector_miss_prob <= 1.0))
    throw std::invalid_argument("scenario: detector_miss_prob must lie in [0, 1]");
  if (!(detector_depth_noise >= 0.0))
    throw std::invalid_argument("scenario: detector_depth_noise must be >= 0");
  if (!(shield_threshold >= 0.0 && shield_threshold <= 1.0))
    throw std::invalid_argument("scenario: shield_threshold must lie in [0, 1]");
  if (horizon < 1) throw std::invalid_argument("scenario: horizon must be >= 1");
  if (!(obstacle_width > 0.0 && obstacle_height > ground_clearance && ground_clearance >= 0.0))
    throw std::invalid_argument("scenario: invalid obstacle geometry");
}

ScenarioState initial_state(const ScenarioConfig& cfg) {
  ScenarioState s;
  s.ego_vel = cfg.ego_speed0;
  s.obstacle_pos = cfg.obstacle_distance0;
  s.obstacle_lat = cfg.lateral_offset0;
  return s;
}

DepthMap road_depth(const SensorModel& sensor) {
  const CameraModel& cam = sensor.camera;
  DepthMap map(cam.width, cam.height);
  for (int v = 0; v < cam.height; ++v) {
    const double below = v - cam.cy;
    const double z = below > 0.0 ? std::min(sensor.max_range, cam.fy * sensor.mount_height / below)
                                 : sensor.max_range;
    for (int u = 0; u < cam.width; ++u) map.at(u, v) = static_cast<float>(z);
  }
  return map;
}

SensorFrame synth_frame(const ScenarioState& state, const ScenarioConfig& cfg,
                        const SensorModel& sensor, Rng& rng) {
  const CameraModel& cam = sensor.camera;
  SensorFrame frame;
  frame.depth = road_depth(sensor);

  const bool missed = rng.bernoulli(cfg.detector_miss_prob);
  const double noise = std::clamp(rng.normal(), -3.0, 3.0) * cfg.detector_depth_noise;

  const double gap = state.gap();
  if (!(gap > 0.0) || gap > sensor.max_range) return frame;

  const double u0 = cam.cx + cam.fx * (state.obstacle_lat - 0.5 * cfg.obstacle_width) / gap;
  const double u1 = cam.cx + cam.fx * (state.obstacle_lat + 0.5 * cfg.obstacle_width) / gap;
  const double v0 = cam.cy + cam.fy * (sensor.mount_height - cfg.obstacle_height) / gap;
  const double v1 = cam.cy + cam.fy * (sensor.mount_height - cfg.ground_clearance) / gap;
  RectObject rect;
  rect.x0 = std::max(0, static_cast<int>(std::ceil(u0)));
  rect.x1 = std::min(cam.width - 1, static_cast<int>(std::floor(u1)));
  rect.y0 = std::max(0, static_cast<int>(std::ceil(v0)));
  rect.y1 = std::min(cam.height - 1, static_cast<int>(std::floor(v1)));
  rect.depth = gap;
  if (rect.x0 > rect.x1 || rect.y0 > rect.y1) return frame;

  frame.depth = render_rectangles(std::move(frame.depth), {rect});
  const Object25D truth = rect.object();
  frame.ground_truths.push_back(truth);
  if (!missed) {
    Object25D pred = truth;
    pred.d = gap * (1.0 + noise);
    frame.predictions.push_back(pred);
  }
  return frame;
}

ScenarioState step(const ScenarioState& state, double accel, const ScenarioConfig& cfg) {
  ScenarioState next = state;
  next.t = state.t + cfg.dt;
  next.ego_vel = std::max(0.0, state.ego_vel + accel * cfg.dt);
  next.ego_pos = state.ego_pos + next.ego_vel * cfg.dt;
  if (cfg.obstacle_kind == ObstacleKind::kCrossing)
    next.obstacle_lat = state.obstacle_lat + cfg.lateral_speed * cfg.dt;
  const bool in_lane =
      std::abs(next.obstacle_lat) < 0.5 * (cfg.ego_width + cfg.obstacle_width);
  // Once the ego has passed the obstacle, a later gap <= 0 is not a new impact.
  const bool reached = next.gap() <= 0.0 && state.gap() > 0.0;
  if (reached && next.ego_vel > 0.0 && in_lane) next.collided = true;
  next.collided = next.collided || state.collided;
  return next;
}

double Shield::command(double risk, double ego_vel) {
  if (latched_ && ego_vel <= 0.0) latched_ = false;
  if (!latched_ && risk > threshold_ && ego_vel > 0.0) latched_ = true;
  return latched_ ? -decel_ : 0.0;
}

ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const FISConfig& fis,
                             const RetrievalConfig& retrieval, const MatchThresholds& t,
                             const SensorModel& sensor) {
  cfg.validate();
  retrieval.validate();
  t.validate();
  const InferenceEngine engine(fis);
  const std::array<DepthMap, 1> road{invert(road_depth(sensor), retrieval.invert_epsilon)};
  const DepthMap mean_inv = mean_inverse_map(road);

  Rng rng(cfg.seed);
  Shield shield(cfg);
  ScenarioState state = initial_state(cfg);
  ScenarioOutcome out;
  out.min_gap = state.gap();

  for (int k = 0; k < cfg.horizon; ++k) {
    const SensorFrame frame = synth_frame(state, cfg, sensor, rng);
    const ObjectList refs = retrieve_safety_critical(frame.depth, mean_inv, retrieval);
    const AlignmentResult a = align_frame(frame.predictions, refs, t);
    const std::array<double, 2> x{a.mean_rdd, a.mean_iou};
    state.risk = engine(x);
    out.risk_trace.push_back(state.risk);

    const double accel = cfg.shield_enabled ? shield.command(state.risk, state.ego_vel) : 0.0;
    state.shield_active = accel < 0.0;
    out.shield_triggered = out.shield_triggered || state.shield_active;

    const bool ahead = state.gap() > 0.0;
    state = step(state, accel, cfg);
    if (ahead) out.min_gap = std::min(out.min_gap, state.gap());
    if (state.collided) {
      out.collided = true;
      break;
    }
    if (state.ego_vel <= 0.0) {
      out.stop_time = state.t;
      break;
    }
  }
  return out;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& base, const SweepConfig& sweep,
                                const FISConfig& fis, const RetrievalConfig& retrieval,
                                const MatchThresholds& t, const SensorModel& sensor) {
  std::vector<SweepRow> rows;
  for (int i = 0; i < sweep.runs; ++i) {
    ScenarioConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(i);
    Rng draw(cfg.seed ^ 0x5DEECE66Dull);
    cfg.ego_speed0 = draw.uniform(sweep.speed_min, sweep.speed_max);
    cfg.obstacle_distance0 = draw.uniform(sweep.gap_min, sweep.gap_max);
    const bool crossing = draw.bernoulli(sweep.crossing_fraction);
    if (crossing) {
      // Walks in from the left and reaches the lane center as the ego arrives.
      cfg.obstacle_kind = ObstacleKind::kCrossing;
      cfg.lateral_offset0 = -4.0;
      cfg.lateral_speed = 4.0 / (cfg.obstacle_distance0 / cfg.ego_speed0);
    } else {
      cfg.obstacle_kind = ObstacleKind::kStatic;
    }
    rows.push_back({cfg.seed, run_scenario(cfg, fis, retrieval, t, sensor)});
  }
  return rows;
}

}  // namespace riskmon
