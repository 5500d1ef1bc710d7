#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskmon/depth.hpp"
#include "riskmon/metrics.hpp"
#include "riskmon/object.hpp"

namespace riskmon {

/// Ground-only depth raster whose inverse depth is linear in the row index,
/// from 1/far_depth at the top row to 1/near_depth at the bottom row.
DepthMap ground_ramp(int width, int height, double near_depth, double far_depth);

/// Axis-aligned rectangle with inclusive pixel extents and constant depth.
struct RectObject {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  double depth = 10.0;

  Object25D object() const { return object_from_pixel_extents(x0, y0, x1, y1, depth); }
};

/// Pastes rectangles over a background; each pixel keeps the nearer depth.
DepthMap render_rectangles(DepthMap background, const std::vector<RectObject>& rects);

struct SceneConfig {
  int width = 320;
  int height = 240;
  double near_depth = 5.0;
  double far_depth = 80.0;
  int min_objects = 1;
  int max_objects = 4;
  double min_object_depth = 5.0;
  double max_object_depth = 30.0;
  int min_size = 14;
  int max_size = 48;
  /// The ground behind a rectangle's bottom row is at least this many times
  /// farther than the rectangle.
  double clearance_factor = 1.5;
  int separation = 8;  ///< minimum pixel gap between rectangles
  int border = 4;
};

struct SyntheticScene {
  DepthMap depth;
  std::vector<RectObject> rects;

  ObjectList objects() const;
};

SyntheticScene generate_scene(const SceneConfig& cfg, std::uint64_t seed);

/// Mean inverse map of object-free frames for the scene geometry.
DepthMap scene_mean_map(const SceneConfig& cfg, int frames = 8);

/// Detector and retrieval error model for offline evaluation frames.
struct PerturbationConfig {
  std::size_t frames = 200;
  std::string condition = "nominal";
  int min_objects = 1;
  int max_objects = 5;
  /// Per-frame detector quality q ~ U(0, 1) scales these.
  double max_miss_prob = 0.5;
  double max_box_jitter = 0.4;    ///< center std as a fraction of box size
  double max_depth_jitter = 0.4;  ///< relative depth std
  /// Fixed miss probability; overrides the quality-scaled one when >= 0.
  double fixed_miss_prob = -1.0;
  /// Relative jitter applied to ground truths to produce retrieved objects.
  double retrieval_noise = 0.0;
};

/// Frames with ground truths G, detector predictions P and retrieved S.
std::vector<EvalFrame> generate_eval_frames(const PerturbationConfig& cfg, std::uint64_t seed);

}  // namespace riskmon
