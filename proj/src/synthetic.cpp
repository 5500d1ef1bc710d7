#include "riskmon/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "riskmon/random.hpp"

namespace riskmon {

DepthMap ground_ramp(int width, int height, double near_depth, double far_depth) {
  if (width < 1 || height < 2 || !(near_depth > 0.0) || !(far_depth > near_depth))
    throw std::invalid_argument("ground_ramp: invalid geometry");
  DepthMap map(width, height);
  const double inv_far = 1.0 / far_depth;
  const double inv_near = 1.0 / near_depth;
  for (int y = 0; y < height; ++y) {
    const double inv = inv_far + (inv_near - inv_far) * y / (height - 1);
    const auto d = static_cast<float>(1.0 / inv);
    for (int x = 0; x < width; ++x) map.at(x, y) = d;
  }
  return map;
}

DepthMap render_rectangles(DepthMap background, const std::vector<RectObject>& rects) {
  for (const RectObject& r : rects) {
    const auto d = static_cast<float>(r.depth);
    for (int y = std::max(0, r.y0); y <= std::min(background.height - 1, r.y1); ++y)
      for (int x = std::max(0, r.x0); x <= std::min(background.width - 1, r.x1); ++x)
        background.at(x, y) = std::min(background.at(x, y), d);
  }
  return background;
}

ObjectList SyntheticScene::objects() const {
  ObjectList out;
  for (const RectObject& r : rects) out.push_back(r.object());
  return out;
}

SyntheticScene generate_scene(const SceneConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  SyntheticScene scene;
  const DepthMap ground = ground_ramp(cfg.width, cfg.height, cfg.near_depth, cfg.far_depth);
  const double inv_far = 1.0 / cfg.far_depth;
  const double inv_step = (1.0 / cfg.near_depth - inv_far) / (cfg.height - 1);

  const auto count = rng.uniform_int(cfg.min_objects, cfg.max_objects);
  for (std::int64_t n = 0; n < count; ++n) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      RectObject r;
      r.depth = rng.uniform(cfg.min_object_depth, cfg.max_object_depth);
      const int w = static_cast<int>(rng.uniform_int(cfg.min_size, cfg.max_size));
      const int h = static_cast<int>(rng.uniform_int(cfg.min_size, cfg.max_size));
      // Lowest admissible bottom row keeps the ground behind it far enough.
      const double inv_limit = 1.0 / (cfg.clearance_factor * r.depth);
      const int y_max = std::min(cfg.height - 1 - cfg.border,
                                 static_cast<int>(std::floor((inv_limit - inv_far) / inv_step)));
      const int y_min = cfg.border + h - 1;
      if (y_max < y_min) continue;
      r.y1 = static_cast<int>(rng.uniform_int(y_min, y_max));
      r.y0 = r.y1 - h + 1;
      r.x0 = static_cast<int>(rng.uniform_int(cfg.border, cfg.width - 1 - cfg.border - (w - 1)));
      r.x1 = r.x0 + w - 1;

      const bool clear = std::none_of(scene.rects.begin(), scene.rects.end(), [&](const RectObject& o) {
        return r.x0 <= o.x1 + cfg.separation && o.x0 <= r.x1 + cfg.separation &&
               r.y0 <= o.y1 + cfg.separation && o.y0 <= r.y1 + cfg.separation;
      });
      if (!clear) continue;
      scene.rects.push_back(r);
      break;
    }
  }
  scene.depth = render_rectangles(ground, scene.rects);
  return scene;
}

DepthMap scene_mean_map(const SceneConfig& cfg, int frames) {
  const DepthMap inv = invert(ground_ramp(cfg.width, cfg.height, cfg.near_depth, cfg.far_depth));
  const std::vector<DepthMap> maps(static_cast<std::size_t>(std::max(1, frames)), inv);
  return mean_inverse_map(maps);
}

namespace {

constexpr double kImageWidth = 320.0;
constexpr double kImageHeight = 240.0;

Object25D jitter(const Object25D& o, double box_sigma, double depth_sigma, Rng& rng) {
  // Draw all variates unconditionally so streams stay aligned across noise levels.
  const double nx = rng.normal(), ny = rng.normal(), nw = rng.normal(), nh = rng.normal();
  const double nd = rng.normal();
  Object25D out = o;
  out.cx += box_sigma * o.w * nx;
  out.cy += box_sigma * o.h * ny;
  out.w *= std::exp(0.5 * box_sigma * nw);
  out.h *= std::exp(0.5 * box_sigma * nh);
  out.d *= std::max(0.2, 1.0 + depth_sigma * nd);
  return out;
}

}  // namespace

std::vector<EvalFrame> generate_eval_frames(const PerturbationConfig& cfg, std::uint64_t seed) {
  Rng scene_rng(seed);
  Rng detector_rng(seed ^ 0x9E3779B97F4A7C15ull);
  Rng retrieval_rng(seed ^ 0xC2B2AE3D27D4EB4Full);

  std::vector<EvalFrame> frames;
  frames.reserve(cfg.frames);
  for (std::size_t f = 0; f < cfg.frames; ++f) {
    EvalFrame frame;
    frame.frame_id = cfg.condition + "-" + std::to_string(f);
    frame.condition = cfg.condition;

    const auto count = scene_rng.uniform_int(cfg.min_objects, cfg.max_objects);
    for (std::int64_t n = 0; n < count; ++n) {
      for (int attempt = 0; attempt < 50; ++attempt) {
        Object25D g;
        g.w = scene_rng.uniform(20.0, 70.0);
        g.h = scene_rng.uniform(20.0, 70.0);
        g.cx = scene_rng.uniform(0.5 * g.w, kImageWidth - 0.5 * g.w);
        g.cy = scene_rng.uniform(0.5 * g.h, kImageHeight - 0.5 * g.h);
        g.d = scene_rng.uniform(3.0, 20.0);
        const bool clear = std::none_of(
            frame.ground_truths.begin(), frame.ground_truths.end(),
            [&](const Object25D& o) { return intersection_area(o, g) > 0.0; });
        if (!clear) continue;
        frame.ground_truths.push_back(g);
        break;
      }
    }

    const double quality = detector_rng.uniform();
    const double miss = cfg.fixed_miss_prob >= 0.0 ? cfg.fixed_miss_prob
                                                   : cfg.max_miss_prob * quality;
    for (const Object25D& g : frame.ground_truths) {
      const bool missed = detector_rng.bernoulli(miss);
      const Object25D p =
          jitter(g, quality * cfg.max_box_jitter, quality * cfg.max_depth_jitter, detector_rng);
      if (!missed) frame.predictions.push_back(p);
      frame.retrieved.push_back(
          jitter(g, cfg.retrieval_noise * 0.25, cfg.retrieval_noise * 0.25, retrieval_rng));
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace riskmon
