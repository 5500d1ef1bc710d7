#include "riskmon/retrieval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace riskmon {
namespace {

// Magnitudes closer than this are ties during non-maximum suppression.
constexpr double kNmsTolerance = 1e-3;

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

std::vector<double> gaussian_blur(const IntensityImage& img, int radius) {
  const int w = img.width;
  const int h = img.height;
  std::vector<double> src(img.data.begin(), img.data.end());
  if (radius <= 0) return src;

  const double sigma = std::max(0.5, radius / 2.0);
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-(k * k) / (2.0 * sigma * sigma));
    sum += kernel[k + radius];
  }
  for (double& k : kernel) k /= sum;

  std::vector<double> tmp(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * src[y * w + clamp_index(x + k, w)];
      tmp[y * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * tmp[clamp_index(y + k, h) * w + x];
      src[y * w + x] = acc;
    }
  return src;
}

// Offsets for the eight gradient directions, counter-clockwise from +x in
// image coordinates (y grows downward, so +45 deg points to (1, 1)).
constexpr std::array<std::array<int, 2>, 8> kDirections = {{
    {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

}  // namespace

void RetrievalConfig::validate() const {
  if (!(canny_low > 0.0 && canny_low < canny_high))
    throw std::invalid_argument("retrieval: require 0 < canny_low < canny_high");
  if (!(min_box_area >= 1.0))
    throw std::invalid_argument("retrieval: min_box_area must be >= 1");
  if (!(max_depth > 0.0)) throw std::invalid_argument("retrieval: max_depth must be > 0");
  if (blur_radius < 0) throw std::invalid_argument("retrieval: blur_radius must be >= 0");
  if (!(invert_epsilon >= 0.0))
    throw std::invalid_argument("retrieval: invert_epsilon must be >= 0");
}

EdgeMask canny_edges(const IntensityImage& img, const RetrievalConfig& cfg) {
  cfg.validate();
  const int w = img.width;
  const int h = img.height;
  if (w < 3 || h < 3) throw std::invalid_argument("canny_edges: image smaller than 3x3");

  const std::vector<double> smooth = gaussian_blur(img, cfg.blur_radius);
  auto px = [&](int x, int y) {
    return smooth[clamp_index(y, h) * w + clamp_index(x, w)];
  };

  std::vector<double> mag(smooth.size());
  std::vector<std::uint8_t> dir(smooth.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      mag[y * w + x] = std::hypot(gx, gy);
      const double angle = std::atan2(gy, gx);
      const int octant =
          static_cast<int>(std::lround(angle / (std::numbers::pi / 4.0)));
      dir[y * w + x] = static_cast<std::uint8_t>((octant + 8) % 8);
    }

  auto mag_at = [&](int x, int y) {
    return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : mag[y * w + x];
  };

  // Suppression is asymmetric: on a tie straddling a step the pixel on the
  // brighter side (up the gradient) survives, so edges hug the salient region.
  std::vector<std::uint8_t> state(smooth.size(), 0);  // 0 none, 1 weak, 2 strong
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double m = mag[y * w + x];
      if (m < cfg.canny_low) continue;
      const auto [dx, dy] = kDirections[dir[y * w + x]];
      const double ahead = mag_at(x + dx, y + dy);
      const double behind = mag_at(x - dx, y - dy);
      if (!(m > ahead + kNmsTolerance && m >= behind - kNmsTolerance)) continue;
      state[y * w + x] = m >= cfg.canny_high ? 2 : 1;
    }

  EdgeMask out(w, h, 0);
  std::vector<int> stack;
  for (int i = 0; i < w * h; ++i) {
    if (state[i] != 2 || out.data[i]) continue;
    out.data[i] = 1;
    stack.push_back(i);
    while (!stack.empty()) {
      const int j = stack.back();
      stack.pop_back();
      const int jx = j % w;
      const int jy = j / w;
      for (int ny = std::max(0, jy - 1); ny <= std::min(h - 1, jy + 1); ++ny)
        for (int nx = std::max(0, jx - 1); nx <= std::min(w - 1, jx + 1); ++nx) {
          const int k = ny * w + nx;
          if (state[k] != 0 && !out.data[k]) {
            out.data[k] = 1;
            stack.push_back(k);
          }
        }
    }
  }
  return out;
}

std::vector<PixelChain> trace_contours(const EdgeMask& mask) {
  const int w = mask.width;
  const int h = mask.height;
  std::vector<std::uint8_t> seen(mask.data.size(), 0);
  std::vector<PixelChain> chains;
  std::vector<Pixel> stack;

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y) || seen[y * w + x]) continue;
      PixelChain chain;
      seen[y * w + x] = 1;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        chain.push_back(p);
        for (int ny = std::max(0, p.y - 1); ny <= std::min(h - 1, p.y + 1); ++ny)
          for (int nx = std::max(0, p.x - 1); nx <= std::min(w - 1, p.x + 1); ++nx)
            if (mask.at(nx, ny) && !seen[ny * w + nx]) {
              seen[ny * w + nx] = 1;
              stack.push_back({nx, ny});
            }
      }
      chains.push_back(std::move(chain));
    }
  return chains;
}

ObjectList fit_boxes(const std::vector<PixelChain>& chains, const DepthMap& depth,
                     const RetrievalConfig& cfg) {
  struct Extent {
    int x0, y0, x1, y1;
    bool encloses(const Extent& o) const {
      return x0 <= o.x0 && y0 <= o.y0 && x1 >= o.x1 && y1 >= o.y1;
    }
  };

  std::vector<Extent> extents;
  for (const PixelChain& chain : chains) {
    if (chain.empty()) continue;
    Extent e{chain[0].x, chain[0].y, chain[0].x, chain[0].y};
    for (const Pixel& p : chain) {
      e.x0 = std::min(e.x0, p.x);
      e.y0 = std::min(e.y0, p.y);
      e.x1 = std::max(e.x1, p.x);
      e.y1 = std::max(e.y1, p.y);
    }
    e.x0 = std::clamp(e.x0, 0, depth.width - 1);
    e.x1 = std::clamp(e.x1, 0, depth.width - 1);
    e.y0 = std::clamp(e.y0, 0, depth.height - 1);
    e.y1 = std::clamp(e.y1, 0, depth.height - 1);
    const double area = static_cast<double>(e.x1 - e.x0 + 1) * (e.y1 - e.y0 + 1);
    if (area < cfg.min_box_area) continue;
    extents.push_back(e);
  }

  ObjectList out;
  for (std::size_t i = 0; i < extents.size(); ++i) {
    const Extent& e = extents[i];
    // Keep outer contours only; identical extents keep the first occurrence.
    bool nested = false;
    for (std::size_t j = 0; j < extents.size() && !nested; ++j) {
      if (i == j || !extents[j].encloses(e)) continue;
      nested = !e.encloses(extents[j]) || j < i;
    }
    if (nested) continue;

    float d = depth.at(e.x0, e.y0);
    for (int y = e.y0; y <= e.y1; ++y)
      for (int x = e.x0; x <= e.x1; ++x) d = std::min(d, depth.at(x, y));
    if (d > cfg.max_depth) continue;
    out.push_back(object_from_pixel_extents(e.x0, e.y0, e.x1, e.y1, d));
  }
  return out;
}

ObjectList retrieve_safety_critical(const DepthMap& raw, const DepthMap& mean_inv,
                                    const RetrievalConfig& cfg) {
  cfg.validate();
  const DepthMap inv = invert(raw, cfg.invert_epsilon);
  const DepthMap salient = subtract_foreground(inv, mean_inv);
  const EdgeMask edges = canny_edges(normalize(salient), cfg);
  return fit_boxes(trace_contours(edges), raw, cfg);
}

}  // namespace riskmon
