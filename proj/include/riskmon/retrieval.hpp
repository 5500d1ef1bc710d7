#pragma once

#include <vector>

#include "riskmon/depth.hpp"
#include "riskmon/object.hpp"

namespace riskmon {

struct RetrievalConfig {
  double canny_low = 20.0;
  double canny_high = 60.0;
  double min_box_area = 64.0;
  double max_depth = 20.0;
  int blur_radius = 2;
  double invert_epsilon = kDefaultInvertEpsilon;

  /// Throws std::invalid_argument when the thresholds or limits are inconsistent.
  void validate() const;
};

struct Pixel {
  int x = 0;
  int y = 0;
  bool operator==(const Pixel&) const = default;
};

using PixelChain = std::vector<Pixel>;

/// Gaussian blur, Sobel gradients, non-maximum suppression and hysteresis.
/// Gradient magnitudes are raw Sobel responses on the [0, 255] scale.
EdgeMask canny_edges(const IntensityImage& img, const RetrievalConfig& cfg);

/// Maximal 8-connected components of edge pixels, in scan order of their
/// first pixel.
std::vector<PixelChain> trace_contours(const EdgeMask& mask);

/// Tight axis-aligned box per chain with d taken as the minimum of the metric
/// depth map inside the box. Boxes that are too small, too far, or enclosed
/// by another box are dropped.
ObjectList fit_boxes(const std::vector<PixelChain>& chains, const DepthMap& depth,
                     const RetrievalConfig& cfg);

/// invert -> subtract_foreground -> normalize -> canny -> contours -> boxes.
ObjectList retrieve_safety_critical(const DepthMap& raw, const DepthMap& mean_inv,
                                    const RetrievalConfig& cfg);

}  // namespace riskmon
