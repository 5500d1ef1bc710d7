#pragma once

#include <array>
#include <optional>

#include "riskmon/object.hpp"

namespace riskmon {

/// Intersection over union of the image-plane boxes.
double iou(const Object25D& a, const Object25D& b);

/// Intersection over the area of `g`.
double iog(const Object25D& p, const Object25D& g);

/// Relative depth discrepancy min(1, (d_p - d_s) / d_s), clamped below at -1.
double rdd(double d_p, double d_s);

/// Distance ratio min(1, d_g / d_p).
double dr(double d_p, double d_g);

/// Oriented 3-D box in the camera frame (x right, y down, z forward).
/// `yaw` rotates about the camera's vertical (y) axis; `size` is
/// (length along the heading, width, height).
struct Box3D {
  std::array<double, 3> center{};
  std::array<double, 3> size{1.0, 1.0, 1.0};
  double yaw = 0.0;
  double score = 1.0;

  std::array<std::array<double, 3>, 8> corners() const;
};

struct CameraModel {
  double fx = 100.0;
  double fy = 100.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;
};

inline constexpr double kNearPlane = 0.1;

/// Euclidean distance from the camera origin to the closest point of the box.
double closest_distance(const Box3D& box);

/// Projects the corners in front of the near plane and returns their tight
/// 2-D box clipped to the image, with d = closest_distance(box). Returns
/// nullopt when the box is behind the camera or entirely outside the image.
std::optional<Object25D> project_box3d(const Box3D& box, const CameraModel& cam);

}  // namespace riskmon
