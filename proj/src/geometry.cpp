#include "riskmon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace riskmon {

double iou(const Object25D& a, const Object25D& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double iog(const Object25D& p, const Object25D& g) {
  const double ga = g.area();
  return ga > 0.0 ? intersection_area(p, g) / ga : 0.0;
}

double rdd(double d_p, double d_s) {
  return std::clamp((d_p - d_s) / d_s, -1.0, 1.0);
}

double dr(double d_p, double d_g) { return std::min(1.0, d_g / d_p); }

std::array<std::array<double, 3>, 8> Box3D::corners() const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const double hl = 0.5 * size[0];
  const double hw = 0.5 * size[1];
  const double hh = 0.5 * size[2];
  std::array<std::array<double, 3>, 8> out{};
  int i = 0;
  for (double sl : {-1.0, 1.0})
    for (double sw : {-1.0, 1.0})
      for (double sh : {-1.0, 1.0}) {
        const double lx = sl * hl;  // heading
        const double lz = sw * hw;  // lateral
        out[i++] = {center[0] + c * lx + s * lz, center[1] + sh * hh,
                    center[2] - s * lx + c * lz};
      }
  return out;
}

void CameraModel::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw std::invalid_argument("camera: focal lengths must be > 0");
  if (width <= 0 || height <= 0) throw std::invalid_argument("camera: image size must be > 0");
  if (cx < 0.0 || cy < 0.0 || cx > width || cy > height)
    throw std::invalid_argument("camera: principal point outside the image");
}

double closest_distance(const Box3D& box) {
  // Express the origin in the box's local frame, then clamp into its extents.
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double rx = -box.center[0];
  const double ry = -box.center[1];
  const double rz = -box.center[2];
  const double local_l = c * rx - s * rz;
  const double local_w = s * rx + c * rz;
  const double dl = local_l - std::clamp(local_l, -0.5 * box.size[0], 0.5 * box.size[0]);
  const double dw = local_w - std::clamp(local_w, -0.5 * box.size[1], 0.5 * box.size[1]);
  const double dh = ry - std::clamp(ry, -0.5 * box.size[2], 0.5 * box.size[2]);
  return std::sqrt(dl * dl + dw * dw + dh * dh);
}

std::optional<Object25D> project_box3d(const Box3D& box, const CameraModel& cam) {
  double u0 = std::numeric_limits<double>::infinity();
  double v0 = u0;
  double u1 = -u0;
  double v1 = -u0;
  bool any = false;
  for (const auto& p : box.corners()) {
    if (p[2] <= kNearPlane) continue;
    any = true;
    const double u = cam.fx * p[0] / p[2] + cam.cx;
    const double v = cam.fy * p[1] / p[2] + cam.cy;
    u0 = std::min(u0, u);
    u1 = std::max(u1, u);
    v0 = std::min(v0, v);
    v1 = std::max(v1, v);
  }
  if (!any) return std::nullopt;
  u0 = std::clamp(u0, 0.0, static_cast<double>(cam.width));
  u1 = std::clamp(u1, 0.0, static_cast<double>(cam.width));
  v0 = std::clamp(v0, 0.0, static_cast<double>(cam.height));
  v1 = std::clamp(v1, 0.0, static_cast<double>(cam.height));
  if (!(u1 > u0 && v1 > v0)) return std::nullopt;
  const double d = closest_distance(box);
  if (!(d > 0.0)) return std::nullopt;
  return Object25D{0.5 * (u0 + u1), 0.5 * (v0 + v1), u1 - u0, v1 - v0, d};
}

}  // namespace riskmon
