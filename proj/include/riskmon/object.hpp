#pragma once

#include <algorithm>
#include <vector>

namespace riskmon {

/// A 2.5D object: an image-plane box (center, extents in pixels) plus the
/// distance of its closest point in meters.
struct Object25D {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double d = 0.0;

  double left() const { return cx - 0.5 * w; }
  double right() const { return cx + 0.5 * w; }
  double top() const { return cy - 0.5 * h; }
  double bottom() const { return cy + 0.5 * h; }
  double area() const { return w * h; }

  bool operator==(const Object25D&) const = default;
};

using ObjectList = std::vector<Object25D>;

/// Builds an object from inclusive integer pixel extents [x0, x1] x [y0, y1].
inline Object25D object_from_pixel_extents(int x0, int y0, int x1, int y1,
                                           double d) {
  return Object25D{0.5 * (x0 + x1), 0.5 * (y0 + y1),
                   static_cast<double>(x1 - x0 + 1),
                   static_cast<double>(y1 - y0 + 1), d};
}

inline double intersection_area(const Object25D& a, const Object25D& b) {
  const double ix = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  return ix * iy;
}

}  // namespace riskmon
