#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace riskmon {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major 2-D grid.
template <class T>
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Raster() = default;
  Raster(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
    if (w < 0 || h < 0) throw std::invalid_argument("negative raster size");
  }
  Raster(int w, int h, std::vector<T> values)
      : width(w), height(h), data(std::move(values)) {
    if (w < 0 || h < 0 ||
        data.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h))
      throw std::invalid_argument("raster payload does not match dimensions");
  }

  T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  bool same_shape(const Raster& o) const {
    return width == o.width && height == o.height;
  }
  bool empty() const { return data.empty(); }

  bool operator==(const Raster&) const = default;
};

/// Depth raster in meters, or an inverse-depth raster in 1/meters.
struct DepthMap : Raster<float> {
  using Raster<float>::Raster;
};

/// Intensities in [0, 255].
struct IntensityImage : Raster<float> {
  using Raster<float>::Raster;
};

struct EdgeMask : Raster<std::uint8_t> {
  using Raster<std::uint8_t>::Raster;
};

inline constexpr double kDefaultInvertEpsilon = 1e-3;

// DM01 raster files: "DM01", u32 width, u32 height, float32 payload, all LE.
DepthMap load_depth_map(const std::filesystem::path& path);
void save_depth_map(const DepthMap& map, const std::filesystem::path& path);
DepthMap decode_depth_map(std::span<const std::byte> bytes);
std::vector<std::byte> encode_depth_map(const DepthMap& map);

DepthMap invert(const DepthMap& map, double epsilon = kDefaultInvertEpsilon);

/// Linear map of [min, max] onto [0, 255]; a constant map yields zeros.
IntensityImage normalize(const DepthMap& map);

/// Pixel-wise mean of already-inverted maps.
DepthMap mean_inverse_map(std::span<const DepthMap> maps);

/// max(0, inv - mean) per pixel.
DepthMap subtract_foreground(const DepthMap& inv, const DepthMap& mean);

}  // namespace riskmon
