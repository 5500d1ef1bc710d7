#include "riskmon/depth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace riskmon {
namespace {

constexpr char kMagic[4] = {'D', 'M', '0', '1'};

std::uint32_t read_u32_le(const std::byte* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
}

}  // namespace

DepthMap decode_depth_map(std::span<const std::byte> bytes) {
  if (bytes.size() < 12) throw FormatError("depth map: truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("depth map: bad magic (expected DM01)");
  const std::uint32_t w = read_u32_le(bytes.data() + 4);
  const std::uint32_t h = read_u32_le(bytes.data() + 8);
  const std::uint64_t count = static_cast<std::uint64_t>(w) * h;
  if (w > 1u << 20 || h > 1u << 20 || bytes.size() - 12 != count * 4)
    throw FormatError("depth map: payload size does not match " +
                      std::to_string(w) + "x" + std::to_string(h));

  std::vector<float> values(count);
  const std::byte* p = bytes.data() + 12;
  for (std::uint64_t i = 0; i < count; ++i, p += 4) {
    const float v = std::bit_cast<float>(read_u32_le(p));
    if (!std::isfinite(v) || v <= 0.0f)
      throw FormatError("depth map: non-finite or non-positive value at index " +
                        std::to_string(i));
    values[i] = v;
  }
  return DepthMap(static_cast<int>(w), static_cast<int>(h), std::move(values));
}

std::vector<std::byte> encode_depth_map(const DepthMap& map) {
  std::vector<std::byte> out;
  out.reserve(12 + map.data.size() * 4);
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  write_u32_le(out, static_cast<std::uint32_t>(map.width));
  write_u32_le(out, static_cast<std::uint32_t>(map.height));
  for (float v : map.data) write_u32_le(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

DepthMap load_depth_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open depth map: " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  try {
    return decode_depth_map(std::as_bytes(std::span<const char>(raw)));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_depth_map(const DepthMap& map, const std::filesystem::path& path) {
  const auto bytes = encode_depth_map(map);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write depth map: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

DepthMap invert(const DepthMap& map, double epsilon) {
  DepthMap out(map.width, map.height);
  std::transform(map.data.begin(), map.data.end(), out.data.begin(), [&](float v) {
    return static_cast<float>(1.0 / std::max(static_cast<double>(v), epsilon));
  });
  return out;
}

IntensityImage normalize(const DepthMap& map) {
  IntensityImage out(map.width, map.height, 0.0f);
  if (map.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(map.data.begin(), map.data.end());
  const double lo = *lo_it;
  const double range = static_cast<double>(*hi_it) - lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < map.data.size(); ++i)
    out.data[i] = static_cast<float>((map.data[i] - lo) * 255.0 / range);
  return out;
}

DepthMap mean_inverse_map(std::span<const DepthMap> maps) {
  if (maps.empty()) throw std::invalid_argument("mean_inverse_map: no maps");
  const DepthMap& first = maps.front();
  std::vector<double> acc(first.data.size(), 0.0);
  for (const DepthMap& m : maps) {
    if (!m.same_shape(first))
      throw std::invalid_argument("mean_inverse_map: dimension mismatch");
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += m.data[i];
  }
  DepthMap out(first.width, first.height);
  const double n = static_cast<double>(maps.size());
  for (std::size_t i = 0; i < acc.size(); ++i)
    out.data[i] = static_cast<float>(acc[i] / n);
  return out;
}

DepthMap subtract_foreground(const DepthMap& inv, const DepthMap& mean) {
  if (!inv.same_shape(mean))
    throw std::invalid_argument("subtract_foreground: dimension mismatch");
  DepthMap out(inv.width, inv.height);
  for (std::size_t i = 0; i < inv.data.size(); ++i)
    out.data[i] = std::max(0.0f, inv.data[i] - mean.data[i]);
  return out;
}

}  // namespace riskmon
