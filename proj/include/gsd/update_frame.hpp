#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "gsd/splat_io.hpp"

namespace gsd::service {

inline constexpr std::array<std::uint8_t, 4> kFrameMagic = {'G', 'S', 'U', 'P'};
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 4 + 1 + 8 + 4;

/// Binary update frame, little-endian:
///   "GSUP" | version u8 | revision u64 | count u32 |
///   count x (x, y, z) f32 | count x (w, x, y, z) f32
std::vector<std::uint8_t> encode_update_frame(std::uint64_t revision, const GaussianCloud& cloud);

struct UpdateFrame {
  std::uint8_t version = 0;
  std::uint64_t revision = 0;
  std::vector<std::array<float, 3>> centers;
  std::vector<std::array<float, 4>> rotations;
};

/// Throws FormatError on bad magic, unknown version or a length mismatch.
UpdateFrame decode_update_frame(std::span<const std::uint8_t> bytes);

}  // namespace gsd::service
