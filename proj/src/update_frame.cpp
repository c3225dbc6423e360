#include "gsd/update_frame.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <string>

#include "gsd/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "update frames are encoded assuming a little-endian host");

namespace gsd::service {
namespace {

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T take(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::vector<std::uint8_t> encode_update_frame(std::uint64_t revision, const GaussianCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n > std::numeric_limits<std::uint32_t>::max()) throw ArgumentError("cloud too large for an update frame");
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderSize + n * 7 * sizeof(float));
  out.insert(out.end(), kFrameMagic.begin(), kFrameMagic.end());
  put(out, kFrameVersion);
  put(out, revision);
  put(out, static_cast<std::uint32_t>(n));
  for (const auto& c : cloud.centers)
    for (int a = 0; a < 3; ++a) put(out, static_cast<float>(c[a]));
  for (const auto& q : cloud.rotations) {
    put(out, static_cast<float>(q.w()));
    put(out, static_cast<float>(q.x()));
    put(out, static_cast<float>(q.y()));
    put(out, static_cast<float>(q.z()));
  }
  return out;
}

UpdateFrame decode_update_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderSize || !std::equal(kFrameMagic.begin(), kFrameMagic.end(), bytes.begin()))
    throw FormatError("not an update frame: bad magic or short header");
  std::size_t pos = kFrameMagic.size();
  UpdateFrame frame;
  frame.version = take<std::uint8_t>(bytes, pos);
  if (frame.version != kFrameVersion)
    throw FormatError("unsupported update frame version " + std::to_string(frame.version));
  frame.revision = take<std::uint64_t>(bytes, pos);
  const auto count = take<std::uint32_t>(bytes, pos);
  if (bytes.size() != kFrameHeaderSize + static_cast<std::size_t>(count) * 7 * sizeof(float))
    throw FormatError("update frame length does not match its count");
  frame.centers.resize(count);
  frame.rotations.resize(count);
  for (auto& c : frame.centers)
    for (float& v : c) v = take<float>(bytes, pos);
  for (auto& q : frame.rotations)
    for (float& v : q) v = take<float>(bytes, pos);
  return frame;
}

}  // namespace gsd::service
