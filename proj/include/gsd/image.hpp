#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gsd {

/// Row-major float image with `Channels` straight (non-premultiplied)
/// channels per pixel, values in [0, 1].
template <int Channels>
struct Image {
  static constexpr int kChannels = Channels;

  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * Channels, 0.0f) {}

  float* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * Channels; }
  const float* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * Channels;
  }
};

using ImageRGBA = Image<4>;
using ImageRGB = Image<3>;

/// Binary mask, one byte per pixel (0 or 1).
struct MaskImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  MaskImage() = default;
  MaskImage(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count() const;
};

// 8-bit PNG I/O. Reading converts any PNG to the requested layout.
ImageRGBA read_png_rgba(const std::string& path);
ImageRGB read_png_rgb(const std::string& path);
void write_png(const std::string& path, const ImageRGBA& image);
void write_png(const std::string& path, const ImageRGB& image);
/// Single-channel PNG with values 0 / 255.
void write_png(const std::string& path, const MaskImage& mask);
MaskImage read_png_mask(const std::string& path);

}  // namespace gsd
