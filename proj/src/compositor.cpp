#include "gsd/compositor.hpp"

#include <string>

#include "gsd/errors.hpp"

namespace gsd {

ImageRGB alpha_composite(const ImageRGBA& fg, const ImageRGB& bg) {
  if (fg.width != bg.width || fg.height != bg.height)
    throw ArgumentError("alpha_composite: foreground is " + std::to_string(fg.width) + "x" +
                        std::to_string(fg.height) + ", background is " + std::to_string(bg.width) +
                        "x" + std::to_string(bg.height));
  ImageRGB out(bg.width, bg.height);
  for (int y = 0; y < bg.height; ++y) {
    for (int x = 0; x < bg.width; ++x) {
      const float* f = fg.at(x, y);
      const float* b = bg.at(x, y);
      float* o = out.at(x, y);
      const float a = f[3];
      for (int c = 0; c < 3; ++c) o[c] = a * f[c] + (1.0f - a) * b[c];
    }
  }
  return out;
}

std::vector<float> alpha_channel(const ImageRGBA& image) {
  std::vector<float> alpha(static_cast<std::size_t>(image.width) * image.height);
  for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = image.pixels[i * 4 + 3];
  return alpha;
}

MaskImage boundary_mask(const std::vector<float>& alpha, int width, int height, double threshold,
                        int radius) {
  if (radius < 0) throw ArgumentError("boundary_mask: radius must be >= 0");
  if (alpha.size() != static_cast<std::size_t>(width) * height)
    throw ArgumentError("boundary_mask: alpha plane does not match the given size");

  MaskImage inside(width, height);
  for (std::size_t i = 0; i < alpha.size(); ++i) inside.values[i] = alpha[i] >= threshold ? 1 : 0;

  std::vector<std::pair<int, int>> boundary;
  constexpr int kDx[] = {1, -1, 0, 0};
  constexpr int kDy[] = {0, 0, 1, -1};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (!inside.at(x, y)) continue;
      for (int n = 0; n < 4; ++n) {
        const int nx = x + kDx[n], ny = y + kDy[n];
        if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
        if (!inside.at(nx, ny)) {
          boundary.emplace_back(x, y);
          break;
        }
      }
    }
  }

  std::vector<std::pair<int, int>> disk;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) disk.emplace_back(dx, dy);

  MaskImage mask(width, height);
  for (const auto& [bx, by] : boundary) {
    for (const auto& [dx, dy] : disk) {
      const int x = bx + dx, y = by + dy;
      if (x >= 0 && y >= 0 && x < width && y < height) mask.at(x, y) = 1;
    }
  }
  return mask;
}

}  // namespace gsd
