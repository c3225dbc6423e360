#include <filesystem>
#include <random>

#include "doctest.h"

#include "gsd/compositor.hpp"
#include "gsd/errors.hpp"
#include "gsd/image.hpp"
#include "oracles.hpp"

namespace {

gsd::ImageRGBA solid_fg(int w, int h, float value, float alpha) {
  gsd::ImageRGBA img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float* p = img.at(x, y);
      p[0] = p[1] = p[2] = value;
      p[3] = alpha;
    }
  return img;
}

gsd::ImageRGB solid_bg(int w, int h, float value) {
  gsd::ImageRGB img(w, h);
  std::fill(img.pixels.begin(), img.pixels.end(), value);
  return img;
}

std::vector<float> random_alpha(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> a(static_cast<std::size_t>(w) * h);
  // blocky shapes so boundaries are not everywhere
  const int cx = w / 2, cy = h / 2;
  const float r = u(rng) * w / 2.0f;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float d = static_cast<float>((x - cx) * (x - cx) + (y - cy) * (y - cy));
      a[static_cast<std::size_t>(y) * w + x] = d < r * r ? 0.6f + 0.4f * u(rng) : 0.4f * u(rng);
    }
  a[u(rng) * (a.size() - 1)] = 1.0f;
  return a;
}

}  // namespace

TEST_CASE("alpha compositing") {
  CHECK(gsd::alpha_composite(solid_fg(4, 3, 0.7f, 1.0f), solid_bg(4, 3, 0.2f)).pixels ==
        std::vector<float>(36, 0.7f));
  CHECK(gsd::alpha_composite(solid_fg(4, 3, 0.7f, 0.0f), solid_bg(4, 3, 0.2f)).pixels ==
        std::vector<float>(36, 0.2f));
  for (float v : gsd::alpha_composite(solid_fg(2, 2, 1.0f, 0.5f), solid_bg(2, 2, 0.0f)).pixels)
    CHECK(v == doctest::Approx(0.5f));
  CHECK_THROWS_AS(gsd::alpha_composite(solid_fg(2, 2, 1.0f, 0.5f), solid_bg(3, 2, 0.0f)), gsd::ArgumentError);
  const auto fg = solid_fg(5, 5, 0.3f, 0.25f);
  CHECK(gsd::alpha_channel(fg) == std::vector<float>(25, 0.25f));
}

TEST_CASE("boundary mask examples") {
  SUBCASE("empty alpha") {
    CHECK(gsd::boundary_mask(std::vector<float>(100, 0.0f), 10, 10).count() == 0);
  }
  SUBCASE("single opaque pixel, radius 1") {
    std::vector<float> a(81, 0.0f);
    a[4 * 9 + 4] = 1.0f;
    const auto m = gsd::boundary_mask(a, 9, 9, 0.5, 1);
    CHECK(m.count() == 5);
    CHECK(m.at(4, 4) == 1);
    CHECK(m.at(3, 4) == 1);
    CHECK(m.at(5, 4) == 1);
    CHECK(m.at(4, 3) == 1);
    CHECK(m.at(4, 5) == 1);
  }
  SUBCASE("radius 0 keeps only the boundary") {
    std::vector<float> a(100, 0.0f);
    for (int y = 2; y < 7; ++y)
      for (int x = 2; x < 7; ++x) a[y * 10 + x] = 1.0f;
    const auto m = gsd::boundary_mask(a, 10, 10, 0.5, 0);
    CHECK(m.count() == 16);
    CHECK(m.at(4, 4) == 0);
    CHECK(m.at(2, 2) == 1);
  }
  SUBCASE("negative radius") {
    CHECK_THROWS_AS(gsd::boundary_mask(std::vector<float>(4, 0.0f), 2, 2, 0.5, -1), gsd::ArgumentError);
    CHECK_THROWS_AS(gsd::boundary_mask(std::vector<float>(3, 0.0f), 2, 2), gsd::ArgumentError);
  }
}

TEST_CASE("boundary mask agrees with brute-force dilation and grows with radius") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 20 + trial, h = 15 + 2 * trial;
    const auto a = random_alpha(w, h, rng);
    gsd::MaskImage prev;
    for (int r = 0; r <= 6; r += 2) {
      const auto m = gsd::boundary_mask(a, w, h, 0.5, r);
      CHECK(m.values == oracle::dilated_boundary(a, w, h, 0.5, r).values);
      if (r > 0)
        for (std::size_t i = 0; i < m.values.size(); ++i) CHECK(m.values[i] >= prev.values[i]);
      prev = m;
    }
  }
}

TEST_CASE("png round trip") {
  const auto dir = std::filesystem::temp_directory_path();
  gsd::ImageRGBA img(7, 5);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<float>(i % 256) / 255.0f;
  gsd::write_png((dir / "gsd_rgba.png").string(), img);
  const auto back = gsd::read_png_rgba((dir / "gsd_rgba.png").string());
  CHECK(back.width == 7);
  CHECK(back.height == 5);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) CHECK(std::abs(back.pixels[i] - img.pixels[i]) <= 0.5f / 255.0f);

  gsd::MaskImage m(6, 4);
  m.at(1, 2) = 1;
  m.at(5, 3) = 1;
  gsd::write_png((dir / "gsd_mask.png").string(), m);
  CHECK(gsd::read_png_mask((dir / "gsd_mask.png").string()).values == m.values);
  CHECK_THROWS_AS(gsd::read_png_rgb((dir / "gsd_missing.png").string()), gsd::Error);
}
