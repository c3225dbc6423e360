#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "gsd/errors.hpp"
#include "gsd/image.hpp"

namespace gsd {
namespace {

std::vector<std::uint8_t> read_png(const std::string& path, png_uint_32 format, int& width,
                                   int& height) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw FormatError("cannot read PNG '" + path + "': " + image.message);
  image.format = format;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw FormatError("cannot decode PNG '" + path + "': " + image.message);
  }
  width = static_cast<int>(image.width);
  height = static_cast<int>(image.height);
  return buffer;
}

void write_raw(const std::string& path, png_uint_32 format, int width, int height,
               const std::vector<std::uint8_t>& data) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, data.data(), 0, nullptr))
    throw Error("cannot write PNG '" + path + "': " + image.message);
}

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

template <int C>
Image<C> to_float(const std::vector<std::uint8_t>& bytes, int width, int height) {
  Image<C> out(width, height);
  std::transform(bytes.begin(), bytes.end(), out.pixels.begin(),
                 [](std::uint8_t b) { return static_cast<float>(b) / 255.0f; });
  return out;
}

template <int C>
std::vector<std::uint8_t> to_bytes(const Image<C>& image) {
  std::vector<std::uint8_t> out(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), out.begin(), to_byte);
  return out;
}

}  // namespace

std::size_t MaskImage::count() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

ImageRGBA read_png_rgba(const std::string& path) {
  int w = 0, h = 0;
  const auto bytes = read_png(path, PNG_FORMAT_RGBA, w, h);
  return to_float<4>(bytes, w, h);
}

ImageRGB read_png_rgb(const std::string& path) {
  int w = 0, h = 0;
  const auto bytes = read_png(path, PNG_FORMAT_RGB, w, h);
  return to_float<3>(bytes, w, h);
}

MaskImage read_png_mask(const std::string& path) {
  int w = 0, h = 0;
  const auto bytes = read_png(path, PNG_FORMAT_GRAY, w, h);
  MaskImage mask(w, h);
  for (std::size_t i = 0; i < bytes.size(); ++i) mask.values[i] = bytes[i] >= 128 ? 1 : 0;
  return mask;
}

void write_png(const std::string& path, const ImageRGBA& image) {
  write_raw(path, PNG_FORMAT_RGBA, image.width, image.height, to_bytes(image));
}

void write_png(const std::string& path, const ImageRGB& image) {
  write_raw(path, PNG_FORMAT_RGB, image.width, image.height, to_bytes(image));
}

void write_png(const std::string& path, const MaskImage& mask) {
  std::vector<std::uint8_t> bytes(mask.values.size());
  std::transform(mask.values.begin(), mask.values.end(), bytes.begin(),
                 [](std::uint8_t v) -> std::uint8_t { return v ? 255 : 0; });
  write_raw(path, PNG_FORMAT_GRAY, mask.width, mask.height, bytes);
}

}  // namespace gsd
