#include "sparseview/image.h"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace sparseview {
namespace {

std::uint8_t to_byte(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

void write_png_bytes(const std::filesystem::path& path, int width, int height,
                     std::uint32_t format, const std::vector<std::uint8_t>& bytes) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  if (!png_image_write_to_file(&img, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw std::runtime_error("write_png '" + path.string() + "': " + msg);
  }
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("ImageBuffer: dims must be positive");
  data_.resize(pixel_count() * 3);
  for (std::size_t i = 0; i < pixel_count(); ++i) set_pixel(i, fill);
}

Rgb ImageBuffer::at(int x, int y) const {
  return pixel(static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x));
}

void ImageBuffer::set(int x, int y, const Rgb& c) {
  set_pixel(static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x), c);
}

Rgb ImageBuffer::pixel(std::size_t index) const {
  return {data_[3 * index], data_[3 * index + 1], data_[3 * index + 2]};
}

void ImageBuffer::set_pixel(std::size_t index, const Rgb& c) {
  data_[3 * index] = c[0];
  data_[3 * index + 1] = c[1];
  data_[3 * index + 2] = c[2];
}

void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
  std::vector<std::uint8_t> bytes(image.values().size());
  std::transform(image.values().begin(), image.values().end(), bytes.begin(), to_byte);
  write_png_bytes(path, image.width(), image.height(), PNG_FORMAT_RGB, bytes);
}

void write_gray_png(const std::filesystem::path& path, int width, int height,
                    std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("write_gray_png: value count does not match dims");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double span = *hi - *lo;
  std::vector<std::uint8_t> bytes(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    bytes[i] = span > 0.0 ? to_byte((values[i] - *lo) / span) : to_byte(values[i]);
  }
  write_png_bytes(path, width, height, PNG_FORMAT_GRAY, bytes);
}

ImageBuffer read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw std::runtime_error("read_png '" + path.string() + "': " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, bytes.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw std::runtime_error("read_png '" + path.string() + "': " + msg);
  }
  ImageBuffer out(static_cast<int>(img.width), static_cast<int>(img.height));
  for (std::size_t i = 0; i < bytes.size(); ++i) out.values()[i] = bytes[i] / 255.0;
  return out;
}

void write_raw(const std::filesystem::path& path, const ImageBuffer& image) {
  static_assert(std::endian::native == std::endian::little, "raw dumps assume little-endian");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(image.width()),
                                 static_cast<std::uint32_t>(image.height())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(image.values().data()),
            static_cast<std::streamsize>(image.values().size() * sizeof(double)));
}

ImageBuffer read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::uint32_t dims[2];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  ImageBuffer out(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
  in.read(reinterpret_cast<char*>(out.values().data()),
          static_cast<std::streamsize>(out.values().size() * sizeof(double)));
  if (!in) throw std::runtime_error("read_raw '" + path.string() + "': truncated");
  return out;
}

}  // namespace sparseview
