#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace sparseview {

using Rgb = std::array<double, 3>;

// Float RGB image, row-major, interleaved. Values are not clamped; clipping
// to [0, 1] happens on export.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, Rgb fill = {0.0, 0.0, 0.0});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  Rgb at(int x, int y) const;
  void set(int x, int y, const Rgb& c);
  Rgb pixel(std::size_t index) const;
  void set_pixel(std::size_t index, const Rgb& c);

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool same_dims(const ImageBuffer& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_;
  }
  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// 8-bit RGB PNG, values clipped to [0, 1] and rounded.
void write_png(const std::filesystem::path& path, const ImageBuffer& image);
// 8-bit grayscale PNG from per-pixel values; min..max is stretched to 0..255
// unless the values are constant.
void write_gray_png(const std::filesystem::path& path, int width, int height,
                    std::span<const double> values);
ImageBuffer read_png(const std::filesystem::path& path);

// Raw little-endian float64 dump: u32 width, u32 height, then w*h*3 doubles.
void write_raw(const std::filesystem::path& path, const ImageBuffer& image);
ImageBuffer read_raw(const std::filesystem::path& path);

}  // namespace sparseview
