#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace bsr {

/// Grayscale raster with row-major intensities, nominally in [0, 1].
///
/// Values are kept in double precision internally; quantization to 8 bits
/// happens only when writing files or computing PSNR.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> data;

  Image() = default;
  Image(std::size_t w, std::size_t h, double fill = 0.0)
      : width(w), height(h), data(w * h, fill) {}

  [[nodiscard]] bool empty() const { return data.empty(); }
  [[nodiscard]] std::size_t size() const { return data.size(); }

  double& at(std::size_t x, std::size_t y) { return data[y * width + x]; }
  [[nodiscard]] double at(std::size_t x, std::size_t y) const { return data[y * width + x]; }

  friend bool operator==(const Image&, const Image&) = default;
};

void clamp_unit(Image& img);
[[nodiscard]] Image clamped(Image img);

[[nodiscard]] Image crop(const Image& img, std::size_t x0, std::size_t y0, std::size_t w,
                         std::size_t h);

/// Drops trailing rows and columns so both dimensions divide `factor`.
[[nodiscard]] Image crop_to_multiple(const Image& img, std::size_t factor);

[[nodiscard]] double max_abs_difference(const Image& a, const Image& b);

/// 8-bit quantization used at file and metric boundaries.
[[nodiscard]] unsigned char quantize(double v);

// File I/O. Reading detects PNG or binary PGM (P5) from the file signature;
// color PNGs are converted to luminance. Writing picks the format from the
// extension (".pgm" writes P5, anything else PNG).
[[nodiscard]] Image read_image(const std::filesystem::path& path);
void write_image(const Image& img, const std::filesystem::path& path);
void write_png(const Image& img, const std::filesystem::path& path);
void write_pgm(const Image& img, const std::filesystem::path& path);

}  // namespace bsr
