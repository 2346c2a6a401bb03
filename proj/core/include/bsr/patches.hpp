#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "bsr/image.hpp"

namespace bsr {

struct PatchOrigin {
  std::size_t x = 0;
  std::size_t y = 0;
  friend bool operator==(const PatchOrigin&, const PatchOrigin&) = default;
};

/// Overlapping square patches of an image, one vectorized patch per column.
///
/// Origins step by patch_size - overlap along each axis; the last origin on
/// each axis is clamped to the border so every pixel is covered. Origins are
/// ordered row-major. `patches` may hold raw pixels (rows = patch_size^2) or
/// feature vectors of any length sharing the same geometry.
struct PatchGrid {
  std::size_t patch_size = 0;
  std::size_t overlap = 0;
  std::size_t source_width = 0;
  std::size_t source_height = 0;
  std::vector<PatchOrigin> origins;
  Eigen::MatrixXd patches;

  [[nodiscard]] std::size_t count() const { return origins.size(); }
  [[nodiscard]] std::size_t stride() const { return patch_size - overlap; }
  [[nodiscard]] bool same_geometry(const PatchGrid& other) const;
};

/// Origins along one axis of the given length.
[[nodiscard]] std::vector<std::size_t> axis_origins(std::size_t length, std::size_t patch_size,
                                                    std::size_t stride);

/// Geometry only; `patches` is left empty.
[[nodiscard]] PatchGrid make_grid(std::size_t width, std::size_t height, std::size_t patch_size,
                                  std::size_t overlap);

[[nodiscard]] PatchGrid extract_patches(const Image& img, std::size_t patch_size,
                                        std::size_t overlap);

/// Averages every patch value covering each pixel.
[[nodiscard]] Image aggregate_patches(const PatchGrid& grid);

}  // namespace bsr
