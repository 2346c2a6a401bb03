#include "bsr/patches.hpp"

#include <string>

#include "bsr/errors.hpp"

namespace bsr {

bool PatchGrid::same_geometry(const PatchGrid& other) const {
  return patch_size == other.patch_size && overlap == other.overlap &&
         source_width == other.source_width && source_height == other.source_height &&
         origins == other.origins;
}

std::vector<std::size_t> axis_origins(std::size_t length, std::size_t patch_size,
                                      std::size_t stride) {
  std::vector<std::size_t> out;
  const std::size_t last = length - patch_size;
  for (std::size_t o = 0; o < last; o += stride) out.push_back(o);
  out.push_back(last);
  return out;
}

PatchGrid make_grid(std::size_t width, std::size_t height, std::size_t patch_size,
                    std::size_t overlap) {
  if (patch_size == 0) throw DataError("patch size must be positive");
  if (overlap >= patch_size) {
    throw DataError("overlap " + std::to_string(overlap) + " must be smaller than patch size " +
                    std::to_string(patch_size));
  }
  if (patch_size > width || patch_size > height) {
    throw DataError("patch size " + std::to_string(patch_size) + " exceeds image size " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.overlap = overlap;
  grid.source_width = width;
  grid.source_height = height;
  const auto xs = axis_origins(width, patch_size, grid.stride());
  const auto ys = axis_origins(height, patch_size, grid.stride());
  grid.origins.reserve(xs.size() * ys.size());
  for (std::size_t y : ys) {
    for (std::size_t x : xs) grid.origins.push_back({x, y});
  }
  return grid;
}

PatchGrid extract_patches(const Image& img, std::size_t patch_size, std::size_t overlap) {
  PatchGrid grid = make_grid(img.width, img.height, patch_size, overlap);
  const auto p = static_cast<Eigen::Index>(patch_size);
  grid.patches.resize(p * p, static_cast<Eigen::Index>(grid.count()));
  for (std::size_t n = 0; n < grid.count(); ++n) {
    const auto [ox, oy] = grid.origins[n];
    auto col = grid.patches.col(static_cast<Eigen::Index>(n));
    for (std::size_t y = 0; y < patch_size; ++y) {
      for (std::size_t x = 0; x < patch_size; ++x) {
        col(static_cast<Eigen::Index>(y * patch_size + x)) = img.at(ox + x, oy + y);
      }
    }
  }
  return grid;
}

Image aggregate_patches(const PatchGrid& grid) {
  const auto p = static_cast<Eigen::Index>(grid.patch_size);
  if (grid.patches.rows() != p * p ||
      grid.patches.cols() != static_cast<Eigen::Index>(grid.count())) {
    throw DataError("patch matrix does not match grid geometry");
  }
  const PatchGrid expected =
      make_grid(grid.source_width, grid.source_height, grid.patch_size, grid.overlap);
  if (expected.origins != grid.origins) {
    throw DataError("patch origins do not match the source dimensions");
  }

  Image sum(grid.source_width, grid.source_height);
  std::vector<unsigned> cover(sum.size(), 0);
  for (std::size_t n = 0; n < grid.count(); ++n) {
    const auto [ox, oy] = grid.origins[n];
    const auto col = grid.patches.col(static_cast<Eigen::Index>(n));
    for (std::size_t y = 0; y < grid.patch_size; ++y) {
      for (std::size_t x = 0; x < grid.patch_size; ++x) {
        const std::size_t idx = (oy + y) * sum.width + ox + x;
        sum.data[idx] += col(static_cast<Eigen::Index>(y * grid.patch_size + x));
        ++cover[idx];
      }
    }
  }
  for (std::size_t i = 0; i < sum.size(); ++i) sum.data[i] /= cover[i];
  return sum;
}

}  // namespace bsr
