#pragma once

#include <limits>

#include "bsr/image.hpp"

namespace bsr {

/// PSNR in dB between 8-bit quantizations of two images.
/// Identical quantized images yield +infinity.
[[nodiscard]] double psnr(const Image& a, const Image& b);

[[nodiscard]] inline bool psnr_identical(double db) {
  return db == std::numeric_limits<double>::infinity();
}

}  // namespace bsr
