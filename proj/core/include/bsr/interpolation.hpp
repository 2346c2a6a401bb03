#pragma once

#include <cstddef>

#include "bsr/image.hpp"

namespace bsr {

/// Catmull-Rom kernel weight at offset t (a = -0.5).
[[nodiscard]] double cubic_weight(double t);

/// Bicubic upscaling with border replication. Output pixel x maps to input
/// coordinate x / factor, so output samples at multiples of the factor
/// coincide with input pixels.
[[nodiscard]] Image bicubic_upscale(const Image& img, std::size_t factor);

}  // namespace bsr
