#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bsr/image.hpp"

namespace bsr {

/// Blur + subsample + additive noise: y = S H x + e.
///
/// `kernel` holds the 1-D taps of a separable, odd-length, centered blur; the
/// 2-D kernel is its outer product. LR pixel (i, j) samples the blurred HR
/// image at (i * scale_factor, j * scale_factor). Borders replicate.
struct DegradationModel {
  std::vector<double> kernel{1.0};
  std::size_t scale_factor = 4;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;

  static DegradationModel gaussian(std::size_t taps, double sigma, std::size_t scale_factor,
                                   double noise_sigma = 0.0, std::uint64_t noise_seed = 0);
  static DegradationModel identity(std::size_t scale_factor);

  void validate() const;
};

[[nodiscard]] std::vector<double> gaussian_taps(std::size_t taps, double sigma);

/// Noise-free S H x.
[[nodiscard]] Image blur_subsample(const Image& hr, const DegradationModel& model);

/// Exact adjoint of blur_subsample: scatters each LR value back through the
/// kernel with the same border clamping. Output has the given HR size.
[[nodiscard]] Image blur_subsample_adjoint(const Image& lr, const DegradationModel& model,
                                           std::size_t hr_width, std::size_t hr_height);

/// Full degradation including noise (deterministic given noise_seed).
/// Rejects images whose dimensions are not multiples of the scale factor.
[[nodiscard]] Image degrade(const Image& hr, const DegradationModel& model);

}  // namespace bsr
