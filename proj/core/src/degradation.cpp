#include "bsr/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "bsr/errors.hpp"

namespace bsr {

std::vector<double> gaussian_taps(std::size_t taps, double sigma) {
  if (taps == 0 || taps % 2 == 0) throw UsageError("blur kernel size must be odd");
  if (!(sigma > 0.0)) throw UsageError("blur sigma must be positive");
  std::vector<double> k(taps);
  const double c = static_cast<double>(taps / 2);
  for (std::size_t i = 0; i < taps; ++i) {
    const double d = static_cast<double>(i) - c;
    k[i] = std::exp(-0.5 * d * d / (sigma * sigma));
  }
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= sum;
  return k;
}

DegradationModel DegradationModel::gaussian(std::size_t taps, double sigma,
                                            std::size_t scale_factor, double noise_sigma,
                                            std::uint64_t noise_seed) {
  DegradationModel m;
  m.kernel = gaussian_taps(taps, sigma);
  m.scale_factor = scale_factor;
  m.noise_sigma = noise_sigma;
  m.noise_seed = noise_seed;
  m.validate();
  return m;
}

DegradationModel DegradationModel::identity(std::size_t scale_factor) {
  DegradationModel m;
  m.kernel = {1.0};
  m.scale_factor = scale_factor;
  m.validate();
  return m;
}

void DegradationModel::validate() const {
  if (scale_factor < 1) throw UsageError("scale factor must be at least 1");
  if (kernel.empty() || kernel.size() % 2 == 0) {
    throw UsageError("blur kernel must have odd length");
  }
  const double sum = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12) throw UsageError("blur kernel taps must sum to 1");
  if (noise_sigma < 0.0) throw UsageError("noise level must be non-negative");
}

namespace {

std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

void check_divisible(const Image& hr, std::size_t factor) {
  if (hr.empty()) throw DataError("cannot degrade an empty image");
  if (hr.width % factor != 0 || hr.height % factor != 0) {
    throw DataError("image size " + std::to_string(hr.width) + "x" + std::to_string(hr.height) +
                    " is not divisible by scale factor " + std::to_string(factor));
  }
}

}  // namespace

Image blur_subsample(const Image& hr, const DegradationModel& model) {
  check_divisible(hr, model.scale_factor);
  const std::size_t f = model.scale_factor;
  const std::size_t lw = hr.width / f;
  const std::size_t lh = hr.height / f;
  const auto half = static_cast<std::ptrdiff_t>(model.kernel.size() / 2);

  // Horizontal pass evaluated only at the sampled columns.
  Image rows(lw, hr.height);
  for (std::size_t y = 0; y < hr.height; ++y) {
    for (std::size_t j = 0; j < lw; ++j) {
      const auto cx = static_cast<std::ptrdiff_t>(j * f);
      double acc = 0.0;
      for (std::ptrdiff_t k = -half; k <= half; ++k) {
        acc += model.kernel[static_cast<std::size_t>(k + half)] *
               hr.at(clamp_index(cx + k, hr.width), y);
      }
      rows.at(j, y) = acc;
    }
  }
  Image lr(lw, lh);
  for (std::size_t i = 0; i < lh; ++i) {
    const auto cy = static_cast<std::ptrdiff_t>(i * f);
    for (std::size_t j = 0; j < lw; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -half; k <= half; ++k) {
        acc += model.kernel[static_cast<std::size_t>(k + half)] *
               rows.at(j, clamp_index(cy + k, hr.height));
      }
      lr.at(j, i) = acc;
    }
  }
  return lr;
}

Image blur_subsample_adjoint(const Image& lr, const DegradationModel& model,
                             std::size_t hr_width, std::size_t hr_height) {
  const std::size_t f = model.scale_factor;
  if (lr.width * f != hr_width || lr.height * f != hr_height) {
    throw DataError("adjoint target size does not match the LR image and scale factor");
  }
  const auto half = static_cast<std::ptrdiff_t>(model.kernel.size() / 2);

  // Transpose of the vertical pass, then of the horizontal pass.
  Image rows(lr.width, hr_height);
  for (std::size_t i = 0; i < lr.height; ++i) {
    const auto cy = static_cast<std::ptrdiff_t>(i * f);
    for (std::size_t j = 0; j < lr.width; ++j) {
      const double v = lr.at(j, i);
      for (std::ptrdiff_t k = -half; k <= half; ++k) {
        rows.at(j, clamp_index(cy + k, hr_height)) +=
            model.kernel[static_cast<std::size_t>(k + half)] * v;
      }
    }
  }
  Image hr(hr_width, hr_height);
  for (std::size_t y = 0; y < hr_height; ++y) {
    for (std::size_t j = 0; j < lr.width; ++j) {
      const auto cx = static_cast<std::ptrdiff_t>(j * f);
      const double v = rows.at(j, y);
      for (std::ptrdiff_t k = -half; k <= half; ++k) {
        hr.at(clamp_index(cx + k, hr_width), y) +=
            model.kernel[static_cast<std::size_t>(k + half)] * v;
      }
    }
  }
  return hr;
}

Image degrade(const Image& hr, const DegradationModel& model) {
  model.validate();
  Image lr = blur_subsample(hr, model);
  if (model.noise_sigma > 0.0) {
    std::mt19937_64 rng(model.noise_seed);
    std::normal_distribution<double> noise(0.0, model.noise_sigma);
    for (double& v : lr.data) v += noise(rng);
  }
  return lr;
}

}  // namespace bsr
