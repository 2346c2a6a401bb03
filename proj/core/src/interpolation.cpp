#include "bsr/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "bsr/errors.hpp"

namespace bsr {

double cubic_weight(double t) {
  constexpr double a = -0.5;
  const double x = std::abs(t);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace {

struct Taps {
  std::size_t index[4];
  double weight[4];
};

// Precomputes the four source pixels and weights for each output coordinate.
std::vector<Taps> axis_taps(std::size_t in_len, std::size_t factor) {
  std::vector<Taps> taps(in_len * factor);
  const auto last = static_cast<std::ptrdiff_t>(in_len) - 1;
  for (std::size_t o = 0; o < taps.size(); ++o) {
    const std::size_t base = o / factor;
    const double frac = static_cast<double>(o % factor) / static_cast<double>(factor);
    for (int k = 0; k < 4; ++k) {
      const auto src = static_cast<std::ptrdiff_t>(base) + k - 1;
      taps[o].index[k] = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(src, 0, last));
      taps[o].weight[k] = cubic_weight(frac - static_cast<double>(k - 1));
    }
  }
  return taps;
}

}  // namespace

Image bicubic_upscale(const Image& img, std::size_t factor) {
  if (factor < 2) throw DataError("bicubic upscale factor must be at least 2");
  if (img.empty()) throw DataError("cannot upscale an empty image");
  const auto tx = axis_taps(img.width, factor);
  const auto ty = axis_taps(img.height, factor);

  Image rows(tx.size(), img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < tx.size(); ++x) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += tx[x].weight[k] * img.at(tx[x].index[k], y);
      rows.at(x, y) = acc;
    }
  }
  Image out(tx.size(), ty.size());
  for (std::size_t y = 0; y < ty.size(); ++y) {
    for (std::size_t x = 0; x < tx.size(); ++x) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += ty[y].weight[k] * rows.at(x, ty[y].index[k]);
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace bsr
