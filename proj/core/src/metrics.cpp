#include "bsr/metrics.hpp"

#include <cmath>

#include "bsr/errors.hpp"

namespace bsr {

double psnr(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) {
    throw DataError("PSNR requires images of equal dimensions");
  }
  if (a.empty()) throw DataError("PSNR of empty images is undefined");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(quantize(a.data[i])) - quantize(b.data[i]);
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace bsr
