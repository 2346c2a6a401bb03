#include "bsr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "bsr/errors.hpp"

namespace bsr {

namespace {

struct FaceParams {
  double background, background_slope;
  double cx, cy, rx, ry, skin;
  double hair, hair_freq, hair_phase;
  double eye_y, eye_dx, iris, eye_white, brow_tilt, brow_dark;
  double nose_dark, mouth_y, mouth_rx, lip;
};

double smooth_step(double signed_distance, double width) {
  return 1.0 / (1.0 + std::exp(-signed_distance / width));
}

bool in_ellipse(double u, double v, double cx, double cy, double rx, double ry) {
  const double dx = (u - cx) / rx;
  const double dy = (v - cy) / ry;
  return dx * dx + dy * dy <= 1.0;
}

double shade(const FaceParams& p, double u, double v) {
  double value = p.background + p.background_slope * (u - 0.5);

  // Face with soft border and radial shading.
  const double dx = (u - p.cx) / p.rx;
  const double dy = (v - p.cy) / p.ry;
  const double rho = std::sqrt(dx * dx + dy * dy);
  const double face_alpha = smooth_step(1.0 - rho, 0.03);
  const double skin = p.skin * (1.0 - 0.18 * rho * rho);
  value = value * (1.0 - face_alpha) + skin * face_alpha;

  // Hair cap: striped texture above the forehead line.
  const double hairline = p.cy - 0.55 * p.ry + 0.04 * std::cos(6.0 * (u - p.cx));
  if (v < hairline && in_ellipse(u, v, p.cx, p.cy - 0.02, p.rx * 1.08, p.ry * 1.05)) {
    value = p.hair + 0.07 * std::sin(2.0 * std::numbers::pi * p.hair_freq * u + p.hair_phase +
                                     3.0 * v);
  }

  for (int side : {-1, 1}) {
    const double ex = p.cx + side * p.eye_dx;
    // Brow: a dark tilted bar.
    const double by = p.eye_y - 0.075 + side * p.brow_tilt * (u - ex);
    if (std::abs(u - ex) < 0.075 && std::abs(v - by) < 0.014) value -= p.brow_dark;
    // Eye: white, iris, pupil.
    if (in_ellipse(u, v, ex, p.eye_y, 0.065, 0.03)) {
      value = p.eye_white;
      if (in_ellipse(u, v, ex, p.eye_y, p.iris, p.iris)) value = 0.22;
      if (in_ellipse(u, v, ex, p.eye_y, 0.45 * p.iris, 0.45 * p.iris)) value = 0.04;
    }
    // Nostril.
    if (in_ellipse(u, v, p.cx + side * 0.035, p.cy + 0.12, 0.014, 0.01)) value -= 0.25;
  }

  // Nose ridge shadow.
  if (v > p.eye_y + 0.03 && v < p.cy + 0.11 && std::abs(u - (p.cx - 0.025)) < 0.008) {
    value -= p.nose_dark;
  }

  // Mouth: lips with a dark parting line.
  if (in_ellipse(u, v, p.cx, p.mouth_y, p.mouth_rx, 0.032)) {
    value = p.lip;
    if (std::abs(v - p.mouth_y) < 0.006) value = 0.08;
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace

Image synthesize_face(std::size_t size, std::mt19937_64& rng) {
  if (size < 8) throw UsageError("synthetic faces need at least 8 pixels per side");
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto range = [&](double lo, double hi) { return lo + (hi - lo) * U(rng); };

  FaceParams p{};
  p.background = range(0.15, 0.35);
  p.background_slope = range(-0.12, 0.12);
  p.cx = 0.5 + range(-0.015, 0.015);
  p.cy = 0.53 + range(-0.015, 0.015);
  p.rx = range(0.30, 0.35);
  p.ry = range(0.38, 0.43);
  p.skin = range(0.55, 0.75);
  p.hair = range(0.05, 0.25);
  p.hair_freq = range(7.0, 10.0);
  p.hair_phase = range(0.0, 2.0 * std::numbers::pi);
  p.eye_y = 0.44 + range(-0.01, 0.01);
  p.eye_dx = 0.16 + range(-0.01, 0.01);
  p.iris = range(0.022, 0.03);
  p.eye_white = range(0.8, 0.95);
  p.brow_tilt = range(-0.25, 0.25);
  p.brow_dark = range(0.2, 0.35);
  p.nose_dark = range(0.08, 0.16);
  p.mouth_y = 0.75 + range(-0.01, 0.01);
  p.mouth_rx = range(0.09, 0.13);
  p.lip = range(0.3, 0.5);

  // 4x4 supersampling per pixel for anti-aliased edges.
  constexpr int kSub = 4;
  Image img(size, size);
  const double inv = 1.0 / static_cast<double>(size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      double acc = 0.0;
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const double u = (static_cast<double>(x) + (sx + 0.5) / kSub) * inv;
          const double v = (static_cast<double>(y) + (sy + 0.5) / kSub) * inv;
          acc += shade(p, u, v);
        }
      }
      img.at(x, y) = acc / (kSub * kSub);
    }
  }
  return img;
}

std::vector<CorpusImage> generate_corpus(std::size_t count, std::uint64_t seed, std::size_t size) {
  std::vector<CorpusImage> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    std::mt19937_64 rng(seq);
    char name[32];
    std::snprintf(name, sizeof(name), "face_%04zu.png", k);
    out.push_back({name, synthesize_face(size, rng)});
  }
  return out;
}

}  // namespace bsr
