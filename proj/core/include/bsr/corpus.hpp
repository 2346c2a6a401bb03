#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bsr/image.hpp"

namespace bsr {

/// Renders one aligned, face-like test image: a shaded ellipsoidal face on a
/// graded background with hair texture at the top and sharp-edged eyes,
/// brows, nose and mouth at jittered but fixed positions.
[[nodiscard]] Image synthesize_face(std::size_t size, std::mt19937_64& rng);

struct CorpusImage {
  std::string name;
  Image image;
};

/// `count` images named face_0000.png, face_0001.png, ... Image k depends only
/// on (seed, k), so prefixes of a larger corpus are stable.
[[nodiscard]] std::vector<CorpusImage> generate_corpus(std::size_t count, std::uint64_t seed,
                                                       std::size_t size = 64);

}  // namespace bsr
