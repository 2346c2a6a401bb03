#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "bsr/back_projection.hpp"
#include "bsr/boost.hpp"
#include "bsr/degradation.hpp"
#include "bsr/dictionary.hpp"

namespace bsr {

/// Every tunable of the toolkit and its default.
struct Config {
  // Geometry and degradation.
  std::size_t scale_factor = 4;
  std::size_t image_size = 64;  ///< ingestion crop/resize target; 0 keeps native size
  std::size_t hr_patch_size = 16;
  std::size_t hr_overlap = 4;
  std::size_t lr_patch_size = 4;
  std::size_t lr_overlap = 1;
  std::size_t blur_size = 7;
  double blur_sigma = 1.2;
  double noise_sigma = 0.0;

  // Dictionary learning and features.
  std::size_t dict_size = 512;
  std::size_t ksvd_iterations = 20;
  std::size_t omp_sparsity = 3;
  double pca_energy = 0.999;
  std::size_t max_train_samples = 0;  ///< 0 keeps every patch

  // Coding, anchors, boosting.
  std::size_t k_nn = 40;
  double lambda = 1e-4;
  double theta = 0.0;
  std::size_t boost_rounds = 5;
  LossKind loss = LossKind::linear;
  double weight_sharpness = 1.0;  ///< exponent gamma in exp(gamma w)
  std::size_t boost_train_count = 10;

  // Back-projection.
  double bp_c = 1.0;
  double bp_tau = 0.5;
  std::size_t bp_iterations = 30;

  std::uint64_t seed = 1;

  /// Geometry consistency and value ranges. Throws UsageError.
  void validate() const;

  [[nodiscard]] DegradationModel degradation(std::uint64_t noise_seed = 0) const;
  [[nodiscard]] KsvdOptions ksvd() const;
  [[nodiscard]] BoostConfig boost() const;
  [[nodiscard]] BackProjectionOptions back_projection() const;
};

/// Parses flat "key = value" lines; '#' starts a comment. Unknown keys,
/// duplicate keys, and malformed values throw UsageError.
[[nodiscard]] Config parse_config(const std::string& text);
[[nodiscard]] Config load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(format_config(c)) reproduces c.
[[nodiscard]] std::string format_config(const Config& config);
void save_config(const Config& config, const std::filesystem::path& path);

}  // namespace bsr
