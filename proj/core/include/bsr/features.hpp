#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Dense>

#include "bsr/image.hpp"
#include "bsr/patches.hpp"

namespace bsr {

/// Gradient filter bank plus an optional PCA projection.
///
/// Four responses are computed on the mid-resolution (bicubic) image:
/// [-1 0 1] and [1 0 -2 0 1], each horizontally and vertically. A patch's raw
/// feature is the concatenation of its four response patches (row-major each).
/// When `basis` is non-empty the raw feature is projected onto its columns.
struct FeatureExtractor {
  std::size_t patch_size = 16;
  std::size_t overlap = 4;
  Eigen::MatrixXd basis;
  double retained_energy = 1.0;

  [[nodiscard]] std::size_t raw_dim() const { return 4 * patch_size * patch_size; }
  [[nodiscard]] std::size_t feature_dim() const {
    return basis.size() == 0 ? raw_dim() : static_cast<std::size_t>(basis.cols());
  }
};

inline constexpr std::array<double, 3> kFirstOrderFilter{-1.0, 0.0, 1.0};
inline constexpr std::array<double, 5> kSecondOrderFilter{1.0, 0.0, -2.0, 0.0, 1.0};

/// Filter responses in order: first-order horizontal, first-order vertical,
/// second-order horizontal, second-order vertical.
[[nodiscard]] std::array<Image, 4> gradient_responses(const Image& img);

[[nodiscard]] PatchGrid extract_raw_features(const Image& img, std::size_t patch_size,
                                             std::size_t overlap);

[[nodiscard]] PatchGrid extract_features(const Image& img, const FeatureExtractor& fe);

/// Uncentered PCA (eigenvectors of the second-moment matrix of the columns).
/// Keeps the fewest leading components whose eigenvalues reach `energy` of the
/// total. Returns an orthonormal basis, raw_dim x kept.
[[nodiscard]] Eigen::MatrixXd fit_pca(const Eigen::MatrixXd& raw_features, double energy);

/// Fraction of the columns' total energy captured by projecting onto `basis`.
[[nodiscard]] double captured_energy(const Eigen::MatrixXd& basis,
                                     const Eigen::MatrixXd& raw_features);

}  // namespace bsr
