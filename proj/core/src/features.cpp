#include "bsr/features.hpp"

#include <algorithm>
#include <string>

#include "bsr/errors.hpp"

namespace bsr {

namespace {

template <std::size_t N>
Image correlate_axis(const Image& img, const std::array<double, N>& taps, bool horizontal) {
  constexpr auto half = static_cast<std::ptrdiff_t>(N / 2);
  Image out(img.width, img.height);
  const auto w = static_cast<std::ptrdiff_t>(img.width);
  const auto h = static_cast<std::ptrdiff_t>(img.height);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -half; k <= half; ++k) {
        const std::ptrdiff_t sx = horizontal ? std::clamp<std::ptrdiff_t>(x + k, 0, w - 1) : x;
        const std::ptrdiff_t sy = horizontal ? y : std::clamp<std::ptrdiff_t>(y + k, 0, h - 1);
        acc += taps[static_cast<std::size_t>(k + half)] *
               img.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
      }
      out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
    }
  }
  return out;
}

}  // namespace

std::array<Image, 4> gradient_responses(const Image& img) {
  return {correlate_axis(img, kFirstOrderFilter, true),
          correlate_axis(img, kFirstOrderFilter, false),
          correlate_axis(img, kSecondOrderFilter, true),
          correlate_axis(img, kSecondOrderFilter, false)};
}

PatchGrid extract_raw_features(const Image& img, std::size_t patch_size, std::size_t overlap) {
  const auto responses = gradient_responses(img);
  PatchGrid grid = make_grid(img.width, img.height, patch_size, overlap);
  const auto block = static_cast<Eigen::Index>(patch_size * patch_size);
  grid.patches.resize(4 * block, static_cast<Eigen::Index>(grid.count()));
  for (std::size_t r = 0; r < responses.size(); ++r) {
    const PatchGrid part = extract_patches(responses[r], patch_size, overlap);
    grid.patches.middleRows(static_cast<Eigen::Index>(r) * block, block) = part.patches;
  }
  return grid;
}

PatchGrid extract_features(const Image& img, const FeatureExtractor& fe) {
  PatchGrid grid = extract_raw_features(img, fe.patch_size, fe.overlap);
  if (fe.basis.size() == 0) return grid;
  if (fe.basis.rows() != grid.patches.rows()) {
    throw DataError("PCA basis has " + std::to_string(fe.basis.rows()) +
                    " rows but raw features have " + std::to_string(grid.patches.rows()));
  }
  grid.patches = (fe.basis.transpose() * grid.patches).eval();
  return grid;
}

Eigen::MatrixXd fit_pca(const Eigen::MatrixXd& raw_features, double energy) {
  if (!(energy > 0.0 && energy <= 1.0)) throw UsageError("PCA energy must be in (0, 1]");
  if (raw_features.cols() == 0) throw DataError("PCA requires at least one sample");
  const Eigen::MatrixXd moment = raw_features * raw_features.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(moment);
  if (eig.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");

  // Eigen returns ascending eigenvalues; walk from the top.
  const Eigen::VectorXd values = eig.eigenvalues().cwiseMax(0.0);
  const double total = values.sum();
  if (!(total > 0.0)) throw DataError("PCA training features are all zero");
  const Eigen::Index dim = values.size();
  const double target = energy * total * (1.0 - 1e-12);
  Eigen::Index kept = 0;
  double acc = 0.0;
  while (kept < dim && acc < target) {
    acc += values(dim - 1 - kept);
    ++kept;
  }

  Eigen::MatrixXd basis(dim, kept);
  for (Eigen::Index k = 0; k < kept; ++k) {
    Eigen::VectorXd v = eig.eigenvectors().col(dim - 1 - k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    basis.col(k) = v;
  }
  return basis;
}

double captured_energy(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& raw_features) {
  const double total = raw_features.squaredNorm();
  if (total == 0.0) return 1.0;
  return (basis.transpose() * raw_features).squaredNorm() / total;
}

}  // namespace bsr
