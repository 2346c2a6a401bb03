#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bsr/features.hpp"
#include "bsr/patches.hpp"

namespace bsr {

/// Coupled training samples, one column per sample.
struct TrainingPairs {
  Eigen::MatrixXd features;    ///< LR feature vectors (feature_dim x n)
  Eigen::MatrixXd hr_patches;  ///< HR residual patches (hr_patch_dim x n)
};

/// Coupled dictionaries sharing sparse codes: `low` codes LR features (unit
/// norm columns), `high` maps those codes to HR residual patches.
struct DictionaryPair {
  Eigen::MatrixXd low;
  Eigen::MatrixXd high;
  FeatureExtractor features;
  std::size_t scale_factor = 4;

  [[nodiscard]] Eigen::Index atoms() const { return low.cols(); }
  void validate() const;
};

struct KsvdOptions {
  std::size_t atoms = 512;
  std::size_t iterations = 20;
  std::size_t sparsity = 3;
  std::uint64_t seed = 1;
};

struct KsvdTrace {
  /// ||A - D Gamma||_F^2 after each iteration's dictionary update.
  std::vector<double> objective;
  std::size_t replaced_atoms = 0;
  bool damped_high_solve = false;
};

/// K-SVD on the LR features followed by the least-squares HR dictionary
/// high = C Gamma^T (Gamma Gamma^T)^-1 from the final codes.
///
/// Each iteration OMP-codes every sample, then refits every atom and its
/// coefficients by a rank-1 SVD of the atom's restricted residual. Atoms no
/// sample uses are re-seeded from the sample with the largest residual; an
/// atom nearly parallel to an earlier one is swapped for that sample when doing
/// so does not raise the error. An iteration that ends with a larger error
/// than the previous one is redone keeping each sample's old code whenever the
/// fresh one is worse, so the recorded objective never increases.
[[nodiscard]] DictionaryPair train_dictionary(const TrainingPairs& samples,
                                              const KsvdOptions& options,
                                              KsvdTrace* trace = nullptr);

/// Per-atom neighborhoods and offline ridge projections.
struct AnchorSet {
  std::size_t neighbors_per_atom = 0;
  double lambda = 0.0;
  std::vector<std::vector<Eigen::Index>> neighbors;  ///< by descending |correlation|
  std::vector<Eigen::MatrixXd> projections;          ///< hr_dim x feature_dim each

  void validate(const DictionaryPair& pair) const;
};

/// Neighbors of `atom`: the k_nn atoms with the largest |d_atom^T d_j|,
/// the atom itself included, ties broken by lower index.
[[nodiscard]] std::vector<Eigen::Index> atom_neighborhood(const Eigen::MatrixXd& gram,
                                                          Eigen::Index atom, std::size_t k_nn);

[[nodiscard]] AnchorSet build_anchors(const DictionaryPair& pair, std::size_t k_nn,
                                      double lambda);

/// Atom with the largest |d^T f| (lowest index on ties; atom 0 for f = 0).
[[nodiscard]] Eigen::Index nearest_anchor(const Eigen::MatrixXd& low, const Eigen::VectorXd& f);

/// Maps each feature column to an HR residual patch via its anchor's
/// projection. Output keeps the feature grid's geometry.
[[nodiscard]] PatchGrid anr_reconstruct(const PatchGrid& lr_features, const AnchorSet& anchors,
                                        const DictionaryPair& pair);

}  // namespace bsr
