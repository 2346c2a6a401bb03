#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bsr/dictionary.hpp"
#include "bsr/errors.hpp"
#include "bsr/sparse.hpp"

namespace bsr {

void AnchorSet::validate(const DictionaryPair& pair) const {
  const auto K = static_cast<std::size_t>(pair.atoms());
  if (neighbors.size() != K || projections.size() != K) {
    throw DataError("anchor set size does not match the dictionary");
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (neighbors[k].size() != neighbors_per_atom) throw DataError("anchor neighborhood has wrong size");
    for (Eigen::Index j : neighbors[k]) {
      if (j < 0 || j >= pair.atoms()) throw DataError("anchor neighbor index out of range");
    }
    if (projections[k].rows() != pair.high.rows() || projections[k].cols() != pair.low.rows()) {
      throw DataError("anchor projection has wrong shape");
    }
  }
}

std::vector<Eigen::Index> atom_neighborhood(const Eigen::MatrixXd& gram, Eigen::Index atom,
                                            std::size_t k_nn) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(gram.rows()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  const auto corr = [&](Eigen::Index j) { return std::abs(gram(atom, j)); };
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    // The atom itself always leads even if rounding puts a twin marginally above it.
    if (a == atom) return b != atom;
    if (b == atom) return false;
    return corr(a) > corr(b);
  });
  idx.resize(k_nn);
  return idx;
}

AnchorSet build_anchors(const DictionaryPair& pair, std::size_t k_nn, double lambda) {
  pair.validate();
  if (k_nn < 1 || k_nn > static_cast<std::size_t>(pair.atoms())) {
    throw UsageError("neighborhood size must be in [1, " + std::to_string(pair.atoms()) + "]");
  }
  const Eigen::MatrixXd gram = pair.low.transpose() * pair.low;
  AnchorSet set;
  set.neighbors_per_atom = k_nn;
  set.lambda = lambda;
  set.neighbors.reserve(static_cast<std::size_t>(pair.atoms()));
  set.projections.reserve(static_cast<std::size_t>(pair.atoms()));
  for (Eigen::Index k = 0; k < pair.atoms(); ++k) {
    auto nb = atom_neighborhood(gram, k, k_nn);
    Eigen::MatrixXd low_nb(pair.low.rows(), static_cast<Eigen::Index>(k_nn));
    Eigen::MatrixXd high_nb(pair.high.rows(), static_cast<Eigen::Index>(k_nn));
    for (std::size_t j = 0; j < k_nn; ++j) {
      low_nb.col(static_cast<Eigen::Index>(j)) = pair.low.col(nb[j]);
      high_nb.col(static_cast<Eigen::Index>(j)) = pair.high.col(nb[j]);
    }
    Eigen::MatrixXd proj = high_nb * ridge_operator(low_nb, lambda);
    if (!proj.allFinite()) throw NumericalError("anchor projection is not finite");
    set.neighbors.push_back(std::move(nb));
    set.projections.push_back(std::move(proj));
  }
  return set;
}

Eigen::Index nearest_anchor(const Eigen::MatrixXd& low, const Eigen::VectorXd& f) {
  if (f.size() != low.rows()) throw DataError("feature length does not match the dictionary");
  const Eigen::VectorXd corr = (low.transpose() * f).cwiseAbs();
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < corr.size(); ++k) {
    if (corr(k) > corr(best)) best = k;
  }
  return best;
}

PatchGrid anr_reconstruct(const PatchGrid& lr_features, const AnchorSet& anchors,
                          const DictionaryPair& pair) {
  if (lr_features.patches.rows() != pair.low.rows()) {
    throw DataError("feature dimension does not match the anchor projections");
  }
  PatchGrid out = lr_features;
  out.patch_size = pair.features.patch_size;
  out.patches.resize(pair.high.rows(), lr_features.patches.cols());
  for (Eigen::Index n = 0; n < lr_features.patches.cols(); ++n) {
    const Eigen::VectorXd f = lr_features.patches.col(n);
    const Eigen::Index a = nearest_anchor(pair.low, f);
    out.patches.col(n) = anchors.projections[static_cast<std::size_t>(a)] * f;
  }
  return out;
}

}  // namespace bsr
