#include "bsr/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "bsr/errors.hpp"
#include "bsr/sparse.hpp"

namespace bsr {

void DictionaryPair::validate() const {
  if (low.cols() == 0 || low.cols() != high.cols()) {
    throw DataError("coupled dictionaries must have the same positive atom count");
  }
  for (Eigen::Index k = 0; k < low.cols(); ++k) {
    if (std::abs(low.col(k).norm() - 1.0) > 1e-10) {
      throw DataError("LR dictionary atom " + std::to_string(k) + " is not unit norm");
    }
  }
  if (static_cast<std::size_t>(low.rows()) != features.feature_dim()) {
    throw DataError("LR dictionary rows do not match the feature dimension");
  }
  const auto hr = static_cast<Eigen::Index>(features.patch_size * features.patch_size);
  if (high.rows() != hr) throw DataError("HR dictionary rows do not match the HR patch size");
}

namespace {

using Index = Eigen::Index;

// Sparse code matrix stored per sample to keep K-SVD bookkeeping cheap.
struct Codes {
  std::vector<SparseCode> columns;

  [[nodiscard]] Eigen::MatrixXd dense(Index atoms) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(atoms, static_cast<Index>(columns.size()));
    for (std::size_t n = 0; n < columns.size(); ++n) {
      const auto& c = columns[n];
      for (std::size_t j = 0; j < c.nnz(); ++j) out(c.indices[j], static_cast<Index>(n)) = c.values[j];
    }
    return out;
  }
};

Eigen::VectorXd reconstruct(const Eigen::MatrixXd& D, const SparseCode& code) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(D.rows());
  for (std::size_t j = 0; j < code.nnz(); ++j) out += code.values[j] * D.col(code.indices[j]);
  return out;
}

// Leading singular triplet of E via the eigendecomposition of the smaller Gram.
void leading_singular(const Eigen::MatrixXd& E, Eigen::VectorXd& u, double& sigma,
                      Eigen::VectorXd& v) {
  if (E.cols() <= E.rows()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(E.transpose() * E);
    v = eig.eigenvectors().col(E.cols() - 1);
    sigma = std::sqrt(std::max(0.0, eig.eigenvalues()(E.cols() - 1)));
    u = E * v;
    const double n = u.norm();
    if (n > 0.0) u /= n;
    sigma = n;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(E * E.transpose());
    u = eig.eigenvectors().col(E.rows() - 1);
    u.normalize();
    v = E.transpose() * u;
    sigma = v.norm();
    if (sigma > 0.0) v /= sigma;
  }
  Index arg = 0;
  u.cwiseAbs().maxCoeff(&arg);
  if (u(arg) < 0.0) {
    u = -u;
    v = -v;
  }
}

constexpr double kDuplicateCoherence = 0.95;

// Replaces the later atom of each near-duplicate pair with the worst
// represented sample. The swap is kept only when re-coding the affected
// samples (the atom's users and the donor) does not raise their total error.
std::size_t clear_duplicates(const Eigen::MatrixXd& A, Eigen::MatrixXd& D, Codes& codes,
                             Eigen::MatrixXd& residual, std::size_t sparsity) {
  const Index K = D.cols();
  const Index n = A.cols();
  std::vector<char> donated(static_cast<std::size_t>(n), 0);
  std::size_t replaced = 0;
  for (Index k = 1; k < K; ++k) {
    const Eigen::VectorXd corr = (D.leftCols(k).transpose() * D.col(k)).cwiseAbs();
    if (corr.maxCoeff() <= kDuplicateCoherence) continue;

    Index worst = -1;
    double worst_err = 0.0;
    for (Index s = 0; s < n; ++s) {
      const double e = residual.col(s).squaredNorm();
      if (!donated[static_cast<std::size_t>(s)] && e > worst_err) {
        worst_err = e;
        worst = s;
      }
    }
    if (worst < 0 || !(worst_err > 1e-20)) break;
    donated[static_cast<std::size_t>(worst)] = 1;

    std::vector<Index> affected{worst};
    for (Index s = 0; s < n; ++s) {
      const auto& idx = codes.columns[static_cast<std::size_t>(s)].indices;
      if (s != worst && std::find(idx.begin(), idx.end(), k) != idx.end()) affected.push_back(s);
    }
    Eigen::MatrixXd trial = D;
    trial.col(k) = residual.col(worst) / std::sqrt(worst_err);
    const CodingDictionary dict(trial);
    std::vector<SparseCode> fresh;
    double old_err = 0.0, new_err = 0.0;
    for (Index s : affected) {
      old_err += residual.col(s).squaredNorm();
      fresh.push_back(omp(A.col(s), dict, sparsity));
      new_err += (A.col(s) - reconstruct(trial, fresh.back())).squaredNorm();
    }
    if (new_err > old_err) continue;

    D.col(k) = trial.col(k);
    for (std::size_t j = 0; j < affected.size(); ++j) {
      const Index s = affected[j];
      codes.columns[static_cast<std::size_t>(s)] = std::move(fresh[j]);
      residual.col(s) = A.col(s) - reconstruct(D, codes.columns[static_cast<std::size_t>(s)]);
    }
    ++replaced;
  }
  return replaced;
}

}  // namespace

DictionaryPair train_dictionary(const TrainingPairs& samples, const KsvdOptions& options,
                                KsvdTrace* trace) {
  const Eigen::MatrixXd& A = samples.features;
  const Index n = A.cols();
  const auto K = static_cast<Index>(options.atoms);
  if (samples.hr_patches.cols() != n) throw DataError("feature and HR sample counts differ");
  if (K < 1) throw UsageError("dictionary size must be positive");
  if (n < K) {
    throw DataError("need at least " + std::to_string(K) + " training samples, got " +
                    std::to_string(n));
  }
  KsvdTrace local;
  KsvdTrace& tr = trace != nullptr ? *trace : local;
  tr = {};

  // Initialize from K distinct non-zero samples in seeded random order.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(options.seed);
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::MatrixXd D(A.rows(), K);
  Index filled = 0;
  for (Index idx : order) {
    if (filled == K) break;
    const double norm = A.col(idx).norm();
    if (norm > 1e-12) D.col(filled++) = A.col(idx) / norm;
  }
  if (filled < K) throw DataError("not enough non-zero training features to seed the dictionary");

  Codes codes;
  codes.columns.assign(static_cast<std::size_t>(n), SparseCode{{}, {}, K});
  Eigen::MatrixXd residual = A;  // A - D Gamma, kept in sync with the codes

  // One K-SVD pass. With `keep_better` a sample's code only changes when the
  // fresh OMP code represents it better, so the pass cannot raise the error.
  const auto iterate = [&](bool keep_better, std::size_t& replaced) {
    // Sparse coding stage.
    const CodingDictionary dict(D);
    for (Index s = 0; s < n; ++s) {
      const Eigen::VectorXd y = A.col(s);
      SparseCode fresh = omp(y, dict, options.sparsity);
      const Eigen::VectorXd r = y - reconstruct(D, fresh);
      if (!keep_better || r.squaredNorm() <= residual.col(s).squaredNorm()) {
        codes.columns[static_cast<std::size_t>(s)] = std::move(fresh);
        residual.col(s) = r;
      }
    }

    // Atom users, gathered once per iteration.
    std::vector<std::vector<std::pair<Index, std::size_t>>> users(static_cast<std::size_t>(K));
    for (Index s = 0; s < n; ++s) {
      const auto& c = codes.columns[static_cast<std::size_t>(s)];
      for (std::size_t j = 0; j < c.nnz(); ++j) users[static_cast<std::size_t>(c.indices[j])].push_back({s, j});
    }

    // Dictionary update stage.
    std::vector<char> reseeded(static_cast<std::size_t>(n), 0);
    for (Index k = 0; k < K; ++k) {
      const auto& omega = users[static_cast<std::size_t>(k)];
      if (omega.empty()) {
        Index worst = -1;
        double worst_err = 0.0;
        for (Index s = 0; s < n; ++s) {
          const double e = residual.col(s).squaredNorm();
          if (!reseeded[static_cast<std::size_t>(s)] && e > worst_err) {
            worst_err = e;
            worst = s;
          }
        }
        if (worst >= 0 && worst_err > 0.0) {
          D.col(k) = residual.col(worst) / std::sqrt(worst_err);
          reseeded[static_cast<std::size_t>(worst)] = 1;
          ++replaced;
        }
        continue;
      }

      const auto m = static_cast<Index>(omega.size());
      Eigen::MatrixXd E(A.rows(), m);
      Eigen::VectorXd old_coef(m);
      for (Index j = 0; j < m; ++j) {
        const auto [s, slot] = omega[static_cast<std::size_t>(j)];
        old_coef(j) = codes.columns[static_cast<std::size_t>(s)].values[slot];
        E.col(j) = residual.col(s) + old_coef(j) * D.col(k);
      }
      Eigen::VectorXd u, v;
      double sigma = 0.0;
      leading_singular(E, u, sigma, v);

      const Eigen::MatrixXd new_res = E - u * (sigma * v).transpose();
      double old_err = 0.0;
      for (Index j = 0; j < m; ++j) old_err += residual.col(omega[static_cast<std::size_t>(j)].first).squaredNorm();
      if (!(sigma > 0.0) || new_res.squaredNorm() > old_err) continue;

      D.col(k) = u;
      for (Index j = 0; j < m; ++j) {
        const auto [s, slot] = omega[static_cast<std::size_t>(j)];
        codes.columns[static_cast<std::size_t>(s)].values[slot] = sigma * v(j);
        residual.col(s) = new_res.col(j);
      }
    }
    // Keep unit norm exact to working precision after the update.
    for (Index k = 0; k < K; ++k) D.col(k).normalize();
    for (Index s = 0; s < n; ++s) {
      residual.col(s) = A.col(s) - reconstruct(D, codes.columns[static_cast<std::size_t>(s)]);
    }
    replaced += clear_duplicates(A, D, codes, residual, options.sparsity);
    return residual.squaredNorm();
  };

  // Plain passes escape poor local optima better; a pass that ends above the
  // previous error is redone from the saved state in the monotone mode.
  double previous = residual.squaredNorm();
  for (std::size_t it = 0; it < options.iterations; ++it) {
    const Eigen::MatrixXd saved_D = D;
    const Codes saved_codes = codes;
    const Eigen::MatrixXd saved_residual = residual;
    std::size_t replaced = 0;
    double objective = iterate(false, replaced);
    if (objective > previous) {
      D = saved_D;
      codes = saved_codes;
      residual = saved_residual;
      replaced = 0;
      objective = iterate(true, replaced);
    }
    tr.replaced_atoms += replaced;
    tr.objective.push_back(objective);
    previous = objective;
  }

  // HR dictionary: least squares against the final codes.
  const Eigen::MatrixXd gamma = codes.dense(K);
  Eigen::MatrixXd normal = gamma * gamma.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  bool singular = llt.info() != Eigen::Success;
  if (!singular) {
    const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
    singular = d.minCoeff() <= 1e-10 * d.maxCoeff();
  }
  if (singular) {
    normal.diagonal().array() += 1e-8;
    llt.compute(normal);
    tr.damped_high_solve = true;
    if (llt.info() != Eigen::Success) throw NumericalError("HR dictionary solve failed");
  }
  const Eigen::MatrixXd rhs = gamma * samples.hr_patches.transpose();  // K x hr_dim

  DictionaryPair pair;
  pair.low = std::move(D);
  pair.high = llt.solve(rhs).transpose();
  if (!pair.high.allFinite()) throw NumericalError("HR dictionary contains non-finite values");
  return pair;
}

}  // namespace bsr
