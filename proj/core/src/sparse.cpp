#include "bsr/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bsr/errors.hpp"

namespace bsr {

Eigen::VectorXd SparseCode::dense() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dict_size);
  for (std::size_t k = 0; k < indices.size(); ++k) out(indices[k]) = values[k];
  return out;
}

SparseCode SparseCode::from_dense(const Eigen::VectorXd& coefficients) {
  SparseCode code;
  code.dict_size = coefficients.size();
  for (Eigen::Index k = 0; k < coefficients.size(); ++k) {
    if (coefficients(k) != 0.0) {
      code.indices.push_back(k);
      code.values.push_back(coefficients(k));
    }
  }
  return code;
}

Eigen::MatrixXd normalize_columns(Eigen::MatrixXd atoms) {
  for (Eigen::Index k = 0; k < atoms.cols(); ++k) {
    const double n = atoms.col(k).norm();
    if (!(n > 0.0)) throw DataError("cannot normalize zero dictionary column " + std::to_string(k));
    atoms.col(k) /= n;
  }
  return atoms;
}

CodingDictionary::CodingDictionary(Eigen::MatrixXd atoms) : atoms_(std::move(atoms)) {
  if (atoms_.cols() == 0 || atoms_.rows() == 0) throw DataError("empty dictionary");
  for (Eigen::Index k = 0; k < atoms_.cols(); ++k) {
    if (std::abs(atoms_.col(k).norm() - 1.0) > 1e-10) {
      throw DataError("dictionary column " + std::to_string(k) + " is not unit norm");
    }
  }
  gram_ = atoms_.transpose() * atoms_;
}

SparseCode omp(const Eigen::VectorXd& signal, const CodingDictionary& dictionary,
               std::size_t sparsity, double tolerance, OmpTrace* trace) {
  if (sparsity < 1) throw UsageError("OMP sparsity budget must be at least 1");
  if (signal.size() != dictionary.dim()) throw DataError("signal length does not match dictionary");
  const auto& D = dictionary.atoms();
  const auto& G = dictionary.gram();
  const Eigen::Index K = dictionary.size();
  const auto budget = std::min<Eigen::Index>(static_cast<Eigen::Index>(sparsity), std::min(K, D.rows()));

  SparseCode code;
  code.dict_size = K;
  if (trace != nullptr) *trace = {};

  const Eigen::VectorXd projections = D.transpose() * signal;
  Eigen::VectorXd residual = signal;
  if (residual.norm() < tolerance) return code;

  std::vector<Eigen::Index> support;
  std::vector<char> selected(static_cast<std::size_t>(K), 0);
  Eigen::MatrixXd L(budget, budget);  // Cholesky factor of the support Gram matrix
  Eigen::VectorXd coeffs;
  Eigen::VectorXd correlations = projections;

  while (static_cast<Eigen::Index>(support.size()) < budget) {
    Eigen::Index best = -1;
    double best_abs = -1.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      if (selected[static_cast<std::size_t>(k)]) continue;
      const double a = std::abs(correlations(k));
      if (a > best_abs) {
        best_abs = a;
        best = k;
      }
    }
    if (best < 0 || best_abs == 0.0) break;

    const auto s = static_cast<Eigen::Index>(support.size());
    if (s == 0) {
      L(0, 0) = std::sqrt(G(best, best));
    } else {
      Eigen::VectorXd g(s);
      for (Eigen::Index j = 0; j < s; ++j) g(j) = G(support[static_cast<std::size_t>(j)], best);
      const Eigen::VectorXd w =
          L.topLeftCorner(s, s).triangularView<Eigen::Lower>().solve(g);
      const double pivot = G(best, best) - w.squaredNorm();
      if (!(pivot > 1e-10 * G(best, best))) {
        if (trace != nullptr) trace->rank_deficient = true;
        break;
      }
      L.row(s).head(s) = w.transpose();
      L(s, s) = std::sqrt(pivot);
    }
    support.push_back(best);
    selected[static_cast<std::size_t>(best)] = 1;

    const auto n = static_cast<Eigen::Index>(support.size());
    Eigen::VectorXd rhs(n);
    for (Eigen::Index j = 0; j < n; ++j) rhs(j) = projections(support[static_cast<std::size_t>(j)]);
    const auto Ln = L.topLeftCorner(n, n).triangularView<Eigen::Lower>();
    coeffs = Ln.transpose().solve(Ln.solve(rhs));

    residual = signal;
    for (Eigen::Index j = 0; j < n; ++j) residual -= coeffs(j) * D.col(support[static_cast<std::size_t>(j)]);
    const double rnorm = residual.norm();
    if (trace != nullptr) trace->residual_norms.push_back(rnorm);
    if (rnorm < tolerance) break;
    correlations.noalias() = D.transpose() * residual;
  }

  for (std::size_t j = 0; j < support.size(); ++j) {
    const double v = coeffs(static_cast<Eigen::Index>(j));
    if (!std::isfinite(v)) throw NumericalError("OMP produced a non-finite coefficient");
    code.indices.push_back(support[j]);
    code.values.push_back(v);
  }
  return code;
}

void CodingProblem::validate() const {
  if (dictionary == nullptr) throw DataError("coding problem has no dictionary");
  if (signal.size() != dictionary->dim()) throw DataError("signal length does not match dictionary");
  if (!(lambda > 0.0)) throw UsageError("l1 weight lambda must be positive");
  if (!(fidelity_weight > 0.0)) throw UsageError("fidelity weight must be positive");
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double l1_objective(const CodingProblem& problem, const Eigen::VectorXd& code) {
  const double s2 = problem.fidelity_weight * problem.fidelity_weight;
  const Eigen::VectorXd r = problem.signal - problem.dictionary->atoms() * code;
  return s2 * r.squaredNorm() + problem.lambda * code.lpNorm<1>();
}

namespace {

// Coordinate descent state for ||y - D a||^2 + lam ||a||_1 with covariance
// updates: corr = D^T (y - D a).
class CoordinateDescent {
 public:
  CoordinateDescent(const CodingDictionary& dict, const Eigen::VectorXd& signal)
      : G_(dict.gram()), alpha_(Eigen::VectorXd::Zero(dict.size())),
        corr_(dict.atoms().transpose() * signal) {}

  [[nodiscard]] double max_correlation() const { return corr_.cwiseAbs().maxCoeff(); }
  [[nodiscard]] const Eigen::VectorXd& alpha() const { return alpha_; }

  // Runs sweeps at `lambda` until a converged full sweep or `max_sweeps`.
  // Returns {sweeps, converged}; `after_sweep` is invoked after every sweep.
  template <typename Callback>
  std::pair<std::size_t, bool> solve(double lambda, double tolerance, std::size_t max_sweeps,
                                     Callback&& after_sweep) {
    // The fidelity carries no 1/2 factor, so the coordinate minimizer of
    // ||y - D a||^2 + lam |a_j| is soft(z, lam / 2) / G_jj.
    const double threshold = 0.5 * lambda;
    const Eigen::Index K = alpha_.size();
    bool full_sweep = true;
    std::vector<Eigen::Index> active;
    std::size_t sweeps = 0;
    while (sweeps < max_sweeps) {
      double max_change = 0.0;
      if (full_sweep) {
        for (Eigen::Index j = 0; j < K; ++j) max_change = std::max(max_change, update(j, threshold));
      } else {
        for (Eigen::Index j : active) max_change = std::max(max_change, update(j, threshold));
      }
      ++sweeps;
      after_sweep(alpha_);
      if (max_change < tolerance) {
        if (full_sweep) return {sweeps, true};
        full_sweep = true;
      } else if (full_sweep) {
        active.clear();
        for (Eigen::Index j = 0; j < K; ++j) {
          if (alpha_(j) != 0.0) active.push_back(j);
        }
        full_sweep = active.empty();
      }
    }
    return {sweeps, false};
  }

 private:
  double update(Eigen::Index j, double threshold) {
    const double gjj = G_(j, j);
    const double z = corr_(j) + gjj * alpha_(j);
    const double next = soft_threshold(z, threshold) / gjj;
    const double delta = next - alpha_(j);
    if (delta != 0.0) {
      corr_.noalias() -= delta * G_.col(j);
      alpha_(j) = next;
    }
    return std::abs(delta);
  }

  const Eigen::MatrixXd& G_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd corr_;
};

}  // namespace

SparseCode weighted_l1_code(const CodingProblem& problem, const L1Options& options,
                            L1Diagnostics* diagnostics) {
  problem.validate();
  const double target = problem.effective_lambda();
  CoordinateDescent cd(*problem.dictionary, problem.signal);
  L1Diagnostics diag;

  if (options.continuation_ratio > 0.0 && options.continuation_ratio < 1.0) {
    // Above 2 max|D^T y| the solution is exactly zero.
    double lam = 2.0 * cd.max_correlation() * options.continuation_ratio;
    while (lam > target) {
      diag.path_sweeps += cd.solve(lam, options.tolerance, options.max_sweeps, [](const auto&) {}).first;
      lam *= options.continuation_ratio;
    }
  }

  const auto [sweeps, converged] =
      cd.solve(target, options.tolerance, options.max_sweeps, [&](const Eigen::VectorXd& a) {
        if (options.record_history) diag.objective_history.push_back(l1_objective(problem, a));
      });
  diag.sweeps = sweeps;
  diag.converged = converged;

  const Eigen::VectorXd& alpha = cd.alpha();
  if (!alpha.allFinite()) throw NumericalError("l1 coding produced a non-finite coefficient");
  diag.objective = l1_objective(problem, alpha);
  if (diagnostics != nullptr) *diagnostics = std::move(diag);
  return SparseCode::from_dense(alpha);
}

namespace {

Eigen::LLT<Eigen::MatrixXd> factor_ridge(const Eigen::MatrixXd& atoms, double lambda) {
  if (atoms.cols() == 0) throw DataError("ridge regression needs at least one atom");
  if (lambda < 0.0) throw UsageError("ridge lambda must be non-negative");
  Eigen::MatrixXd normal = atoms.transpose() * atoms;
  normal.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  bool singular = llt.info() != Eigen::Success;
  if (!singular) {
    const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
    singular = d.minCoeff() <= 1e-8 * d.maxCoeff();
  }
  if (singular) {
    throw NumericalError("ridge system is singular; use lambda > 0 (got " +
                         std::to_string(lambda) + ")");
  }
  return llt;
}

}  // namespace

Eigen::VectorXd ridge_solve(const Eigen::VectorXd& signal, const Eigen::MatrixXd& atoms,
                            double lambda) {
  if (signal.size() != atoms.rows()) throw DataError("signal length does not match atoms");
  const auto llt = factor_ridge(atoms, lambda);
  return llt.solve(atoms.transpose() * signal);
}

Eigen::MatrixXd ridge_operator(const Eigen::MatrixXd& atoms, double lambda) {
  const auto llt = factor_ridge(atoms, lambda);
  return llt.solve(atoms.transpose());
}

}  // namespace bsr
