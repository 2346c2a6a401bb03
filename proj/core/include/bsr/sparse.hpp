#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace bsr {

/// Sparse coefficient vector over a dictionary of `dict_size` atoms.
struct SparseCode {
  std::vector<Eigen::Index> indices;
  std::vector<double> values;
  Eigen::Index dict_size = 0;

  [[nodiscard]] std::size_t nnz() const { return indices.size(); }
  [[nodiscard]] Eigen::VectorXd dense() const;
  [[nodiscard]] static SparseCode from_dense(const Eigen::VectorXd& coefficients);
};

/// Dictionary with unit-norm columns and its precomputed Gram matrix.
///
/// Construction rejects columns whose norm differs from 1 by more than 1e-10.
class CodingDictionary {
 public:
  explicit CodingDictionary(Eigen::MatrixXd atoms);

  [[nodiscard]] const Eigen::MatrixXd& atoms() const { return atoms_; }
  [[nodiscard]] const Eigen::MatrixXd& gram() const { return gram_; }
  [[nodiscard]] Eigen::Index size() const { return atoms_.cols(); }
  [[nodiscard]] Eigen::Index dim() const { return atoms_.rows(); }

 private:
  Eigen::MatrixXd atoms_;
  Eigen::MatrixXd gram_;
};

/// Normalizes every column to unit length; zero columns are rejected.
[[nodiscard]] Eigen::MatrixXd normalize_columns(Eigen::MatrixXd atoms);

struct OmpTrace {
  std::vector<double> residual_norms;  ///< after each accepted atom
  bool rank_deficient = false;
};

/// Orthogonal Matching Pursuit.
///
/// Picks the atom with the largest |correlation| with the residual (lowest
/// index on exact ties), then refits all selected coefficients by least
/// squares. Stops after `sparsity` atoms or once the residual norm drops below
/// `tolerance`. An atom that would make the support rank-deficient is dropped
/// and the pursuit stops.
[[nodiscard]] SparseCode omp(const Eigen::VectorXd& signal, const CodingDictionary& dictionary,
                             std::size_t sparsity, double tolerance = 1e-12,
                             OmpTrace* trace = nullptr);

/// One weighted l1 coding problem:
///   min_a || s (y - D a) ||^2 + lambda ||a||_1
/// with s = fidelity_weight. Solved as the unweighted problem with
/// lambda / s^2.
struct CodingProblem {
  Eigen::VectorXd signal;
  const CodingDictionary* dictionary = nullptr;
  double lambda = 1e-4;
  double fidelity_weight = 1.0;

  [[nodiscard]] double effective_lambda() const {
    return lambda / (fidelity_weight * fidelity_weight);
  }
  void validate() const;
};

struct L1Options {
  double tolerance = 1e-7;  ///< max coefficient change per sweep
  std::size_t max_sweeps = 1000;
  /// Warm-start through a geometric path of lambdas from the all-zero
  /// threshold down to the target (ratio per stage). 0 disables.
  double continuation_ratio = 0.1;
  bool record_history = false;
};

struct L1Diagnostics {
  std::size_t sweeps = 0;               ///< sweeps on the target lambda
  std::size_t path_sweeps = 0;          ///< sweeps spent on the continuation path
  bool converged = false;
  double objective = 0.0;               ///< weighted objective at the returned code
  std::vector<double> objective_history;  ///< after each target-lambda sweep (if recorded)
};

[[nodiscard]] double soft_threshold(double z, double t);

/// Weighted objective || s (y - D a) ||^2 + lambda ||a||_1.
[[nodiscard]] double l1_objective(const CodingProblem& problem, const Eigen::VectorXd& code);

/// Cyclic coordinate descent with covariance updates. Sweeps alternate
/// between the full atom set and the current active set; convergence is
/// declared only after a full sweep whose largest change is below tolerance.
/// The target problem is warm-started from a continuation path of larger
/// lambdas, each solved by the same sweeps; the sweep cap and the recorded
/// history apply to the target lambda.
[[nodiscard]] SparseCode weighted_l1_code(const CodingProblem& problem,
                                          const L1Options& options = {},
                                          L1Diagnostics* diagnostics = nullptr);

/// Closed-form ridge regression (N^T N + lambda I)^-1 N^T y.
/// Throws NumericalError when the system is singular (only possible with
/// lambda = 0).
[[nodiscard]] Eigen::VectorXd ridge_solve(const Eigen::VectorXd& signal,
                                          const Eigen::MatrixXd& atoms, double lambda);

/// The ridge operator (N^T N + lambda I)^-1 N^T itself, columns x rows.
[[nodiscard]] Eigen::MatrixXd ridge_operator(const Eigen::MatrixXd& atoms, double lambda);

}  // namespace bsr
