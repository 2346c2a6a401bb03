#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "bsr/errors.hpp"
#include "bsr/sparse.hpp"
#include "support.hpp"

using namespace bsr;
using bsr::testing::random_matrix;
using bsr::testing::random_unit_dictionary;

namespace {

// Planted 3-sparse signal with coefficients bounded away from zero.
Eigen::VectorXd planted(const Eigen::MatrixXd& d, std::mt19937_64& rng, std::set<Eigen::Index>& support) {
  std::uniform_int_distribution<Eigen::Index> pick(0, d.cols() - 1);
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::bernoulli_distribution sign(0.5);
  support.clear();
  while (support.size() < 3) support.insert(pick(rng));
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d.rows());
  for (Eigen::Index k : support) y += (sign(rng) ? 1.0 : -1.0) * mag(rng) * d.col(k);
  return y;
}

std::set<Eigen::Index> exhaustive_best_support(const Eigen::MatrixXd& d, const Eigen::VectorXd& y) {
  double best = std::numeric_limits<double>::infinity();
  std::set<Eigen::Index> arg;
  Eigen::MatrixXd sub(d.rows(), 3);
  for (Eigen::Index a = 0; a < d.cols(); ++a)
    for (Eigen::Index b = a + 1; b < d.cols(); ++b)
      for (Eigen::Index c = b + 1; c < d.cols(); ++c) {
        sub << d.col(a), d.col(b), d.col(c);
        const Eigen::Vector3d x = sub.colPivHouseholderQr().solve(y);
        const double r = (y - sub * x).norm();
        if (r < best) {
          best = r;
          arg = {a, b, c};
        }
      }
  return arg;
}

CodingProblem problem_for(const CodingDictionary& d, const Eigen::VectorXd& y, double lambda,
                          double s = 1.0) {
  CodingProblem p;
  p.signal = y;
  p.dictionary = &d;
  p.lambda = lambda;
  p.fidelity_weight = s;
  return p;
}

}  // namespace

// ---- OMP ----

TEST(Omp, SingleAtom) {
  const CodingDictionary d(random_unit_dictionary(10, 8, 1));
  const SparseCode c = omp(d.atoms().col(3), d, 3);
  ASSERT_EQ(c.nnz(), 1u);
  EXPECT_EQ(c.indices[0], 3);
  EXPECT_NEAR(c.values[0], 1.0, 1e-12);
  EXPECT_EQ(c.dict_size, 8);
}

TEST(Omp, OrthogonalPair) {
  const CodingDictionary d(Eigen::MatrixXd::Identity(6, 6));
  Eigen::VectorXd y = 2.0 * d.atoms().col(1) + 1.0 * d.atoms().col(4);
  const Eigen::VectorXd a = omp(y, d, 2).dense();
  EXPECT_DOUBLE_EQ(a(1), 2.0);
  EXPECT_DOUBLE_EQ(a(4), 1.0);
  EXPECT_EQ(a.cwiseAbs().sum(), 3.0);
}

TEST(Omp, TieBreaksToLowestIndex) {
  const CodingDictionary d(Eigen::MatrixXd::Identity(4, 4));
  const SparseCode c = omp(Eigen::Vector4d(0.0, 1.0, 0.0, 1.0), d, 1);
  ASSERT_EQ(c.nnz(), 1u);
  EXPECT_EQ(c.indices[0], 1);
}

TEST(Omp, MatchesExhaustiveSearch) {
  const Eigen::MatrixXd atoms = random_unit_dictionary(30, 60, 7);
  const CodingDictionary d(atoms);
  std::mt19937_64 rng(11);
  std::set<Eigen::Index> truth;
  int agree = 0;
  const int trials = 8;
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXd y = planted(atoms, rng, truth);
    const std::set<Eigen::Index> best = exhaustive_best_support(atoms, y);
    EXPECT_EQ(best, truth);
    const SparseCode c = omp(y, d, 3);
    const std::set<Eigen::Index> got(c.indices.begin(), c.indices.end());
    if (got == best) {
      ++agree;
      EXPECT_LT((y - atoms * c.dense()).norm(), 1e-8);
    }
  }
  EXPECT_GE(agree, trials - 1);
}

TEST(Omp, ResidualNonIncreasingAndBudget) {
  const CodingDictionary d(random_unit_dictionary(20, 50, 3));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd y(20);
    for (auto& v : y) v = n(rng);
    OmpTrace trace;
    const SparseCode c = omp(y, d, 8, 1e-12, &trace);
    EXPECT_LE(c.nnz(), 8u);
    ASSERT_EQ(trace.residual_norms.size(), c.nnz());
    double prev = y.norm();
    for (double r : trace.residual_norms) {
      EXPECT_LE(r, prev + 1e-12);
      prev = r;
    }
    std::set<Eigen::Index> unique(c.indices.begin(), c.indices.end());
    EXPECT_EQ(unique.size(), c.nnz());
  }
}

TEST(Omp, RankDeficientAtomDropped) {
  Eigen::MatrixXd a(2, 3);
  a << 1.0, 0.0, 1.0, 0.0, 1.0, 1.0;
  const CodingDictionary d(normalize_columns(a));
  OmpTrace trace;
  // Two atoms span R^2, so the residual vanishes before a third is tried.
  const SparseCode c = omp(Eigen::Vector2d(3.0, 1.0), d, 3, 1e-12, &trace);
  EXPECT_LE(c.nnz(), 2u);
  EXPECT_LT((Eigen::Vector2d(3.0, 1.0) - d.atoms() * c.dense()).norm(), 1e-12);
}

TEST(Omp, Errors) {
  const CodingDictionary d(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_THROW((void)omp(Eigen::Vector3d::Ones(), d, 0), UsageError);
  EXPECT_THROW((void)omp(Eigen::Vector2d::Ones(), d, 1), DataError);
  EXPECT_THROW(CodingDictionary(Eigen::MatrixXd::Ones(3, 2)), DataError);
  EXPECT_THROW((void)normalize_columns(Eigen::MatrixXd::Zero(3, 2)), DataError);
}

// ---- l1 coordinate descent ----

TEST(L1, SoftThreshold) {
  EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
  EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
  EXPECT_EQ(soft_threshold(-1.0, 1.0), 0.0);
}

TEST(L1, SingleAtomClosedForm) {
  Eigen::VectorXd atom(3);
  atom << 1.0, 2.0, 2.0;
  atom /= 3.0;
  const CodingDictionary d(atom);
  const double triples[][3] = {{0.9, 0.1, 1.0}, {0.9, 0.1, 2.0}, {-0.4, 0.3, 1.0},
                               {0.2, 0.5, 0.5}, {2.0, 1e-4, 3.0}, {0.05, 0.2, 1.0}};
  for (const auto& t : triples) {
    const Eigen::VectorXd y = t[0] * atom + Eigen::Vector3d(0.02, -0.01, 0.0);
    const CodingProblem p = problem_for(d, y, t[1], t[2]);
    const double expect = soft_threshold(atom.dot(y), p.effective_lambda() / 2.0);
    const Eigen::VectorXd a = weighted_l1_code(p).dense();
    EXPECT_NEAR(a(0), expect, 1e-14) << t[0] << " " << t[1] << " " << t[2];
  }
}

TEST(L1, HugeLambdaGivesZero) {
  const CodingDictionary d(random_unit_dictionary(12, 30, 2));
  const Eigen::VectorXd y = random_matrix(12, 1, 3).col(0);
  const SparseCode c = weighted_l1_code(problem_for(d, y, 1e6));
  EXPECT_EQ(c.nnz(), 0u);
}

TEST(L1, UnitWeightIsUnweighted) {
  const CodingDictionary d(random_unit_dictionary(12, 30, 4));
  const Eigen::VectorXd y = random_matrix(12, 1, 5).col(0);
  const Eigen::VectorXd a = weighted_l1_code(problem_for(d, y, 0.05, 1.0)).dense();
  CodingProblem p = problem_for(d, y, 0.05);
  const Eigen::VectorXd b = weighted_l1_code(p).dense();
  EXPECT_EQ(a, b);
}

TEST(L1, ScalingInvariance) {
  const CodingDictionary d(random_unit_dictionary(16, 40, 6));
  const Eigen::VectorXd y = random_matrix(16, 1, 7).col(0);
  for (double s : {0.5, 1.3, 2.7}) {
    const Eigen::VectorXd weighted = weighted_l1_code(problem_for(d, y, 0.1, s)).dense();
    const Eigen::VectorXd plain = weighted_l1_code(problem_for(d, y, 0.1 / (s * s))).dense();
    EXPECT_LT((weighted - plain).cwiseAbs().maxCoeff(), 1e-6) << s;
  }
}

TEST(L1, OptimalityConditions) {
  const CodingDictionary d(random_unit_dictionary(15, 25, 8));
  const Eigen::VectorXd y = random_matrix(15, 1, 9).col(0);
  for (double s : {1.0, 1.7}) {
    const CodingProblem p = problem_for(d, y, 0.2, s);
    L1Options opt;
    opt.tolerance = 1e-12;
    opt.max_sweeps = 100000;
    L1Diagnostics diag;
    const Eigen::VectorXd a = weighted_l1_code(p, opt, &diag).dense();
    ASSERT_TRUE(diag.converged);
    // Subgradient of ||y - Da||^2 + lam_eff ||a||_1 contains zero.
    const Eigen::VectorXd g = 2.0 * d.atoms().transpose() * (y - d.atoms() * a);
    const double lam = p.effective_lambda();
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      if (a(j) != 0.0) {
        EXPECT_NEAR(g(j), lam * (a(j) > 0 ? 1.0 : -1.0), 1e-8);
      } else {
        EXPECT_LE(std::abs(g(j)), lam + 1e-8);
      }
    }
    EXPECT_NEAR(diag.objective, l1_objective(p, a), 1e-15);
  }
}

TEST(L1, ObjectiveNonIncreasingAcrossSweeps) {
  const CodingDictionary d(random_unit_dictionary(36, 128, 10));
  std::mt19937_64 rng(12);
  for (double ratio : {0.0, 0.1}) {
    for (int t = 0; t < 10; ++t) {
      const Eigen::VectorXd y = random_matrix(36, 1, rng()).col(0);
      L1Options opt;
      opt.record_history = true;
      opt.continuation_ratio = ratio;
      L1Diagnostics diag;
      (void)weighted_l1_code(problem_for(d, y, 1e-3, 1.2), opt, &diag);
      ASSERT_EQ(diag.objective_history.size(), diag.sweeps);
      for (std::size_t k = 1; k < diag.objective_history.size(); ++k) {
        EXPECT_LE(diag.objective_history[k], diag.objective_history[k - 1] * (1.0 + 1e-12));
      }
      if (ratio == 0.0) EXPECT_EQ(diag.path_sweeps, 0u);
    }
  }
}

TEST(L1, ContinuationReachesSameOptimum) {
  const CodingDictionary d(random_unit_dictionary(10, 20, 13));
  const Eigen::VectorXd y = random_matrix(10, 1, 14).col(0);
  L1Options cold;
  cold.continuation_ratio = 0.0;
  cold.tolerance = 1e-13;
  cold.max_sweeps = 200000;
  L1Options warm = cold;
  warm.continuation_ratio = 0.1;
  const CodingProblem p = problem_for(d, y, 0.01);
  EXPECT_LT((weighted_l1_code(p, cold).dense() - weighted_l1_code(p, warm).dense()).cwiseAbs().maxCoeff(),
            1e-8);
}

TEST(L1, NonConvergenceFlagged) {
  const CodingDictionary d(random_unit_dictionary(36, 256, 15));
  const Eigen::VectorXd y = random_matrix(36, 1, 16).col(0);
  L1Options opt;
  opt.max_sweeps = 2;
  opt.continuation_ratio = 0.0;
  L1Diagnostics diag;
  const SparseCode c = weighted_l1_code(problem_for(d, y, 1e-4), opt, &diag);
  EXPECT_FALSE(diag.converged);
  EXPECT_EQ(diag.sweeps, 2u);
  for (double v : c.values) EXPECT_TRUE(std::isfinite(v));
  EXPECT_LT(diag.objective, y.squaredNorm());
}

TEST(L1, Errors) {
  const CodingDictionary d(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_THROW((void)weighted_l1_code(problem_for(d, Eigen::Vector3d::Ones(), 0.0)), UsageError);
  EXPECT_THROW((void)weighted_l1_code(problem_for(d, Eigen::Vector3d::Ones(), 0.1, 0.0)), UsageError);
  EXPECT_THROW((void)weighted_l1_code(problem_for(d, Eigen::Vector2d::Ones(), 0.1)), DataError);
  CodingProblem p;
  p.signal = Eigen::Vector3d::Ones();
  EXPECT_THROW((void)weighted_l1_code(p), DataError);
}

TEST(SparseCode, DenseRoundTrip) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(7);
  v(2) = -1.5;
  v(6) = 0.25;
  const SparseCode c = SparseCode::from_dense(v);
  EXPECT_EQ(c.nnz(), 2u);
  EXPECT_EQ(c.dense(), v);
}

// ---- ridge ----

TEST(Ridge, OrthonormalProjection) {
  Eigen::MatrixXd q = random_matrix(8, 3, 20).householderQr().householderQ() * Eigen::MatrixXd::Identity(8, 3);
  const Eigen::VectorXd y = random_matrix(8, 1, 21).col(0);
  EXPECT_LT((ridge_solve(y, q, 0.0) - q.transpose() * y).norm(), 1e-12);
}

TEST(Ridge, LargeLambdaVanishes) {
  const Eigen::MatrixXd n = random_matrix(20, 5, 22);
  const Eigen::VectorXd y = random_matrix(20, 1, 23).col(0);
  EXPECT_LT(ridge_solve(y, n, 1e12).norm(), 1e-9);
}

TEST(Ridge, NormalEquationOracle) {
  const Eigen::MatrixXd n = random_matrix(20, 5, 24);
  const Eigen::VectorXd y = random_matrix(20, 1, 25).col(0);
  const double lam = 1e-4;
  const Eigen::MatrixXd lhs = n.transpose() * n + lam * Eigen::MatrixXd::Identity(5, 5);
  const Eigen::VectorXd rhs = n.transpose() * y;
  const Eigen::VectorXd oracle = lhs.fullPivLu().solve(rhs);
  const Eigen::VectorXd beta = ridge_solve(y, n, lam);
  EXPECT_LT((beta - oracle).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((lhs * beta - rhs).norm(), 1e-8 * rhs.norm());
  EXPECT_LT((ridge_operator(n, lam) * y - beta).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ridge, SingularThrows) {
  Eigen::MatrixXd n(4, 2);
  n.col(0) = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
  n.col(1) = n.col(0);
  EXPECT_THROW((void)ridge_solve(Eigen::Vector4d::Ones(), n, 0.0), NumericalError);
  EXPECT_NO_THROW((void)ridge_solve(Eigen::Vector4d::Ones(), n, 1e-4));
  EXPECT_THROW((void)ridge_solve(Eigen::Vector4d::Ones(), n, -1.0), UsageError);
}
