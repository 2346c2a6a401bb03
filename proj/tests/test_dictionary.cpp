#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bsr/dictionary.hpp"
#include "bsr/errors.hpp"
#include "bsr/features.hpp"
#include "bsr/sparse.hpp"
#include "support.hpp"

using namespace bsr;
using bsr::testing::random_matrix;
using bsr::testing::random_unit_dictionary;

namespace {

DictionaryPair random_pair(Eigen::Index feature_dim, Eigen::Index atoms, std::uint64_t seed) {
  DictionaryPair pair;
  pair.features.patch_size = 16;
  pair.features.overlap = 4;
  pair.features.basis = Eigen::MatrixXd::Identity(1024, feature_dim);
  pair.low = random_unit_dictionary(feature_dim, atoms, seed);
  pair.high = random_matrix(256, atoms, seed + 1);
  return pair;
}

// Grid of random feature columns at the 64x64 / 16 / 4 geometry.
PatchGrid feature_grid(Eigen::Index dim, std::uint64_t seed) {
  PatchGrid g = make_grid(64, 64, 16, 4);
  g.patches = random_matrix(dim, static_cast<Eigen::Index>(g.count()), seed);
  return g;
}

}  // namespace

// ---- K-SVD ----

TEST(Ksvd, PlantedDictionaryRecovery) {
  const Eigen::Index dim = 20, K = 50, n = 1500;
  const Eigen::MatrixXd truth = random_unit_dictionary(dim, K, 1);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<Eigen::Index> pick(0, K - 1);
  std::normal_distribution<double> coef(0.0, 1.0);
  TrainingPairs s;
  s.features = Eigen::MatrixXd::Zero(dim, n);
  s.hr_patches = Eigen::MatrixXd::Zero(4, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> used;
    while (used.size() < 3) {
      const Eigen::Index k = pick(rng);
      if (std::find(used.begin(), used.end(), k) == used.end()) used.push_back(k);
    }
    for (Eigen::Index k : used) s.features.col(i) += coef(rng) * truth.col(k);
  }
  KsvdOptions opt;
  opt.atoms = K;
  opt.iterations = 60;
  opt.sparsity = 3;
  opt.seed = 3;
  const DictionaryPair learned = train_dictionary(s, opt);
  const Eigen::MatrixXd corr = (truth.transpose() * learned.low).cwiseAbs();
  int recovered = 0;
  for (Eigen::Index k = 0; k < K; ++k) recovered += corr.row(k).maxCoeff() > 0.99 ? 1 : 0;
  EXPECT_GE(recovered, 45) << recovered << " of " << K;
}

TEST(Ksvd, OrthonormalSamplesExact) {
  const Eigen::MatrixXd q = random_matrix(8, 8, 4).householderQr().householderQ();
  TrainingPairs s{q, random_matrix(9, 8, 5)};
  KsvdOptions opt;
  opt.atoms = 8;
  opt.iterations = 3;
  opt.sparsity = 1;
  KsvdTrace trace;
  const DictionaryPair p = train_dictionary(s, opt, &trace);
  const Eigen::MatrixXd corr = (q.transpose() * p.low).cwiseAbs();
  for (Eigen::Index k = 0; k < 8; ++k) EXPECT_NEAR(corr.row(k).maxCoeff(), 1.0, 1e-12);
  for (double o : trace.objective) EXPECT_LT(o, 1e-20);
  // One code per sample, each the unit coefficient of its own atom: the HR
  // dictionary reproduces the HR samples.
  const CodingDictionary d(p.low);
  Eigen::MatrixXd rec(9, 8);
  for (Eigen::Index i = 0; i < 8; ++i) rec.col(i) = p.high * omp(q.col(i), d, 1).dense();
  EXPECT_LT((rec - s.hr_patches).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ksvd, MonotoneObjectiveAndUnitAtoms) {
  TrainingPairs s{random_matrix(12, 400, 6), random_matrix(16, 400, 7)};
  KsvdOptions opt;
  opt.atoms = 40;
  opt.iterations = 15;
  opt.sparsity = 3;
  KsvdTrace trace;
  const DictionaryPair p = train_dictionary(s, opt, &trace);
  ASSERT_EQ(trace.objective.size(), 15u);
  for (std::size_t k = 1; k < trace.objective.size(); ++k)
    EXPECT_LE(trace.objective[k], trace.objective[k - 1] * (1.0 + 1e-9)) << k;
  for (Eigen::Index k = 0; k < p.low.cols(); ++k) EXPECT_NEAR(p.low.col(k).norm(), 1.0, 1e-10);
  EXPECT_EQ(p.high.cols(), 40);
  EXPECT_EQ(p.high.rows(), 16);
}

TEST(Ksvd, DeterministicGivenSeed) {
  TrainingPairs s{random_matrix(6, 100, 8), random_matrix(4, 100, 9)};
  KsvdOptions opt;
  opt.atoms = 10;
  opt.iterations = 4;
  const DictionaryPair a = train_dictionary(s, opt);
  const DictionaryPair b = train_dictionary(s, opt);
  EXPECT_EQ(a.low, b.low);
  EXPECT_EQ(a.high, b.high);
}

TEST(Ksvd, Errors) {
  TrainingPairs s{random_matrix(6, 5, 8), random_matrix(4, 5, 9)};
  KsvdOptions opt;
  opt.atoms = 10;
  EXPECT_THROW((void)train_dictionary(s, opt), DataError);
  s.hr_patches = random_matrix(4, 4, 1);
  opt.atoms = 2;
  EXPECT_THROW((void)train_dictionary(s, opt), DataError);
}

// ---- anchors ----

TEST(Anchors, NeighborhoodOrdering) {
  const DictionaryPair pair = random_pair(10, 30, 10);
  const AnchorSet a = build_anchors(pair, 7, 1e-4);
  a.validate(pair);
  const Eigen::MatrixXd gram = pair.low.transpose() * pair.low;
  for (Eigen::Index k = 0; k < 30; ++k) {
    const auto& nb = a.neighbors[static_cast<std::size_t>(k)];
    ASSERT_EQ(nb.size(), 7u);
    EXPECT_EQ(nb[0], k);
    for (std::size_t j = 2; j < nb.size(); ++j)
      EXPECT_GE(std::abs(gram(k, nb[j - 1])), std::abs(gram(k, nb[j])));
    EXPECT_TRUE(a.projections[static_cast<std::size_t>(k)].allFinite());
  }
}

TEST(Anchors, GlobalNeighborhoodIsFullRidge) {
  const DictionaryPair pair = random_pair(10, 16, 11);
  const double lam = 1e-4;
  const AnchorSet a = build_anchors(pair, 16, lam);
  const Eigen::MatrixXd& L = pair.low;
  const Eigen::MatrixXd full =
      pair.high * (L.transpose() * L + lam * Eigen::MatrixXd::Identity(16, 16)).inverse() * L.transpose();
  for (const auto& p : a.projections) EXPECT_LT((p - full).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Anchors, TwoAtomClosedForm) {
  DictionaryPair pair = random_pair(2, 2, 12);
  pair.features.basis = Eigen::MatrixXd::Identity(1024, 2);
  pair.low = Eigen::MatrixXd::Identity(2, 2);
  const double lam = 1e-4;
  const AnchorSet a = build_anchors(pair, 1, lam);
  for (Eigen::Index k = 0; k < 2; ++k) {
    const Eigen::MatrixXd expect = pair.high.col(k) * pair.low.col(k).transpose() / (1.0 + lam);
    EXPECT_LT((a.projections[static_cast<std::size_t>(k)] - expect).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Anchors, OfflineMatchesOnlineRidge) {
  const DictionaryPair pair = random_pair(36, 128, 13);
  const AnchorSet a = build_anchors(pair, 40, 1e-4);
  PatchGrid feats = feature_grid(36, 14);
  // Include an exact atom as one of the inputs.
  feats.patches.col(3) = pair.low.col(17);
  const PatchGrid out = anr_reconstruct(feats, a, pair);
  ASSERT_EQ(out.count(), 25u);
  ASSERT_EQ(out.patches.rows(), 256);
  EXPECT_EQ(nearest_anchor(pair.low, feats.patches.col(3)), 17);
  for (Eigen::Index n = 0; n < 25; ++n) {
    const Eigen::VectorXd f = feats.patches.col(n);
    const auto& nb = a.neighbors[static_cast<std::size_t>(nearest_anchor(pair.low, f))];
    Eigen::MatrixXd nl(36, 40), nh(256, 40);
    for (Eigen::Index j = 0; j < 40; ++j) {
      nl.col(j) = pair.low.col(nb[static_cast<std::size_t>(j)]);
      nh.col(j) = pair.high.col(nb[static_cast<std::size_t>(j)]);
    }
    const Eigen::VectorXd online = nh * ridge_solve(f, nl, 1e-4);
    EXPECT_LT((out.patches.col(n) - online).cwiseAbs().maxCoeff(), 1e-10) << n;
  }
}

TEST(Anchors, ZeroFeatureAndLinearity) {
  const DictionaryPair pair = random_pair(12, 40, 15);
  const AnchorSet a = build_anchors(pair, 10, 1e-4);
  PatchGrid feats = feature_grid(12, 16);
  feats.patches.col(0).setZero();
  const PatchGrid out = anr_reconstruct(feats, a, pair);
  EXPECT_EQ(out.patches.col(0).cwiseAbs().maxCoeff(), 0.0);
  for (double s : {2.5, -0.3}) {
    PatchGrid scaled = feats;
    scaled.patches *= s;
    const PatchGrid so = anr_reconstruct(scaled, a, pair);
    EXPECT_LT((so.patches - s * out.patches).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Anchors, NearestAnchorTies) {
  const Eigen::MatrixXd low = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_EQ(nearest_anchor(low, Eigen::Vector3d::Zero()), 0);
  EXPECT_EQ(nearest_anchor(low, Eigen::Vector3d(0.0, -1.0, 1.0)), 1);
  EXPECT_EQ(nearest_anchor(low, Eigen::Vector3d(0.1, 0.2, -0.5)), 2);
}

TEST(Anchors, Errors) {
  const DictionaryPair pair = random_pair(6, 8, 17);
  EXPECT_THROW((void)build_anchors(pair, 0, 1e-4), UsageError);
  EXPECT_THROW((void)build_anchors(pair, 9, 1e-4), UsageError);
  const AnchorSet a = build_anchors(pair, 3, 1e-4);
  EXPECT_THROW((void)anr_reconstruct(feature_grid(7, 1), a, pair), DataError);
  DictionaryPair bad = pair;
  bad.high = random_matrix(256, 7, 1);
  EXPECT_THROW(bad.validate(), DataError);
  bad = pair;
  bad.low.col(0) *= 2.0;
  EXPECT_THROW(bad.validate(), DataError);
}
