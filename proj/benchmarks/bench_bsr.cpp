#include <benchmark/benchmark.h>

#include <random>

#include "bsr/back_projection.hpp"
#include "bsr/corpus.hpp"
#include "bsr/degradation.hpp"
#include "bsr/dictionary.hpp"
#include "bsr/pipeline.hpp"
#include "bsr/sparse.hpp"

using namespace bsr;

namespace {

Eigen::MatrixXd random_unit(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  m.colwise().normalize();
  return m;
}

// Small trained model shared by the image-level benchmarks.
struct Trained {
  Config config;
  DictionaryPair pair;
  AnchorSet anchors;
  CodingDictionary low;
  Image lr;

  static const Trained& get() {
    static const Trained t = [] {
      Config c;
      c.dict_size = 128;
      c.ksvd_iterations = 5;
      c.k_nn = 20;
      std::vector<Image> hr;
      for (auto& img : generate_corpus(30, 5)) hr.push_back(img.image);
      const Image test = hr.back();
      hr.pop_back();
      DictionaryStage s = train_dictionary_stage(hr, c);
      CodingDictionary low(s.pair.low);
      return Trained{c, std::move(s.pair), std::move(s.anchors), std::move(low), degrade(test, c.degradation())};
    }();
    return t;
  }
};

void BM_Omp(benchmark::State& state) {
  const auto K = state.range(0);
  const CodingDictionary dict(random_unit(36, K, 1));
  const Eigen::VectorXd y = random_unit(36, 1, 2).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(omp(y, dict, 3));
}
BENCHMARK(BM_Omp)->Arg(128)->Arg(512);

void BM_WeightedL1(benchmark::State& state) {
  const auto K = state.range(0);
  const CodingDictionary dict(random_unit(36, K, 3));
  const Eigen::VectorXd y = random_unit(36, 1, 4).col(0);
  const CodingProblem problem{y, &dict, 1e-4, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(weighted_l1_code(problem));
}
BENCHMARK(BM_WeightedL1)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);

void BM_SrSparse(benchmark::State& state) {
  const Trained& t = Trained::get();
  for (auto _ : state) benchmark::DoNotOptimize(sr_sparse(t.lr, t.pair, t.low, t.config.lambda));
}
BENCHMARK(BM_SrSparse)->Unit(benchmark::kMillisecond);

void BM_SrAnr(benchmark::State& state) {
  const Trained& t = Trained::get();
  for (auto _ : state) benchmark::DoNotOptimize(sr_anr(t.lr, t.pair, t.anchors));
}
BENCHMARK(BM_SrAnr)->Unit(benchmark::kMicrosecond);

void BM_BackProject(benchmark::State& state) {
  const Trained& t = Trained::get();
  const Image prior = sr_bicubic(t.lr, t.config.scale_factor);
  const DegradationModel deg = t.config.degradation();
  for (auto _ : state) benchmark::DoNotOptimize(back_project(prior, t.lr, deg));
}
BENCHMARK(BM_BackProject)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
