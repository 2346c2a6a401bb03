// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.
//
//   bsr_acceptance [--work <dir>]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <set>
#include <string>

#include "bsr/back_projection.hpp"
#include "bsr/boost.hpp"
#include "bsr/config.hpp"
#include "bsr/corpus.hpp"
#include "bsr/degradation.hpp"
#include "bsr/dictionary.hpp"
#include "bsr/evaluate.hpp"
#include "bsr/image.hpp"
#include "bsr/patches.hpp"
#include "bsr/pipeline.hpp"
#include "bsr/sparse.hpp"

using namespace bsr;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kCorpusSeed = 7;
constexpr std::size_t kDictImages = 100;
constexpr std::size_t kBoostImages = 10;
constexpr std::size_t kTestImages = 20;

int failures = 0;

void report(int id, bool pass, const std::string& what) {
  std::printf("[%s] %d %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(rng);
  return m;
}

// ---- 1 ----
void patch_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> side(4, 96);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t w = side(rng), h = side(rng);
    const std::size_t p = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>({w, h, 32}))(rng);
    const std::size_t ov = std::uniform_int_distribution<std::size_t>(0, p - 1)(rng);
    Image img(w, h);
    for (double& v : img.data) v = u(rng);
    worst = std::max(worst, max_abs_difference(img, aggregate_patches(extract_patches(img, p, ov))));
  }
  const double secs = seconds_since(t0);
  report(1, worst < 1e-12 && secs < 10.0,
         "patch round-trip: 200 random (size, overlap) configs, max |error| " + fmt("%.3g", worst) +
             " (< 1e-12), " + fmt("%.2f", secs) + " s (< 10 s)");
}

// ---- 2 ----
void omp_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  Eigen::MatrixXd atoms = gaussian_matrix(30, 60, rng);
  atoms.colwise().normalize();
  const CodingDictionary dict(atoms);
  std::uniform_int_distribution<Eigen::Index> pick(0, 59);
  std::normal_distribution<double> coef(0.0, 1.0);
  int recovered = 0;
  double worst_residual = 0.0;
  for (int t = 0; t < 500; ++t) {
    std::set<Eigen::Index> support;
    while (support.size() < 3) support.insert(pick(rng));
    Eigen::VectorXd y = Eigen::VectorXd::Zero(30);
    for (Eigen::Index k : support) y += coef(rng) * atoms.col(k);
    const SparseCode c = omp(y, dict, 3);
    if (std::set<Eigen::Index>(c.indices.begin(), c.indices.end()) == support) {
      ++recovered;
      worst_residual = std::max(worst_residual, (y - atoms * c.dense()).norm());
    }
  }
  const double rate = recovered / 500.0;
  const double secs = seconds_since(t0);
  report(2, rate >= 0.95 && worst_residual < 1e-8 && secs < 30.0,
         "OMP exact recovery: 500 planted 3-sparse signals over 30x60, support rate " + fmt("%.3f", rate) +
             " (>= 0.95), max residual on successes " + fmt("%.3g", worst_residual) + " (< 1e-8), " +
             fmt("%.2f", secs) + " s (< 30 s)");
}

// ---- full pipeline ----
struct Run {
  fs::path dir;
  Config config;
  DictionaryStage stage;
  BoostTrace boost_trace;
  Model model;
  EvalReport report;
  std::vector<NamedImage> test;
  std::vector<TrainingImage> boost_set;
  double seconds = 0.0;
};

Config acceptance_config() {
  Config c;
  c.scale_factor = 4;
  c.hr_patch_size = 16;
  c.hr_overlap = 4;
  c.lr_patch_size = 4;
  c.lr_overlap = 1;
  c.dict_size = 512;
  c.k_nn = 40;
  c.lambda = 1e-4;
  c.boost_rounds = 5;
  c.loss = LossKind::linear;
  c.boost_train_count = kBoostImages;
  c.seed = 1;
  return c;
}

Run run_pipeline(const fs::path& dir) {
  Run run;
  run.dir = dir;
  run.config = acceptance_config();
  fs::remove_all(dir);
  const auto t0 = std::chrono::steady_clock::now();

  const auto corpus = generate_corpus(kDictImages + kBoostImages + kTestImages, kCorpusSeed);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const char* part = i < kDictImages ? "dict" : i < kDictImages + kBoostImages ? "boost" : "test";
    fs::create_directories(dir / "data" / part);
    write_png(corpus[i].image, dir / "data" / part / corpus[i].name);
  }

  std::vector<Image> dict;
  for (auto& n : ingest_dataset(dir / "data" / "dict", DatasetRole::train_dict, run.config)) dict.push_back(n.image);
  run.stage = train_dictionary_stage(dict, run.config);
  save_dictionary_stage(dir / "model", run.config, run.stage.pair, run.stage.anchors);

  std::vector<Image> boost;
  for (auto& n : ingest_dataset(dir / "data" / "boost", DatasetRole::train_boost, run.config)) boost.push_back(n.image);
  run.boost_set = degrade_all(boost, run.config);
  const BoostModel bm = train_boost(run.boost_set, run.stage.pair, run.config.boost(), &run.boost_trace);
  save_boost_model(dir / "model" / kBoostFile, bm);

  run.model = load_model(dir / "model");
  run.test = ingest_dataset(dir / "data" / "test", DatasetRole::test, run.config);
  run.report = evaluate(run.test, {"bicubic", "sparse", "anr", "boost"}, run.model, dir / "eval");
  run.seconds = seconds_since(t0);
  return run;
}

std::vector<Image> test_inputs(const Run& run) {
  std::vector<Image> lr;
  for (std::size_t i = 0; i < run.test.size(); ++i)
    lr.push_back(degrade(run.test[i].image, run.config.degradation(noise_seed_for(run.config, i))));
  return lr;
}

// ---- 3 ----
void ksvd_monotone(const Run& run) {
  const auto& obj = run.stage.trace.objective;
  bool ok = obj.size() == run.config.ksvd_iterations && run.config.ksvd_iterations == 20;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < obj.size(); ++k) {
    const double rel = (obj[k] - obj[k - 1]) / obj[k - 1];
    worst = std::max(worst, rel);
    if (rel > 1e-9) ok = false;
  }
  report(3, ok,
         "K-SVD monotonicity: " + std::to_string(obj.size()) + " iterations, objective " +
             fmt("%.4f", obj.empty() ? 0.0 : obj.front()) + " -> " + fmt("%.4f", obj.empty() ? 0.0 : obj.back()) +
             ", largest relative step " + fmt("%.3g", worst) + " (<= 1e-9)");
}

// ---- 4 ----
void anr_equivalence(const Run& run) {
  const DictionaryPair& pair = run.model.pair;
  const AnchorSet& anchors = run.model.anchors;
  double worst = 0.0;
  std::size_t patches = 0;
  for (const Image& lr : test_inputs(run)) {
    const PreparedInput in = prepare_input(lr, pair);
    const PatchGrid out = anr_reconstruct(in.features, anchors, pair);
    for (Eigen::Index n = 0; n < in.features.patches.cols(); ++n) {
      const Eigen::VectorXd f = in.features.patches.col(n);
      const auto& nb = anchors.neighbors[static_cast<std::size_t>(nearest_anchor(pair.low, f))];
      const auto k = static_cast<Eigen::Index>(nb.size());
      Eigen::MatrixXd nl(pair.low.rows(), k), nh(pair.high.rows(), k);
      for (Eigen::Index j = 0; j < k; ++j) {
        nl.col(j) = pair.low.col(nb[static_cast<std::size_t>(j)]);
        nh.col(j) = pair.high.col(nb[static_cast<std::size_t>(j)]);
      }
      const Eigen::VectorXd online = nh * ridge_solve(f, nl, anchors.lambda);
      worst = std::max(worst, (out.patches.col(n) - online).cwiseAbs().maxCoeff());
      ++patches;
    }
  }
  report(4, worst <= 1e-10 && patches == kTestImages * 25,
         "ANR offline/online equivalence: " + std::to_string(patches) + " test patches, max |P f - N_h beta| " +
             fmt("%.3g", worst) + " (<= 1e-10)");
}

// ---- 5 ----
void boost_invariants(const Run& run) {
  const BoostModel& m = *run.model.boost;
  const auto& tr = run.boost_trace;
  bool simplex = true, betas = true, ordering = true, equal = true;
  double worst_sum = 0.0;
  for (std::size_t k = 0; k < m.rounds.size(); ++k) {
    const BoostRound& r = m.rounds[k];
    worst_sum = std::max(worst_sum, std::abs(r.weights.sum() - 1.0));
    if (std::abs(r.weights.sum() - 1.0) > 1e-10 || r.weights.minCoeff() < 0.0) simplex = false;
    if (!std::isfinite(r.beta) || !(r.beta > 0.0)) betas = false;
    const Eigen::VectorXd& L = tr.losses[k];
    const Eigen::VectorXd next = update_weights(r.weights, r.error, L);
    if (k + 1 < m.rounds.size() && next != m.rounds[k + 1].weights) ordering = false;
    for (Eigen::Index i = 0; i < L.size(); ++i)
      for (Eigen::Index j = 0; j < L.size(); ++j)
        if (L(i) > L(j) && next(i) / r.weights(i) < next(j) / r.weights(j)) ordering = false;
    for (double level : {0.0, 0.37, 1.0})
      if (update_weights(r.weights, r.error, Eigen::VectorXd::Constant(L.size(), level)) != r.weights) equal = false;
  }
  const bool initial = m.rounds.front().weights == Eigen::VectorXd::Constant(25, 1.0 / 25.0);
  std::string errors;
  for (double e : tr.errors) errors += fmt(" %.4f", e);
  report(5, simplex && betas && ordering && equal && initial && m.rounds.size() == run.config.boost_rounds,
         "AdaBoost invariants: " + std::to_string(m.rounds.size()) + " rounds (errors" + errors +
             "), simplex max |sum-1| " + fmt("%.2g", worst_sum) + " (<= 1e-10), beta>0 " +
             (betas ? "yes" : "no") + ", ordering " + (ordering ? "yes" : "no") + ", equal-loss identity " +
             (equal ? "yes" : "no"));
}

// ---- 6 ----
void back_projection(const Run& run) {
  const DegradationModel deg = run.config.degradation();
  const Image lr = test_inputs(run).front();
  const Image prior = apply_boost(lr, *run.model.boost, run.model.pair, *run.model.low);
  const double c = run.model.boost->bp_c;

  std::mt19937_64 rng(606);
  std::uniform_int_distribution<std::size_t> pix(0, prior.size() - 1);
  std::normal_distribution<double> jitter(0.0, 0.05);
  Image y = prior;
  for (double& v : y.data) v += jitter(rng);
  const Image g = reconstruction_gradient(y, prior, lr, deg, c);
  double worst_fd = 0.0;
  for (int t = 0; t < 10; ++t) {
    const std::size_t i = pix(rng);
    const double h = 1e-5, v = y.data[i];
    y.data[i] = v + h;
    const double fp = reconstruction_objective(y, prior, lr, deg, c);
    y.data[i] = v - h;
    const double fm = reconstruction_objective(y, prior, lr, deg, c);
    y.data[i] = v;
    const double fd = (fp - fm) / (2.0 * h);
    worst_fd = std::max(worst_fd, std::abs(fd - g.data[i]) / std::max(std::abs(g.data[i]), 1e-300));
  }

  BackProjectionOptions opt = run.config.back_projection();
  opt.c = c;
  BackProjectionTrace trace;
  (void)back_project(prior, lr, deg, opt, nullptr, &trace);
  bool monotone = trace.objective.size() >= 2;
  for (std::size_t k = 1; k < trace.objective.size(); ++k)
    if (trace.objective[k] > trace.objective[k - 1]) monotone = false;

  const Image consistent_lr = blur_subsample(prior, deg);
  const double fixed = max_abs_difference(back_project(prior, consistent_lr, deg, opt), prior);

  report(6, worst_fd < 1e-4 && monotone && fixed <= 1e-10,
         "back-projection: gradient vs central differences at 10 pixels, max rel. error " + fmt("%.3g", worst_fd) +
             " (< 1e-4); objective " + fmt("%.5f", trace.objective.front()) + " -> " +
             fmt("%.5f", trace.objective.back()) + " over " + std::to_string(trace.objective.size() - 1) +
             " accepted steps, non-increasing " + (monotone ? "yes" : "no") + "; fixed point max change " +
             fmt("%.3g", fixed) + " (<= 1e-10)");
}

// ---- 7 ----
void degenerate_ensemble(const Run& run) {
  BoostConfig one = run.config.boost();
  one.rounds = 1;
  const BoostModel m1 = train_boost(run.boost_set, run.model.pair, one);
  std::size_t identical = 0;
  const auto inputs = test_inputs(run);
  for (const Image& lr : inputs) {
    const Image a = apply_boost(lr, m1, run.model.pair, *run.model.low);
    const Image b = sr_sparse(lr, run.model.pair, *run.model.low, run.config.lambda);
    if (a == b) ++identical;
  }
  report(7, identical == inputs.size() && m1.rounds.size() == 1 && m1.lambda == run.config.lambda,
         "degenerate ensemble: M = 1 boost output (before back-projection) bit-identical to sparse SR on " +
             std::to_string(identical) + "/" + std::to_string(inputs.size()) + " test images");
}

// ---- 8 ----
void ordering(const Run& run) {
  const auto& r = run.report;
  const double bic = r.mean_psnr[0], sp = r.mean_psnr[1], anr = r.mean_psnr[2], bo = r.mean_psnr[3];
  bool errors = false;
  for (const auto& row : r.rows)
    for (const auto& e : row.errors) errors = errors || !e.empty();
  report(8, !errors && bo >= sp && sp >= bic && bo - bic >= 0.5 && run.seconds < 900.0,
         "ordering: mean PSNR boost " + fmt("%.4f", bo) + " >= sparse " + fmt("%.4f", sp) + " >= bicubic " +
             fmt("%.4f", bic) + " dB (anr " + fmt("%.4f", anr) + "), boost - bicubic " + fmt("%+.4f", bo - bic) +
             " dB (>= +0.5), end-to-end " + fmt("%.1f", run.seconds) + " s (< 900 s)");
}

// ---- 9 ----
void determinism(const Run& a, const Run& b) {
  std::vector<std::string> differing;
  std::size_t compared = 0;
  for (const char* f : {kConfigFile, kLowDictFile, kHighDictFile, kPcaFile, kAnchorFile, kBoostFile}) {
    ++compared;
    if (slurp(a.dir / "model" / f) != slurp(b.dir / "model" / f)) differing.push_back(f);
  }
  ++compared;
  const std::string csv_a = slurp(a.dir / "eval" / "report.csv");
  if (csv_a.empty() || csv_a != slurp(b.dir / "eval" / "report.csv")) differing.push_back("report.csv");
  std::string list;
  for (const auto& d : differing) list += " " + d;
  report(9, differing.empty(),
         "determinism: two identical runs, " + std::to_string(compared - differing.size()) + "/" +
             std::to_string(compared) + " model and report files byte-identical" +
             (differing.empty() ? std::string() : " (differ:" + list + ")"));
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "bsr_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::cerr << "usage: bsr_acceptance [--work <dir>]\n";
      return 1;
    }
  }

  try {
    patch_round_trip();
    omp_recovery();

    const Run first = run_pipeline(work / "run1");
    std::cout << first.report.table();
    ksvd_monotone(first);
    anr_equivalence(first);
    boost_invariants(first);
    back_projection(first);
    degenerate_ensemble(first);
    ordering(first);

    const Run second = run_pipeline(work / "run2");
    determinism(first, second);
  } catch (const std::exception& e) {
    std::cerr << "acceptance run aborted: " << e.what() << "\n";
    return 2;
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
