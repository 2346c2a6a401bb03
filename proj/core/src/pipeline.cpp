#include "bsr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bsr/errors.hpp"
#include "bsr/features.hpp"
#include "bsr/interpolation.hpp"
#include "bsr/patches.hpp"
#include "bsr/serialize.hpp"

namespace bsr {

namespace fs = std::filesystem;

Image resize_bilinear(const Image& img, std::size_t width, std::size_t height) {
  if (img.empty() || width == 0 || height == 0) throw DataError("cannot resize an empty image");
  Image out(width, height);
  const double sx = static_cast<double>(img.width) / static_cast<double>(width);
  const double sy = static_cast<double>(img.height) / static_cast<double>(height);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(img.height - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, img.height - 1);
    const double ty = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(img.width - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, img.width - 1);
      const double tx = fx - static_cast<double>(x0);
      const double top = img.at(x0, y0) * (1 - tx) + img.at(x1, y0) * tx;
      const double bottom = img.at(x0, y1) * (1 - tx) + img.at(x1, y1) * tx;
      out.at(x, y) = top * (1 - ty) + bottom * ty;
    }
  }
  return out;
}

Image normalize_geometry(const Image& img, const Config& config) {
  Image cur = img;
  const std::size_t target = config.image_size;
  if (target != 0) {
    if (cur.width < target || cur.height < target) {
      const double scale = static_cast<double>(target) /
                           static_cast<double>(std::min(cur.width, cur.height));
      cur = resize_bilinear(cur,
                            std::max(target, static_cast<std::size_t>(std::lround(cur.width * scale))),
                            std::max(target, static_cast<std::size_t>(std::lround(cur.height * scale))));
    }
    cur = crop(cur, (cur.width - target) / 2, (cur.height - target) / 2, target, target);
  }
  return crop_to_multiple(cur, config.scale_factor);
}

std::vector<NamedImage> ingest_dataset(const fs::path& folder, DatasetRole role,
                                       const Config& config, std::vector<std::string>* warnings) {
  if (!fs::is_directory(folder)) throw DataError("not a directory: " + folder.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(folder)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename().string().starts_with(".")) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  std::vector<NamedImage> images;
  for (const auto& f : files) {
    try {
      images.push_back({f.filename().string(), normalize_geometry(read_image(f), config)});
    } catch (const DataError& e) {
      if (warnings != nullptr) warnings->push_back("skipping " + f.string() + ": " + e.what());
    }
  }
  if (images.empty()) throw DataError("no usable images in " + folder.string());

  if (role == DatasetRole::train_boost && config.boost_train_count != 0 &&
      images.size() > config.boost_train_count) {
    std::vector<std::size_t> idx(images.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(config.boost_train_count);
    std::sort(idx.begin(), idx.end());
    std::vector<NamedImage> subset;
    for (std::size_t i : idx) subset.push_back(std::move(images[i]));
    images = std::move(subset);
  }
  return images;
}

std::uint64_t noise_seed_for(const Config& config, std::size_t index) {
  return config.seed * 0x9E3779B97F4A7C15ULL + index;
}

std::vector<TrainingImage> degrade_all(const std::vector<Image>& hr, const Config& config) {
  std::vector<TrainingImage> out;
  out.reserve(hr.size());
  for (std::size_t i = 0; i < hr.size(); ++i) {
    out.push_back({degrade(hr[i], config.degradation(noise_seed_for(config, i))), hr[i]});
  }
  return out;
}

DictionaryStage train_dictionary_stage(const std::vector<Image>& hr_images, const Config& config) {
  config.validate();
  if (hr_images.empty()) throw DataError("dictionary training set is empty");
  const auto pairs = degrade_all(hr_images, config);

  std::vector<Eigen::MatrixXd> raw_parts, target_parts;
  Eigen::Index total = 0;
  for (const auto& t : pairs) {
    const Image mid = bicubic_upscale(t.lr, config.scale_factor);
    PatchGrid raw = extract_raw_features(mid, config.hr_patch_size, config.hr_overlap);
    target_parts.push_back(extract_patches(t.hr, config.hr_patch_size, config.hr_overlap).patches -
                           extract_patches(mid, config.hr_patch_size, config.hr_overlap).patches);
    total += raw.patches.cols();
    raw_parts.push_back(std::move(raw.patches));
  }
  Eigen::MatrixXd raw(raw_parts.front().rows(), total);
  Eigen::MatrixXd targets(target_parts.front().rows(), total);
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < raw_parts.size(); ++i) {
    raw.middleCols(at, raw_parts[i].cols()) = raw_parts[i];
    targets.middleCols(at, target_parts[i].cols()) = target_parts[i];
    at += raw_parts[i].cols();
  }

  if (config.max_train_samples != 0 && static_cast<std::size_t>(total) > config.max_train_samples) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(total));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::mt19937_64 rng(config.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(config.max_train_samples);
    std::sort(idx.begin(), idx.end());
    Eigen::MatrixXd r(raw.rows(), static_cast<Eigen::Index>(idx.size()));
    Eigen::MatrixXd t(targets.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      r.col(static_cast<Eigen::Index>(j)) = raw.col(idx[j]);
      t.col(static_cast<Eigen::Index>(j)) = targets.col(idx[j]);
    }
    raw = std::move(r);
    targets = std::move(t);
  }

  FeatureExtractor fe;
  fe.patch_size = config.hr_patch_size;
  fe.overlap = config.hr_overlap;
  fe.retained_energy = config.pca_energy;
  fe.basis = fit_pca(raw, config.pca_energy);

  TrainingPairs samples{fe.basis.transpose() * raw, std::move(targets)};
  DictionaryStage stage;
  stage.samples = static_cast<std::size_t>(samples.features.cols());
  stage.pair = train_dictionary(samples, config.ksvd(), &stage.trace);
  stage.pair.features = std::move(fe);
  stage.pair.scale_factor = config.scale_factor;
  stage.pair.validate();
  stage.anchors = build_anchors(stage.pair, config.k_nn, config.lambda);
  return stage;
}

void Model::prepare() {
  pair.validate();
  low.emplace(pair.low);
}

void save_dictionary_stage(const fs::path& dir, const Config& config, const DictionaryPair& pair,
                           const AnchorSet& anchors) {
  fs::create_directories(dir);
  save_config(config, dir / kConfigFile);
  write_blocks(dir / kLowDictFile, {matrix_block("DLOW", pair.low)});
  write_blocks(dir / kHighDictFile, {matrix_block("DHGH", pair.high)});

  Block geometry{"PGEO", {4}, {static_cast<double>(pair.features.patch_size),
                               static_cast<double>(pair.features.overlap),
                               pair.features.retained_energy,
                               static_cast<double>(pair.scale_factor)}};
  write_blocks(dir / kPcaFile, {geometry, matrix_block("PCAB", pair.features.basis)});

  const auto K = static_cast<std::uint64_t>(anchors.neighbors.size());
  Block nb{"ANBR", {K, anchors.neighbors_per_atom}, {}};
  for (const auto& list : anchors.neighbors) {
    for (auto j : list) nb.values.push_back(static_cast<double>(j));
  }
  Block proj{"ANPJ", {K, static_cast<std::uint64_t>(pair.high.rows()), static_cast<std::uint64_t>(pair.low.rows())}, {}};
  for (const auto& p : anchors.projections) {
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.cols(); ++c) proj.values.push_back(p(r, c));
    }
  }
  write_blocks(dir / kAnchorFile, {Block{"ANLM", {1}, {anchors.lambda}}, nb, proj});
}

void save_boost_model(const fs::path& path, const BoostModel& model) {
  model.validate();
  const auto M = static_cast<std::uint64_t>(model.rounds.size());
  const auto N = static_cast<std::uint64_t>(model.patch_count());
  Block cfg{"BCFG", {6}, {static_cast<double>(static_cast<int>(model.loss)), model.lambda, model.theta,
                          model.bp_c, static_cast<double>(model.round_limit), model.sharpness}};
  Block rounds{"BRND", {M, 2}, {}};
  Block weights{"BWGT", {M, N}, {}};
  for (const auto& r : model.rounds) {
    rounds.values.push_back(r.error);
    rounds.values.push_back(r.beta);
    for (Eigen::Index i = 0; i < r.weights.size(); ++i) weights.values.push_back(r.weights(i));
  }
  write_blocks(path, {cfg, rounds, weights});
}

BoostModel load_boost_model(const fs::path& path) {
  const auto blocks = read_blocks(path);
  const Block& cfg = find_block(blocks, "BCFG");
  const Block& rounds = find_block(blocks, "BRND");
  const Block& weights = find_block(blocks, "BWGT");
  if (cfg.values.size() != 6 || rounds.dims.size() != 2 || rounds.dims[1] != 2 ||
      weights.dims.size() != 2 || weights.dims[0] != rounds.dims[0]) {
    throw DataError(path.string() + ": malformed boost model");
  }
  BoostModel m;
  const int loss = static_cast<int>(cfg.values[0]);
  if (loss < 0 || loss > 2) throw DataError(path.string() + ": unknown loss tag");
  m.loss = static_cast<LossKind>(loss);
  m.lambda = cfg.values[1];
  m.theta = cfg.values[2];
  m.bp_c = cfg.values[3];
  m.round_limit = static_cast<std::size_t>(cfg.values[4]);
  m.sharpness = cfg.values[5];
  const auto M = static_cast<std::size_t>(rounds.dims[0]);
  const auto N = static_cast<Eigen::Index>(weights.dims[1]);
  for (std::size_t k = 0; k < M; ++k) {
    BoostRound r;
    r.index = k + 1;
    r.error = rounds.values[2 * k];
    r.beta = rounds.values[2 * k + 1];
    r.weights = Eigen::Map<const Eigen::VectorXd>(weights.values.data() + k * static_cast<std::size_t>(N), N);
    m.rounds.push_back(std::move(r));
  }
  m.validate();
  return m;
}

Model load_model(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("model directory not found: " + dir.string());
  Model m;
  m.config = load_config(dir / kConfigFile);
  m.pair.low = block_matrix(find_block(read_blocks(dir / kLowDictFile), "DLOW"));
  m.pair.high = block_matrix(find_block(read_blocks(dir / kHighDictFile), "DHGH"));

  const auto pca = read_blocks(dir / kPcaFile);
  const Block& geo = find_block(pca, "PGEO");
  if (geo.values.size() != 4) throw DataError("malformed PCA geometry block");
  m.pair.features.patch_size = static_cast<std::size_t>(geo.values[0]);
  m.pair.features.overlap = static_cast<std::size_t>(geo.values[1]);
  m.pair.features.retained_energy = geo.values[2];
  m.pair.scale_factor = static_cast<std::size_t>(geo.values[3]);
  m.pair.features.basis = block_matrix(find_block(pca, "PCAB"));

  const auto anchors = read_blocks(dir / kAnchorFile);
  const Block& lam = find_block(anchors, "ANLM");
  const Block& nb = find_block(anchors, "ANBR");
  const Block& proj = find_block(anchors, "ANPJ");
  if (lam.values.size() != 1 || nb.dims.size() != 2 || proj.dims.size() != 3 || nb.dims[0] != proj.dims[0]) {
    throw DataError("malformed anchor file");
  }
  m.anchors.lambda = lam.values[0];
  m.anchors.neighbors_per_atom = static_cast<std::size_t>(nb.dims[1]);
  const auto K = static_cast<std::size_t>(nb.dims[0]);
  const auto rows = static_cast<Eigen::Index>(proj.dims[1]);
  const auto cols = static_cast<Eigen::Index>(proj.dims[2]);
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<Eigen::Index> list;
    for (std::size_t j = 0; j < m.anchors.neighbors_per_atom; ++j) {
      list.push_back(static_cast<Eigen::Index>(nb.values[k * m.anchors.neighbors_per_atom + j]));
    }
    m.anchors.neighbors.push_back(std::move(list));
    Eigen::MatrixXd p(rows, cols);
    const double* base = proj.values.data() + k * static_cast<std::size_t>(rows * cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) p(r, c) = base[r * cols + c];
    }
    m.anchors.projections.push_back(std::move(p));
  }

  m.prepare();
  m.anchors.validate(m.pair);
  if (fs::exists(dir / kBoostFile)) m.boost = load_boost_model(dir / kBoostFile);
  return m;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::bicubic:
      return "bicubic";
    case Method::sparse:
      return "sparse";
    case Method::anr:
      return "anr";
    case Method::boost:
      return "boost";
  }
  return "bicubic";
}

Method parse_method(const std::string& name) {
  if (name == "bicubic") return Method::bicubic;
  if (name == "sparse") return Method::sparse;
  if (name == "anr") return Method::anr;
  if (name == "boost") return Method::boost;
  throw UsageError("unknown method '" + name + "' (expected bicubic, sparse, anr, boost)");
}

Image sr_bicubic(const Image& lr, std::size_t factor) { return clamped(bicubic_upscale(lr, factor)); }

Image sr_sparse(const Image& lr, const DictionaryPair& pair, const CodingDictionary& low,
                double lambda) {
  const PreparedInput input = prepare_input(lr, pair);
  const std::vector<double> ones(input.features.count(), 1.0);
  return code_and_assemble(input, pair, low, ones, lambda);
}

Image sr_anr(const Image& lr, const DictionaryPair& pair, const AnchorSet& anchors) {
  const PreparedInput input = prepare_input(lr, pair);
  Image img = aggregate_patches(anr_reconstruct(input.features, anchors, pair));
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] += input.mid.data[i];
  clamp_unit(img);
  return img;
}

Image sr_boost(const Image& lr, const BoostModel& model, const DictionaryPair& pair,
               const CodingDictionary& low, const DegradationModel& degradation,
               const BackProjectionOptions& options) {
  const Image prior = apply_boost(lr, model, pair, low);
  return back_project(prior, lr, degradation, options);
}

Image super_resolve(const Image& lr, Method method, const Model& model) {
  switch (method) {
    case Method::bicubic:
      return sr_bicubic(lr, model.config.scale_factor);
    case Method::sparse:
      return sr_sparse(lr, model.pair, *model.low, model.config.lambda);
    case Method::anr:
      return sr_anr(lr, model.pair, model.anchors);
    case Method::boost: {
      if (!model.boost) throw UsageError("model directory has no boost model; run train-boost first");
      BackProjectionOptions bp = model.config.back_projection();
      bp.c = model.boost->bp_c;
      return sr_boost(lr, *model.boost, model.pair, *model.low, model.config.degradation(), bp);
    }
  }
  throw UsageError("unknown method");
}

}  // namespace bsr
