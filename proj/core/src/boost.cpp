#include "bsr/boost.hpp"

#include <algorithm>
#include <cmath>

#include "bsr/errors.hpp"
#include "bsr/interpolation.hpp"

namespace bsr {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::linear:
      return "linear";
    case LossKind::square:
      return "square";
    case LossKind::exponential:
      return "exponential";
  }
  return "linear";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "linear") return LossKind::linear;
  if (name == "square") return LossKind::square;
  if (name == "exponential") return LossKind::exponential;
  throw UsageError("unknown loss kind '" + name + "' (expected linear, square, exponential)");
}

double loss(double residual_norm, double max_residual_norm, LossKind kind) {
  if (!(max_residual_norm > 0.0)) return 0.0;
  const double ratio = std::clamp(residual_norm / max_residual_norm, 0.0, 1.0);
  switch (kind) {
    case LossKind::linear:
      return ratio;
    case LossKind::square:
      return ratio * ratio;
    case LossKind::exponential:
      return 1.0 - std::exp(-ratio);
  }
  return ratio;
}

double round_coefficient(double error) { return 0.5 * std::log((1.0 - error) / error); }

std::size_t BoostModel::patch_count() const {
  return rounds.empty() ? 0 : static_cast<std::size_t>(rounds.front().weights.size());
}

void BoostModel::validate() const {
  if (rounds.empty()) throw DataError("boost model has no rounds");
  for (const auto& r : rounds) {
    if (static_cast<std::size_t>(r.weights.size()) != patch_count()) {
      throw DataError("boost rounds disagree on the patch count");
    }
    if (!std::isfinite(r.beta) || !(r.beta > 0.0)) throw DataError("boost round has a non-positive beta");
  }
}

PreparedInput prepare_input(const Image& lr, const DictionaryPair& pair) {
  PreparedInput in;
  in.mid = bicubic_upscale(lr, pair.scale_factor);
  in.features = extract_features(in.mid, pair.features);
  return in;
}

std::vector<double> fidelity_scales(const Eigen::VectorXd& weights, double sharpness) {
  const double uniform = 1.0 / static_cast<double>(weights.size());
  std::vector<double> out(static_cast<std::size_t>(weights.size()));
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    out[static_cast<std::size_t>(i)] = std::exp(sharpness * (weights(i) - uniform));
  }
  return out;
}

Image code_and_assemble(const PreparedInput& input, const DictionaryPair& pair,
                        const CodingDictionary& low, std::span<const double> scales, double lambda,
                        const L1Options& options, PatchGrid* hr_residuals) {
  const PatchGrid& feats = input.features;
  if (scales.size() != feats.count()) {
    throw DataError("expected " + std::to_string(feats.count()) + " patch weights, got " +
                    std::to_string(scales.size()));
  }
  if (feats.patches.rows() != low.dim()) throw DataError("feature dimension does not match the dictionary");

  PatchGrid out = feats;
  out.patches.resize(pair.high.rows(), feats.patches.cols());
  CodingProblem problem;
  problem.dictionary = &low;
  problem.lambda = lambda;
  for (Eigen::Index n = 0; n < feats.patches.cols(); ++n) {
    problem.signal = feats.patches.col(n);
    problem.fidelity_weight = scales[static_cast<std::size_t>(n)];
    const SparseCode code = weighted_l1_code(problem, options);
    Eigen::VectorXd patch = Eigen::VectorXd::Zero(pair.high.rows());
    for (std::size_t j = 0; j < code.nnz(); ++j) patch += code.values[j] * pair.high.col(code.indices[j]);
    out.patches.col(n) = patch;
  }

  Image img = aggregate_patches(out);
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] += input.mid.data[i];
  clamp_unit(img);
  if (hr_residuals != nullptr) *hr_residuals = std::move(out);
  return img;
}

std::vector<PreparedTrainingImage> prepare_training(const std::vector<TrainingImage>& images,
                                                    const DictionaryPair& pair) {
  std::vector<PreparedTrainingImage> out;
  out.reserve(images.size());
  for (const auto& t : images) {
    PreparedTrainingImage p;
    p.input = prepare_input(t.lr, pair);
    if (t.hr.width != p.input.mid.width || t.hr.height != p.input.mid.height) {
      throw DataError("training HR image does not match its LR image times the scale factor");
    }
    p.hr = t.hr;
    const auto size = pair.features.patch_size;
    const auto overlap = pair.features.overlap;
    p.targets = extract_patches(t.hr, size, overlap).patches -
                extract_patches(p.input.mid, size, overlap).patches;
    if (!out.empty() && !out.front().input.features.same_geometry(p.input.features)) {
      throw DataError("training images do not share a patch geometry");
    }
    out.push_back(std::move(p));
  }
  return out;
}

RoundResult boosted_code_round(const std::vector<PreparedTrainingImage>& images,
                               const DictionaryPair& pair, const CodingDictionary& low,
                               const Eigen::VectorXd& weights, const BoostConfig& config) {
  if (images.empty()) throw DataError("boost training set is empty");
  const auto N = static_cast<Eigen::Index>(images.front().input.features.count());
  if (weights.size() != N) throw DataError("weight vector does not match the patch count");
  const auto scales = fidelity_scales(weights, config.sharpness);

  RoundResult result;
  result.residual_norms.resize(static_cast<Eigen::Index>(images.size()), N);
  for (std::size_t p = 0; p < images.size(); ++p) {
    const auto& img = images[p];
    if (!img.input.features.same_geometry(images.front().input.features)) {
      throw DataError("training images do not share a patch geometry");
    }
    PatchGrid hr_patches;
    Image b = code_and_assemble(img.input, pair, low, scales, config.lambda, config.coding, &hr_patches);
    result.residual_norms.row(static_cast<Eigen::Index>(p)) =
        (hr_patches.patches - img.targets).colwise().norm();
    if (config.theta != 0.0) {
      double sq = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) sq += (b.data[i] - img.hr.data[i]) * (b.data[i] - img.hr.data[i]);
      result.theta_term += config.theta * sq;
    }
    result.reconstructions.push_back(std::move(b));
  }
  return result;
}

RoundResult boosted_code_round(const std::vector<TrainingImage>& images, const DictionaryPair& pair,
                               const Eigen::VectorXd& weights, const BoostConfig& config) {
  const CodingDictionary low(pair.low);
  return boosted_code_round(prepare_training(images, pair), pair, low, weights, config);
}

double round_error(const Eigen::MatrixXd& residual_norms, const Eigen::VectorXd& weights,
                   LossKind kind, Eigen::MatrixXd* losses) {
  if (residual_norms.cols() != weights.size() || residual_norms.rows() == 0) {
    throw DataError("residual matrix does not match the weight vector");
  }
  Eigen::MatrixXd L(residual_norms.rows(), residual_norms.cols());
  double total = 0.0;
  for (Eigen::Index p = 0; p < residual_norms.rows(); ++p) {
    const double rmax = residual_norms.row(p).maxCoeff();
    double e = 0.0;
    for (Eigen::Index i = 0; i < residual_norms.cols(); ++i) {
      L(p, i) = loss(residual_norms(p, i), rmax, kind);
      e += weights(i) * L(p, i);
    }
    total += e;
  }
  if (losses != nullptr) *losses = std::move(L);
  const double mean = total / static_cast<double>(residual_norms.rows());
  return std::clamp(mean, kErrorClamp, 1.0 - kErrorClamp);
}

Eigen::VectorXd update_weights(const Eigen::VectorXd& weights, double error,
                               const Eigen::VectorXd& losses) {
  if (!(error > 0.0 && error < 1.0)) throw NumericalError("round error must lie in (0, 1)");
  if (weights.size() != losses.size()) throw DataError("weights and losses differ in length");
  // A loss shared by every position scales all weights alike and cancels in
  // the normalization.
  if (weights.size() > 0 && (losses.array() == losses(0)).all()) {
    const double sum = weights.sum();
    return std::abs(sum - 1.0) <= 1e-12 ? weights : Eigen::VectorXd(weights / sum);
  }
  const double ratio = error / (1.0 - error);
  Eigen::VectorXd next(weights.size());
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    next(i) = weights(i) * std::pow(ratio, 1.0 - losses(i));
  }
  const double z = next.sum();
  if (!(z > 0.0) || !std::isfinite(z)) throw NumericalError("weight normalization constant is degenerate");
  return next / z;
}

BoostModel train_boost(const std::vector<TrainingImage>& images, const DictionaryPair& pair,
                       const BoostConfig& config, BoostTrace* trace) {
  if (images.empty()) throw DataError("boost training set is empty");
  if (config.rounds < 1) throw UsageError("boosting needs at least one round");
  BoostTrace local;
  BoostTrace& tr = trace != nullptr ? *trace : local;
  tr = {};

  const auto prepared = prepare_training(images, pair);
  const CodingDictionary low(pair.low);
  const auto N = static_cast<Eigen::Index>(prepared.front().input.features.count());

  BoostModel model;
  model.loss = config.loss;
  model.lambda = config.lambda;
  model.theta = config.theta;
  model.bp_c = config.bp_c;
  model.round_limit = config.rounds;
  model.sharpness = config.sharpness;

  Eigen::VectorXd w = Eigen::VectorXd::Constant(N, 1.0 / static_cast<double>(N));
  for (std::size_t m = 1; m <= config.rounds; ++m) {
    const RoundResult round = boosted_code_round(prepared, pair, low, w, config);
    Eigen::MatrixXd losses;
    const double e = round_error(round.residual_norms, w, config.loss, &losses);
    tr.errors.push_back(e);
    if (e >= 0.5) {
      tr.early_stopped = true;
      break;
    }
    const Eigen::VectorXd mean_loss = losses.colwise().mean().transpose();
    model.rounds.push_back({m, w, e, round_coefficient(e)});
    tr.losses.push_back(mean_loss);
    tr.theta_terms.push_back(round.theta_term);
    w = update_weights(w, e, mean_loss);
  }
  if (model.rounds.empty()) {
    throw NumericalError("first boosting round already has error >= 1/2 (e = " +
                         std::to_string(tr.errors.front()) + ")");
  }
  return model;
}

Image apply_boost(const Image& lr, const BoostModel& model, const DictionaryPair& pair,
                  const CodingDictionary& low, const L1Options& options,
                  std::vector<Image>* round_outputs) {
  model.validate();
  const PreparedInput input = prepare_input(lr, pair);
  if (input.features.count() != model.patch_count()) {
    throw DataError("input has " + std::to_string(input.features.count()) +
                    " patches but the boost model expects " + std::to_string(model.patch_count()));
  }
  double beta_sum = 0.0;
  for (const auto& r : model.rounds) beta_sum += r.beta;

  Image out(input.mid.width, input.mid.height);
  if (round_outputs != nullptr) round_outputs->clear();
  for (const auto& r : model.rounds) {
    const auto scales = fidelity_scales(r.weights, model.sharpness);
    Image fm = code_and_assemble(input, pair, low, scales, model.lambda, options);
    const double mix = r.beta / beta_sum;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += mix * fm.data[i];
    if (round_outputs != nullptr) round_outputs->push_back(std::move(fm));
  }
  return out;
}

Image apply_boost(const Image& lr, const BoostModel& model, const DictionaryPair& pair) {
  const CodingDictionary low(pair.low);
  return apply_boost(lr, model, pair, low);
}

}  // namespace bsr
