#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bsr/dictionary.hpp"
#include "bsr/image.hpp"
#include "bsr/patches.hpp"
#include "bsr/sparse.hpp"

namespace bsr {

enum class LossKind { linear, square, exponential };

[[nodiscard]] std::string to_string(LossKind kind);
[[nodiscard]] LossKind parse_loss_kind(const std::string& name);

/// Bounded regression loss in [0, 1] on r / rmax. Defined as 0 when rmax = 0.
[[nodiscard]] double loss(double residual_norm, double max_residual_norm, LossKind kind);

inline constexpr double kErrorClamp = 1e-6;

/// beta = 1/2 log((1 - e) / e).
[[nodiscard]] double round_coefficient(double error);

struct BoostRound {
  std::size_t index = 0;    ///< 1-based round number
  Eigen::VectorXd weights;  ///< per patch position, on the simplex
  double error = 0.0;
  double beta = 0.0;
};

struct BoostModel {
  std::vector<BoostRound> rounds;
  LossKind loss = LossKind::linear;
  double lambda = 1e-4;
  double theta = 0.0;
  double bp_c = 1.0;
  std::size_t round_limit = 5;
  double sharpness = 1.0;

  [[nodiscard]] std::size_t patch_count() const;
  void validate() const;
};

struct BoostConfig {
  std::size_t rounds = 5;
  LossKind loss = LossKind::linear;
  double lambda = 1e-4;
  double theta = 0.0;
  double sharpness = 1.0;
  double bp_c = 1.0;
  L1Options coding;
};

/// An LR input decoded into the mid-resolution domain.
struct PreparedInput {
  Image mid;           ///< bicubic upscale of the LR image
  PatchGrid features;  ///< features of `mid` at the HR patch geometry
};

[[nodiscard]] PreparedInput prepare_input(const Image& lr, const DictionaryPair& pair);

/// Per-patch fidelity scales exp(sharpness * (w_i - 1/N)).
///
/// The 1/N offset puts the uniform weighting at scale exactly 1, so the first
/// boosting round codes each patch exactly like the unweighted baseline.
[[nodiscard]] std::vector<double> fidelity_scales(const Eigen::VectorXd& weights, double sharpness);

/// Codes every patch with weighted_l1_code, maps codes through the HR
/// dictionary and assembles clamp(aggregate(residual patches) + mid).
/// `scales` holds one fidelity weight per patch. When `hr_residuals` is
/// non-null it receives the pre-aggregation HR residual patches.
[[nodiscard]] Image code_and_assemble(const PreparedInput& input, const DictionaryPair& pair,
                                      const CodingDictionary& low, std::span<const double> scales,
                                      double lambda, const L1Options& options = {},
                                      PatchGrid* hr_residuals = nullptr);

struct TrainingImage {
  Image lr;
  Image hr;
};

/// Training image decoded once: its mid-resolution input and HR targets
/// C_i = HR patch - mid patch.
struct PreparedTrainingImage {
  PreparedInput input;
  Image hr;
  Eigen::MatrixXd targets;
};

[[nodiscard]] std::vector<PreparedTrainingImage> prepare_training(
    const std::vector<TrainingImage>& images, const DictionaryPair& pair);

struct RoundResult {
  std::vector<Image> reconstructions;  ///< B_m per image
  Eigen::MatrixXd residual_norms;      ///< P x N, ||B_{m,i} - C_i||
  double theta_term = 0.0;             ///< theta * sum_p ||B_m - C||^2, reported only
};

[[nodiscard]] RoundResult boosted_code_round(const std::vector<PreparedTrainingImage>& images,
                                             const DictionaryPair& pair,
                                             const CodingDictionary& low,
                                             const Eigen::VectorXd& weights,
                                             const BoostConfig& config);

[[nodiscard]] RoundResult boosted_code_round(const std::vector<TrainingImage>& images,
                                             const DictionaryPair& pair,
                                             const Eigen::VectorXd& weights,
                                             const BoostConfig& config);

/// Mean over images of sum_i w_i L(r_{p,i}), with rmax taken per image,
/// clamped to [1e-6, 1 - 1e-6]. `losses` (optional) receives the P x N loss
/// matrix.
[[nodiscard]] double round_error(const Eigen::MatrixXd& residual_norms,
                                 const Eigen::VectorXd& weights, LossKind kind,
                                 Eigen::MatrixXd* losses = nullptr);

/// w'_i = w_i (e / (1 - e))^(1 - L_i) / Z.
[[nodiscard]] Eigen::VectorXd update_weights(const Eigen::VectorXd& weights, double error,
                                             const Eigen::VectorXd& losses);

struct BoostTrace {
  std::vector<double> errors;              ///< every attempted round
  std::vector<Eigen::VectorXd> losses;     ///< per-position mean loss, retained rounds
  std::vector<double> theta_terms;
  bool early_stopped = false;
};

/// Runs up to `config.rounds` rounds; stops (discarding the round) once the
/// error reaches 1/2. Throws NumericalError if no round is usable.
[[nodiscard]] BoostModel train_boost(const std::vector<TrainingImage>& images,
                                     const DictionaryPair& pair, const BoostConfig& config,
                                     BoostTrace* trace = nullptr);

/// F(X) = sum_m beta_m / sum(beta) F_m(X), coding with each round's trained
/// weights. `round_outputs` (optional) receives every F_m.
[[nodiscard]] Image apply_boost(const Image& lr, const BoostModel& model, const DictionaryPair& pair,
                                const CodingDictionary& low, const L1Options& options = {},
                                std::vector<Image>* round_outputs = nullptr);

[[nodiscard]] Image apply_boost(const Image& lr, const BoostModel& model, const DictionaryPair& pair);

}  // namespace bsr
