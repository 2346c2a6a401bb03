#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bsr/back_projection.hpp"
#include "bsr/boost.hpp"
#include "bsr/config.hpp"
#include "bsr/dictionary.hpp"
#include "bsr/image.hpp"
#include "bsr/sparse.hpp"

namespace bsr {

struct NamedImage {
  std::string name;
  Image image;
};

enum class DatasetRole { train_dict, train_boost, test };

/// Loads every readable image in `folder` (lexicographic order), converts it
/// to the working geometry, and for the train-boost role keeps a seeded
/// subset of `boost_train_count` images. Unreadable files are skipped and
/// reported through `warnings`. Throws DataError if nothing usable remains.
[[nodiscard]] std::vector<NamedImage> ingest_dataset(const std::filesystem::path& folder,
                                                     DatasetRole role, const Config& config,
                                                     std::vector<std::string>* warnings = nullptr);

/// Center-crop (or bilinear-resize, when smaller) to image_size, then drop
/// rows/columns so both sides divide the scale factor.
[[nodiscard]] Image normalize_geometry(const Image& img, const Config& config);

[[nodiscard]] Image resize_bilinear(const Image& img, std::size_t width, std::size_t height);

/// Noise seed used when degrading the index-th image of a set.
[[nodiscard]] std::uint64_t noise_seed_for(const Config& config, std::size_t index);

/// Pairs each HR image with its degraded LR version.
[[nodiscard]] std::vector<TrainingImage> degrade_all(const std::vector<Image>& hr,
                                                     const Config& config);

struct DictionaryStage {
  DictionaryPair pair;
  AnchorSet anchors;
  KsvdTrace trace;
  std::size_t samples = 0;
};

/// Degrade, decode to mid resolution, fit PCA on the raw gradient features,
/// run K-SVD, then build ANR anchors.
[[nodiscard]] DictionaryStage train_dictionary_stage(const std::vector<Image>& hr_images,
                                                     const Config& config);

/// Loaded model directory: config snapshot, dictionaries, anchors and an
/// optional boost model.
struct Model {
  Config config;
  DictionaryPair pair;
  AnchorSet anchors;
  std::optional<BoostModel> boost;
  std::optional<CodingDictionary> low;  ///< Gram-cached LR dictionary

  void prepare();
};

inline constexpr const char* kConfigFile = "config.txt";
inline constexpr const char* kLowDictFile = "dict_low.bsr";
inline constexpr const char* kHighDictFile = "dict_high.bsr";
inline constexpr const char* kPcaFile = "pca.bsr";
inline constexpr const char* kAnchorFile = "anchors.bsr";
inline constexpr const char* kBoostFile = "boost.bsr";

void save_dictionary_stage(const std::filesystem::path& dir, const Config& config,
                           const DictionaryPair& pair, const AnchorSet& anchors);
void save_boost_model(const std::filesystem::path& path, const BoostModel& model);
[[nodiscard]] BoostModel load_boost_model(const std::filesystem::path& path);

/// Reads a model directory. The boost model is optional.
[[nodiscard]] Model load_model(const std::filesystem::path& dir);

enum class Method { bicubic, sparse, anr, boost };

[[nodiscard]] std::string to_string(Method m);
[[nodiscard]] Method parse_method(const std::string& name);

[[nodiscard]] Image sr_bicubic(const Image& lr, std::size_t factor);
[[nodiscard]] Image sr_sparse(const Image& lr, const DictionaryPair& pair,
                              const CodingDictionary& low, double lambda);
[[nodiscard]] Image sr_anr(const Image& lr, const DictionaryPair& pair, const AnchorSet& anchors);
/// apply_boost followed by back-projection onto the LR observation.
[[nodiscard]] Image sr_boost(const Image& lr, const BoostModel& model, const DictionaryPair& pair,
                             const CodingDictionary& low, const DegradationModel& degradation,
                             const BackProjectionOptions& options);

[[nodiscard]] Image super_resolve(const Image& lr, Method method, const Model& model);

}  // namespace bsr
