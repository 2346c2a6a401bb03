#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bsr/config.hpp"
#include "bsr/pipeline.hpp"

namespace bsr {

/// One test image's PSNR under every method. A method that failed on this
/// image leaves `psnr` empty and records the message in `errors`.
struct EvalRow {
  std::string image;
  std::vector<std::optional<double>> psnr;
  std::vector<std::string> errors;
};

struct EvalReport {
  std::vector<std::string> methods;
  std::vector<EvalRow> rows;
  std::vector<double> mean_psnr;  ///< over the rows where the method succeeded
  std::vector<double> seconds;    ///< total runtime per method
  Config config;

  /// Comma-separated: header, one row per image, then a "mean" row.
  /// Contains no timings, so identical inputs give identical bytes.
  [[nodiscard]] std::string csv() const;
  /// Aligned plain-text table with means and per-method runtimes.
  [[nodiscard]] std::string table() const;
};

/// A method can be any Method or "oracle" (returns the ground truth; sanity
/// check of the harness).
using MethodName = std::string;

/// Degrades each HR test image, runs every method, and scores against the
/// ground truth. With `out_dir` set, writes report.csv, report.txt,
/// config.txt and images/<stem>_<method>.png.
[[nodiscard]] EvalReport evaluate(const std::vector<NamedImage>& test,
                                  const std::vector<MethodName>& methods, const Model& model,
                                  const std::optional<std::filesystem::path>& out_dir = std::nullopt);

[[nodiscard]] std::string format_psnr(double db);

}  // namespace bsr
