#pragma once

#include <cstddef>
#include <vector>

#include "bsr/degradation.hpp"
#include "bsr/image.hpp"

namespace bsr {

struct BackProjectionOptions {
  double c = 1.0;
  double step = 0.5;
  std::size_t iterations = 30;
  double tolerance = 1e-5;  ///< relative objective change
};

struct BackProjectionTrace {
  std::vector<double> objective;  ///< value at the start and after every accepted step
  std::vector<double> fidelity;   ///< ||SHY - X||^2 at the same points
  std::size_t step_halvings = 0;
  bool step_underflow = false;
};

/// ||SHY - X||^2 + c ||Y - F||^2.
[[nodiscard]] double reconstruction_objective(const Image& y, const Image& prior, const Image& lr,
                                              const DegradationModel& model, double c);

[[nodiscard]] double data_fidelity(const Image& y, const Image& lr, const DegradationModel& model);

/// 2 (SH)^T (SHY - X) + 2c (Y - F).
[[nodiscard]] Image reconstruction_gradient(const Image& y, const Image& prior, const Image& lr,
                                            const DegradationModel& model, double c);

/// Fixed-step gradient descent toward the image closest to `prior` that is
/// consistent with `lr` under the degradation model.
///
/// Iterates always move by the fixed step; a step is accepted when it lowers
/// the best objective seen so far. Three consecutive rises halve the step and
/// restart from the best iterate. Stops at the iteration cap, once an accepted
/// step changes the objective by less than `tolerance` (relative), or when the
/// step underflows. Returns the best iterate clamped to [0, 1]. `start`
/// defaults to `prior`.
[[nodiscard]] Image back_project(const Image& prior, const Image& lr, const DegradationModel& model,
                                 const BackProjectionOptions& options = {},
                                 const Image* start = nullptr,
                                 BackProjectionTrace* trace = nullptr);

}  // namespace bsr
