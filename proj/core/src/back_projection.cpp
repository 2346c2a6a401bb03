#include "bsr/back_projection.hpp"

#include <algorithm>
#include <cmath>

#include "bsr/errors.hpp"

namespace bsr {

namespace {

void check_sizes(const Image& y, const Image& prior, const Image& lr, const DegradationModel& m) {
  if (y.width != prior.width || y.height != prior.height) {
    throw DataError("back-projection iterate and prior differ in size");
  }
  if (lr.width * m.scale_factor != y.width || lr.height * m.scale_factor != y.height) {
    throw DataError("HR estimate must be the LR size times the scale factor");
  }
}

Image lr_residual(const Image& y, const Image& lr, const DegradationModel& model) {
  Image r = blur_subsample(y, model);
  for (std::size_t i = 0; i < r.size(); ++i) r.data[i] -= lr.data[i];
  return r;
}

double squared_norm(const Image& img) {
  double s = 0.0;
  for (double v : img.data) s += v * v;
  return s;
}

}  // namespace

double data_fidelity(const Image& y, const Image& lr, const DegradationModel& model) {
  return squared_norm(lr_residual(y, lr, model));
}

double reconstruction_objective(const Image& y, const Image& prior, const Image& lr,
                                const DegradationModel& model, double c) {
  check_sizes(y, prior, lr, model);
  double reg = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y.data[i] - prior.data[i];
    reg += d * d;
  }
  return data_fidelity(y, lr, model) + c * reg;
}

Image reconstruction_gradient(const Image& y, const Image& prior, const Image& lr,
                              const DegradationModel& model, double c) {
  check_sizes(y, prior, lr, model);
  Image g = blur_subsample_adjoint(lr_residual(y, lr, model), model, y.width, y.height);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.data[i] = 2.0 * g.data[i] + 2.0 * c * (y.data[i] - prior.data[i]);
  }
  return g;
}

Image back_project(const Image& prior, const Image& lr, const DegradationModel& model,
                   const BackProjectionOptions& options, const Image* start,
                   BackProjectionTrace* trace) {
  if (!(options.c >= 0.0)) throw UsageError("back-projection weight c must be non-negative");
  if (!(options.step > 0.0)) throw UsageError("back-projection step must be positive");
  Image y = start != nullptr ? *start : prior;
  check_sizes(y, prior, lr, model);

  BackProjectionTrace local;
  BackProjectionTrace& tr = trace != nullptr ? *trace : local;
  tr = {};

  Image best = y;
  double best_obj = reconstruction_objective(y, prior, lr, model, options.c);
  tr.objective.push_back(best_obj);
  tr.fidelity.push_back(data_fidelity(y, lr, model));

  double step = options.step;
  std::size_t rises = 0;
  for (std::size_t it = 0; it < options.iterations && best_obj > 0.0; ++it) {
    const Image g = reconstruction_gradient(y, prior, lr, model, options.c);
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] -= step * g.data[i];
    const double obj = reconstruction_objective(y, prior, lr, model, options.c);

    if (std::isfinite(obj) && obj <= best_obj) {
      const double change = (best_obj - obj) / best_obj;
      best = y;
      best_obj = obj;
      rises = 0;
      tr.objective.push_back(obj);
      tr.fidelity.push_back(data_fidelity(y, lr, model));
      if (change < options.tolerance) break;
      continue;
    }
    if (++rises >= 3 || !std::isfinite(obj)) {
      step *= 0.5;
      ++tr.step_halvings;
      rises = 0;
      y = best;
      if (step < 1e-12 * options.step) {
        tr.step_underflow = true;
        break;
      }
    }
  }
  clamp_unit(best);
  return best;
}

}  // namespace bsr
