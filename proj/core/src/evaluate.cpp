#include "bsr/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bsr/errors.hpp"
#include "bsr/metrics.hpp"

namespace bsr {

namespace fs = std::filesystem;

std::string format_psnr(double db) {
  if (psnr_identical(db)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", db);
  return buf;
}

namespace {

std::string short_psnr(double db) {
  if (psnr_identical(db)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", db);
  return buf;
}

}  // namespace

std::string EvalReport::csv() const {
  std::ostringstream out;
  out << "image";
  for (const auto& m : methods) out << ',' << m;
  out << '\n';
  for (const auto& row : rows) {
    out << row.image;
    for (const auto& v : row.psnr) out << ',' << (v ? format_psnr(*v) : std::string("error"));
    out << '\n';
  }
  out << "mean";
  for (double v : mean_psnr) out << ',' << format_psnr(v);
  out << '\n';
  return out.str();
}

std::string EvalReport::table() const {
  std::size_t name_w = 9;
  for (const auto& row : rows) name_w = std::max(name_w, row.image.size());
  std::size_t col_w = 10;
  for (const auto& m : methods) col_w = std::max(col_w, m.size() + 2);

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_w)) << "image";
  for (const auto& m : methods) out << std::right << std::setw(static_cast<int>(col_w)) << m;
  out << '\n';
  for (const auto& row : rows) {
    out << std::left << std::setw(static_cast<int>(name_w)) << row.image;
    for (const auto& v : row.psnr) {
      out << std::right << std::setw(static_cast<int>(col_w)) << (v ? short_psnr(*v) : "error");
    }
    out << '\n';
  }
  out << std::string(name_w + col_w * methods.size(), '-') << '\n';
  out << std::left << std::setw(static_cast<int>(name_w)) << "mean (dB)";
  for (double v : mean_psnr) {
    out << std::right << std::setw(static_cast<int>(col_w)) << short_psnr(v);
  }
  out << '\n' << std::left << std::setw(static_cast<int>(name_w)) << "time (s)";
  for (double s : seconds) {
    std::ostringstream t;
    t << std::fixed << std::setprecision(2) << s;
    out << std::right << std::setw(static_cast<int>(col_w)) << t.str();
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t m = 0; m < methods.size(); ++m) {
      if (!row.errors[m].empty()) out << row.image << " [" << methods[m] << "]: " << row.errors[m] << '\n';
    }
  }
  return out.str();
}

EvalReport evaluate(const std::vector<NamedImage>& test, const std::vector<MethodName>& methods,
                    const Model& model, const std::optional<fs::path>& out_dir) {
  if (test.empty()) throw DataError("evaluation set is empty");
  if (methods.empty()) throw UsageError("no methods to evaluate");
  std::vector<std::optional<Method>> parsed;
  for (const auto& name : methods) {
    parsed.push_back(name == "oracle" ? std::nullopt : std::optional<Method>(parse_method(name)));
  }

  EvalReport report;
  report.methods = methods;
  report.config = model.config;
  report.seconds.assign(methods.size(), 0.0);
  if (out_dir) fs::create_directories(*out_dir / "images");

  for (std::size_t i = 0; i < test.size(); ++i) {
    const Image& hr = test[i].image;
    const Image lr = degrade(hr, model.config.degradation(noise_seed_for(model.config, i)));
    EvalRow row;
    row.image = test[i].name;
    row.psnr.resize(methods.size());
    row.errors.resize(methods.size());
    const std::string stem = fs::path(test[i].name).stem().string();
    for (std::size_t m = 0; m < methods.size(); ++m) {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const Image sr = parsed[m] ? super_resolve(lr, *parsed[m], model) : hr;
        report.seconds[m] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (sr.width != hr.width || sr.height != hr.height) {
          throw DataError("output size does not match the ground truth");
        }
        row.psnr[m] = psnr(hr, sr);
        if (out_dir) write_png(sr, *out_dir / "images" / (stem + "_" + methods[m] + ".png"));
      } catch (const Error& e) {
        row.errors[m] = e.what();
      }
    }
    report.rows.push_back(std::move(row));
  }

  for (std::size_t m = 0; m < methods.size(); ++m) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : report.rows) {
      if (row.psnr[m]) {
        sum += *row.psnr[m];
        ++n;
      }
    }
    report.mean_psnr.push_back(n == 0 ? std::nan("") : sum / static_cast<double>(n));
  }

  if (out_dir) {
    std::ofstream(*out_dir / "report.csv", std::ios::binary | std::ios::trunc) << report.csv();
    std::ofstream(*out_dir / "report.txt", std::ios::trunc) << report.table();
    save_config(model.config, *out_dir / kConfigFile);
  }
  return report;
}

}  // namespace bsr
