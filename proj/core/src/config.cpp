#include "bsr/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "bsr/errors.hpp"

namespace bsr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  in.imbue(std::locale::classic());
  double out = 0.0;
  in >> out;
  if (!in || !in.eof()) {
    throw UsageError("config key '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

std::string format_real(double v) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17) << v;
  return out.str();
}

struct Field {
  std::function<void(Config&, const std::string&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

template <typename T>
Field size_field(T Config::*member) {
  return {[member](Config& c, const std::string& k, const std::string& v) { c.*member = static_cast<T>(parse_size(k, v)); },
          [member](const Config& c) { return std::to_string(c.*member); }};
}

Field real_field(double Config::*member) {
  return {[member](Config& c, const std::string& k, const std::string& v) { c.*member = parse_real(k, v); },
          [member](const Config& c) { return format_real(c.*member); }};
}

// Ordered so format_config output is stable.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"scale_factor", size_field(&Config::scale_factor)},
      {"image_size", size_field(&Config::image_size)},
      {"hr_patch_size", size_field(&Config::hr_patch_size)},
      {"hr_overlap", size_field(&Config::hr_overlap)},
      {"lr_patch_size", size_field(&Config::lr_patch_size)},
      {"lr_overlap", size_field(&Config::lr_overlap)},
      {"blur_size", size_field(&Config::blur_size)},
      {"blur_sigma", real_field(&Config::blur_sigma)},
      {"noise_sigma", real_field(&Config::noise_sigma)},
      {"dict_size", size_field(&Config::dict_size)},
      {"ksvd_iterations", size_field(&Config::ksvd_iterations)},
      {"omp_sparsity", size_field(&Config::omp_sparsity)},
      {"pca_energy", real_field(&Config::pca_energy)},
      {"max_train_samples", size_field(&Config::max_train_samples)},
      {"k_nn", size_field(&Config::k_nn)},
      {"lambda", real_field(&Config::lambda)},
      {"theta", real_field(&Config::theta)},
      {"boost_rounds", size_field(&Config::boost_rounds)},
      {"loss", {[](Config& c, const std::string&, const std::string& v) { c.loss = parse_loss_kind(v); },
                [](const Config& c) { return to_string(c.loss); }}},
      {"weight_sharpness", real_field(&Config::weight_sharpness)},
      {"boost_train_count", size_field(&Config::boost_train_count)},
      {"bp_c", real_field(&Config::bp_c)},
      {"bp_tau", real_field(&Config::bp_tau)},
      {"bp_iterations", size_field(&Config::bp_iterations)},
      {"seed", size_field(&Config::seed)},
  };
  return table;
}

}  // namespace

void Config::validate() const {
  if (scale_factor < 2) throw UsageError("scale_factor must be at least 2");
  if (lr_overlap >= lr_patch_size) throw UsageError("lr_overlap must be smaller than lr_patch_size");
  if (hr_overlap >= hr_patch_size) throw UsageError("hr_overlap must be smaller than hr_patch_size");
  if (hr_patch_size != lr_patch_size * scale_factor) {
    throw UsageError("hr_patch_size must equal lr_patch_size * scale_factor");
  }
  if (hr_patch_size - hr_overlap != (lr_patch_size - lr_overlap) * scale_factor) {
    throw UsageError("HR stride must equal LR stride * scale_factor");
  }
  if (image_size != 0 && (image_size % scale_factor != 0 || image_size < hr_patch_size)) {
    throw UsageError("image_size must be a multiple of scale_factor and at least hr_patch_size");
  }
  if (blur_size == 0 || blur_size % 2 == 0) throw UsageError("blur_size must be odd");
  if (!(blur_sigma > 0.0)) throw UsageError("blur_sigma must be positive");
  if (noise_sigma < 0.0) throw UsageError("noise_sigma must be non-negative");
  if (dict_size < 1) throw UsageError("dict_size must be positive");
  if (omp_sparsity < 1) throw UsageError("omp_sparsity must be positive");
  if (!(pca_energy > 0.0 && pca_energy <= 1.0)) throw UsageError("pca_energy must be in (0, 1]");
  if (k_nn < 1 || k_nn > dict_size) throw UsageError("k_nn must be in [1, dict_size]");
  if (!(lambda > 0.0)) throw UsageError("lambda must be positive");
  if (theta < 0.0) throw UsageError("theta must be non-negative");
  if (boost_rounds < 1) throw UsageError("boost_rounds must be positive");
  if (!(weight_sharpness > 0.0)) throw UsageError("weight_sharpness must be positive");
  if (bp_c < 0.0) throw UsageError("bp_c must be non-negative");
  if (!(bp_tau > 0.0)) throw UsageError("bp_tau must be positive");
}

DegradationModel Config::degradation(std::uint64_t noise_seed) const {
  return DegradationModel::gaussian(blur_size, blur_sigma, scale_factor, noise_sigma, noise_seed);
}

KsvdOptions Config::ksvd() const { return {dict_size, ksvd_iterations, omp_sparsity, seed}; }

BoostConfig Config::boost() const {
  BoostConfig b;
  b.rounds = boost_rounds;
  b.loss = loss;
  b.lambda = lambda;
  b.theta = theta;
  b.sharpness = weight_sharpness;
  b.bp_c = bp_c;
  return b;
}

BackProjectionOptions Config::back_projection() const {
  BackProjectionOptions o;
  o.c = bp_c;
  o.step = bp_tau;
  o.iterations = bp_iterations;
  return o;
}

Config parse_config(const std::string& text) {
  std::map<std::string, const Field*> lookup;
  for (const auto& [name, field] : fields()) lookup[name] = &field;

  Config config;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = lookup.find(key);
    if (it == lookup.end()) throw UsageError("unknown config key '" + key + "'");
    if (!seen.insert(key).second) throw UsageError("duplicate config key '" + key + "'");
    it->second->set(config, key, value);
  }
  config.validate();
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_config(const Config& config) {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(config) + "\n";
  return out;
}

void save_config(const Config& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_config(config);
}

}  // namespace bsr
