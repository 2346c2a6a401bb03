// bsr: train, apply and benchmark the super-resolution models.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bsr/boost.hpp"
#include "bsr/config.hpp"
#include "bsr/corpus.hpp"
#include "bsr/errors.hpp"
#include "bsr/evaluate.hpp"
#include "bsr/image.hpp"
#include "bsr/pipeline.hpp"

namespace fs = std::filesystem;
using namespace bsr;

namespace {

Config config_or_default(const std::string& path) {
  return path.empty() ? Config{} : load_config(path);
}

std::vector<Image> images_of(const std::vector<NamedImage>& set) {
  std::vector<Image> out;
  out.reserve(set.size());
  for (const auto& n : set) out.push_back(n.image);
  return out;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".pgm" || ext == ".pnm";
}

void train_dict(const std::string& train, const std::string& config_path, const std::string& out) {
  const Config config = config_or_default(config_path);
  std::vector<std::string> warnings;
  const auto set = ingest_dataset(train, DatasetRole::train_dict, config, &warnings);
  print_warnings(warnings);
  std::cout << "training dictionaries on " << set.size() << " images\n";
  const DictionaryStage stage = train_dictionary_stage(images_of(set), config);
  save_dictionary_stage(out, config, stage.pair, stage.anchors);
  std::cout << stage.samples << " patch pairs, " << stage.pair.low.rows() << " feature dims, "
            << stage.pair.atoms() << " atoms";
  if (!stage.trace.objective.empty()) std::cout << ", final objective " << stage.trace.objective.back();
  std::cout << "\nwrote " << out << "\n";
}

void train_boost_cmd(const std::string& train, const std::string& dict, const std::string& config_path,
                     const std::string& out) {
  const Model base = load_model(dict);
  const Config config = config_path.empty() ? base.config : load_config(config_path);
  std::vector<std::string> warnings;
  const auto set = ingest_dataset(train, DatasetRole::train_boost, config, &warnings);
  print_warnings(warnings);
  std::cout << "boosting on " << set.size() << " images\n";
  BoostTrace trace;
  const BoostModel model = train_boost(degrade_all(images_of(set), config), base.pair, config.boost(), &trace);
  for (std::size_t m = 0; m < trace.errors.size(); ++m)
    std::cout << "round " << (m + 1) << ": error " << trace.errors[m]
              << (m < model.rounds.size() ? "" : " (discarded)") << "\n";
  save_dictionary_stage(out, config, base.pair, base.anchors);
  save_boost_model(fs::path(out) / kBoostFile, model);
  std::cout << model.rounds.size() << " rounds kept; wrote " << out << "\n";
}

void sr_cmd(const std::string& input, const std::string& model_dir, const std::string& method_name,
            const std::string& out) {
  const Method method = parse_method(method_name);
  const Model model = load_model(model_dir);
  std::vector<fs::path> inputs;
  if (fs::is_directory(input)) {
    for (const auto& e : fs::directory_iterator(input))
      if (e.is_regular_file() && is_image_file(e.path())) inputs.push_back(e.path());
    std::sort(inputs.begin(), inputs.end());
  } else {
    inputs.emplace_back(input);
  }
  if (inputs.empty()) throw DataError("no input images in " + input);
  fs::create_directories(out);
  for (const auto& p : inputs) {
    const Image hr = super_resolve(read_image(p), method, model);
    const fs::path dst = fs::path(out) / (p.stem().string() + "_" + to_string(method) + ".png");
    write_png(hr, dst);
    std::cout << dst.string() << "\n";
  }
}

void eval_cmd(const std::string& test, const std::string& model_dir, const std::string& methods,
              const std::string& out) {
  const Model model = load_model(model_dir);
  std::vector<std::string> warnings;
  const auto set = ingest_dataset(test, DatasetRole::test, model.config, &warnings);
  print_warnings(warnings);
  const auto names = split_list(methods);
  if (names.empty()) throw UsageError("--methods is empty");
  const EvalReport report = evaluate(set, names, model, fs::path(out));
  std::cout << report.table();
}

void gen_corpus(std::size_t count, std::uint64_t seed, const std::string& out) {
  if (count == 0) throw UsageError("--count must be positive");
  fs::create_directories(out);
  for (const auto& img : generate_corpus(count, seed)) write_png(img.image, fs::path(out) / img.name);
  std::cout << "wrote " << count << " images to " << out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-coding face super-resolution with boosted patch weights"};
  app.require_subcommand(1);

  std::string train, dict, config, out, input, model, method, test, methods = "bicubic,sparse,anr,boost";
  std::size_t count = 0;
  std::uint64_t seed = 0;

  auto* td = app.add_subcommand("train-dict", "Learn the coupled dictionaries and ANR projections");
  td->add_option("--train", train, "Folder of HR training images")->required();
  td->add_option("--config", config, "key = value config file");
  td->add_option("--out", out, "Model directory to write")->required();

  auto* tb = app.add_subcommand("train-boost", "Train the boosted patch weights on held-out images");
  tb->add_option("--train", train, "Folder of HR images not used for the dictionaries")->required();
  tb->add_option("--dict", dict, "Model directory from train-dict")->required();
  tb->add_option("--config", config, "key = value config file (defaults to the dictionary's)");
  tb->add_option("--out", out, "Model directory to write")->required();

  auto* sr = app.add_subcommand("sr", "Super-resolve LR images");
  sr->add_option("--input", input, "LR image or folder")->required();
  sr->add_option("--model", model, "Model directory")->required();
  sr->add_option("--method", method, "bicubic, sparse, anr or boost")->required();
  sr->add_option("--out", out, "Output folder")->required();

  auto* ev = app.add_subcommand("eval", "Degrade HR test images and report PSNR per method");
  ev->add_option("--test", test, "Folder of HR test images")->required();
  ev->add_option("--model", model, "Model directory")->required();
  ev->add_option("--methods", methods, "Comma-separated methods (or oracle)")->capture_default_str();
  ev->add_option("--out", out, "Report folder")->required();

  auto* gc = app.add_subcommand("gen-corpus", "Write a synthetic face-like corpus");
  gc->add_option("--count", count, "Number of images")->required();
  gc->add_option("--seed", seed, "Corpus seed")->required();
  gc->add_option("--out", out, "Output folder")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*td) train_dict(train, config, out);
    if (*tb) train_boost_cmd(train, dict, config, out);
    if (*sr) sr_cmd(input, model, method, out);
    if (*ev) eval_cmd(test, model, methods, out);
    if (*gc) gen_corpus(count, seed, out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
