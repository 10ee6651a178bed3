#pragma once

// Config-driven orchestration: label -> train-kernel -> grid-search -> fit ->
// curve -> metrics. Every stage reads the previous stage's files from the
// output directory, so stages can be rerun in isolation.

#include "qkf/alignment.hpp"
#include "qkf/data_pipeline.hpp"
#include "qkf/kernel.hpp"
#include "qkf/svm.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qkf {

inline constexpr int kConfigSchemaVersion = 1;

enum class InputKind { Synthetic, Paths, Raw, Dataset };

struct InputConfig {
  InputKind kind = InputKind::Synthetic;
  std::filesystem::path file;  // unused for synthetic input
  std::size_t n = 1000;        // synthetic sample count
};

struct KernelEntry {
  std::string name;
  KernelSpec spec;
  bool train = false;
  std::optional<double> C;  // overrides the grid-search choice
};

struct RunConfig {
  InputConfig input;
  PlateGeometry geometry;
  double threshold = kDefaultThreshold;
  double eps_div = kDefaultEpsDiv;
  double test_fraction = 0.2;
  std::vector<KernelEntry> kernels;
  KtaTrainConfig kta;
  SolverOptions svm;
  std::vector<double> C_grid{1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7};
  int folds = 5;
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  // split_seed, theta_seed, adam_seed, cv_seed, data_seed
  std::map<std::string, std::uint64_t> seeds{
      {"split_seed", 0}, {"theta_seed", 1}, {"adam_seed", 2}, {"cv_seed", 3}, {"data_seed", 4}};
  std::filesystem::path output_dir = "qkf_out";
  unsigned workers = 1;

  std::uint64_t seed(const std::string& name) const { return seeds.at(name); }
};

// Collects every validation problem before throwing a single Config error.
// Relative input paths are resolved against `base_dir`.
RunConfig parse_config(const nlohmann::json& j,
                       const std::filesystem::path& base_dir = {});
// Seed overrides ("name=value") are applied before parsing so derived values
// such as HE2 angles follow them.
RunConfig load_config(const std::filesystem::path& file,
                      const std::vector<std::string>& seed_overrides = {});
// All defaults filled in; written to the manifest.
nlohmann::json materialize(const RunConfig& config);

// Writes a "name=value" seed override into a raw config document.
void apply_seed_override(nlohmann::json& config, const std::string& assignment);

enum class Stage { Label, TrainKernel, GridSearch, Fit, Curve, Metrics, Run };

Stage parse_stage(const std::string& name);
std::string to_string(Stage stage);

// Runs one stage (or all of them for Stage::Run). Progress lines go to `log`
// and to log.txt in the output directory. Throws qkf::Error on failure.
void run_stage(const RunConfig& config, Stage stage, std::ostream& log);

}  // namespace qkf
