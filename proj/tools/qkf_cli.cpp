// qkf: failure-classification pipeline driver.
//
//   qkf run --config cfg.json [--out dir] [--workers n] [--seed-override name=value]...
//   qkf label|train-kernel|grid-search|fit|curve|metrics --config cfg.json ...
//   qkf --config cfg.json --stage fit

#include "qkf/errors.hpp"
#include "qkf/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"Kernel-based failure classification of open-hole composite load paths"};
  app.require_subcommand(0, 1);

  std::string config_file;
  std::string out_dir;
  std::string stage_name;
  unsigned workers = 0;
  std::vector<std::string> seed_overrides;

  app.add_option("--config", config_file, "Run configuration (JSON)")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
  app.add_option("--workers", workers, "Maximum worker threads")->check(CLI::PositiveNumber);
  app.add_option("--stage", stage_name, "Stage to run when no subcommand is given");
  app.add_option("--seed-override", seed_overrides, "Override a named seed: name=value");
  app.fallthrough();

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"run", "Run every stage and write the manifest"},
      {"label", "Label load paths and split train/test"},
      {"train-kernel", "Maximize kernel-target alignment"},
      {"grid-search", "Cross-validate the slack penalty C"},
      {"fit", "Train the SVM and predict the test set"},
      {"curve", "Learning curve over training-set fractions"},
      {"metrics", "Classification scores from predictions"},
  };
  for (const auto& [name, help] : stages) app.add_subcommand(name, help);

  CLI11_PARSE(app, argc, argv);

  try {
    std::string chosen = "run";
    if (!app.get_subcommands().empty())
      chosen = app.get_subcommands().front()->get_name();
    else if (!stage_name.empty())
      chosen = stage_name;
    const auto stage = qkf::parse_stage(chosen);

    auto config = qkf::load_config(config_file, seed_overrides);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (workers > 0) {
      config.workers = workers;
      config.kta.workers = workers;
    }

    qkf::run_stage(config, stage, std::cout);
    return 0;
  } catch (const qkf::Error& e) {
    std::cerr << "error [" << qkf::to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
