#include "qkf/pipeline.hpp"

#include "qkf/dataset_io.hpp"
#include "qkf/errors.hpp"
#include "qkf/model_eval.hpp"

#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace qkf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string input_kind_name(InputKind k) {
  switch (k) {
    case InputKind::Synthetic: return "synthetic";
    case InputKind::Paths: return "paths";
    case InputKind::Raw: return "raw";
    case InputKind::Dataset: return "dataset";
  }
  return "synthetic";
}

}  // namespace

Stage parse_stage(const std::string& name) {
  if (name == "label") return Stage::Label;
  if (name == "train-kernel") return Stage::TrainKernel;
  if (name == "grid-search") return Stage::GridSearch;
  if (name == "fit") return Stage::Fit;
  if (name == "curve") return Stage::Curve;
  if (name == "metrics") return Stage::Metrics;
  if (name == "run") return Stage::Run;
  throw Error(ErrorCode::Config, "unknown stage '" + name + "'");
}

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Label: return "label";
    case Stage::TrainKernel: return "train-kernel";
    case Stage::GridSearch: return "grid-search";
    case Stage::Fit: return "fit";
    case Stage::Curve: return "curve";
    case Stage::Metrics: return "metrics";
    case Stage::Run: return "run";
  }
  return "run";
}

// ---------------------------------------------------------------------------
// Configuration

RunConfig parse_config(const json& j, const fs::path& base_dir) {
  RunConfig cfg;
  std::vector<std::string> problems;
  auto problem = [&](std::string msg) { problems.push_back(std::move(msg)); };

  // Each field is read independently so one bad entry does not hide the rest.
  auto field = [&](const char* key, auto& target) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(target);
    } catch (const json::exception&) {
      problem(std::string("field '") + key + "' has the wrong type");
    }
  };

  if (!j.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
  if (!j.contains("schema_version")) {
    problem("missing schema_version");
  } else if (!j["schema_version"].is_number_integer() ||
             j["schema_version"].get<int>() != kConfigSchemaVersion) {
    problem("unsupported schema_version (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }

  if (j.contains("input")) {
    const auto& in = j["input"];
    const auto kind = in.value("kind", std::string("synthetic"));
    if (kind == "synthetic") {
      cfg.input.kind = InputKind::Synthetic;
      cfg.input.n = in.value("n", std::size_t{1000});
      if (cfg.input.n < 4) problem("input.n must be >= 4");
    } else if (kind == "paths" || kind == "raw" || kind == "dataset") {
      cfg.input.kind = kind == "paths" ? InputKind::Paths
                       : kind == "raw" ? InputKind::Raw
                                       : InputKind::Dataset;
      if (!in.contains("file") || !in["file"].is_string()) {
        problem("input.file is required for input kind '" + kind + "'");
      } else {
        fs::path file = in["file"].get<std::string>();
        if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
        cfg.input.file = file;
        if (!fs::exists(file)) problem("input file not found: " + file.string());
      }
    } else {
      problem("unknown input.kind '" + kind + "'");
    }
  }

  if (j.contains("geometry")) {
    const auto& g = j["geometry"];
    cfg.geometry.d1 = g.value("D1", cfg.geometry.d1);
    cfg.geometry.d2 = g.value("D2", cfg.geometry.d2);
    cfg.geometry.t = g.value("t", cfg.geometry.t);
    cfg.geometry.hole_diameter = g.value("hole_diameter", cfg.geometry.hole_diameter);
    try {
      cfg.geometry.validate();
    } catch (const Error& e) {
      problem(std::string("geometry: ") + e.what());
    }
  }

  field("threshold", cfg.threshold);
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) problem("threshold must lie in (0, 1)");
  field("eps_div", cfg.eps_div);
  if (!(cfg.eps_div > 0.0)) problem("eps_div must be positive");
  field("test_fraction", cfg.test_fraction);
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0))
    problem("test_fraction must lie in (0, 1)");
  field("C_grid", cfg.C_grid);
  if (cfg.C_grid.empty()) problem("C_grid must not be empty");
  for (double C : cfg.C_grid)
    if (!(C > 0.0)) problem("C_grid values must be positive");
  field("folds", cfg.folds);
  if (cfg.folds < 2) problem("folds must be >= 2");
  field("fractions", cfg.fractions);
  if (cfg.fractions.empty()) problem("fractions must not be empty");
  for (std::size_t i = 0; i < cfg.fractions.size(); ++i) {
    if (!(cfg.fractions[i] > 0.0 && cfg.fractions[i] <= 1.0)) problem("fractions must lie in (0, 1]");
    if (i > 0 && !(cfg.fractions[i] > cfg.fractions[i - 1]))
      problem("fractions must be strictly increasing");
  }
  if (j.contains("output_dir") && j["output_dir"].is_string())
    cfg.output_dir = j["output_dir"].get<std::string>();
  field("workers", cfg.workers);

  if (j.contains("seeds")) {
    if (!j["seeds"].is_object()) {
      problem("seeds must be an object");
    } else {
      for (const auto& [name, value] : j["seeds"].items()) {
        if (!cfg.seeds.contains(name)) {
          problem("unknown seed '" + name + "'");
        } else if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0)) {
          problem("seed '" + name + "' must be a non-negative integer");
        } else {
          cfg.seeds[name] = value.get<std::uint64_t>();
        }
      }
    }
  }

  if (j.contains("kta")) {
    const auto& k = j["kta"];
    cfg.kta.iterations = k.value("iterations", cfg.kta.iterations);
    cfg.kta.adam.learning_rate = k.value("learning_rate", cfg.kta.adam.learning_rate);
    cfg.kta.adam.beta1 = k.value("beta1", cfg.kta.adam.beta1);
    cfg.kta.adam.beta2 = k.value("beta2", cfg.kta.adam.beta2);
    cfg.kta.adam.epsilon = k.value("epsilon", cfg.kta.adam.epsilon);
    cfg.kta.batch_size = k.value("batch_size", cfg.kta.batch_size);
    cfg.kta.log_every = k.value("log_every", cfg.kta.log_every);
    cfg.kta.fd_step = k.value("fd_step", cfg.kta.fd_step);
    if (cfg.kta.iterations < 0) problem("kta.iterations must be >= 0");
    if (!(cfg.kta.adam.learning_rate > 0.0)) problem("kta.learning_rate must be positive");
    if (cfg.kta.batch_size < 2) problem("kta.batch_size must be >= 2");
    if (cfg.kta.log_every < 1) problem("kta.log_every must be >= 1");
  }

  if (j.contains("svm")) {
    const auto& s = j["svm"];
    cfg.svm.tol = s.value("tol", cfg.svm.tol);
    cfg.svm.max_iter = s.value("max_iter", cfg.svm.max_iter);
    cfg.svm.support_eps = s.value("support_eps", cfg.svm.support_eps);
    if (!(cfg.svm.tol > 0.0)) problem("svm.tol must be positive");
  }

  Scaler classical = Scaler::classical();
  Scaler quantum = Scaler::quantum();
  if (j.contains("scaler_targets")) {
    const auto& st = j["scaler_targets"];
    try {
      if (st.contains("classical"))
        classical = Scaler::to_interval(st["classical"].at(0).get<double>(), st["classical"].at(1).get<double>());
      if (st.contains("quantum"))
        quantum = Scaler::to_interval(st["quantum"].at(0).get<double>(), st["quantum"].at(1).get<double>());
    } catch (const std::exception& e) {
      problem(std::string("scaler_targets: ") + e.what());
    }
  }

  if (!j.contains("kernels") || !j["kernels"].is_array() || j["kernels"].empty()) {
    problem("kernels must be a non-empty array");
  } else {
    std::set<std::string> names;
    std::size_t index = 0;
    for (const auto& entry : j["kernels"]) {
      const std::string where = "kernels[" + std::to_string(index) + "]";
      try {
        json spec_json = entry;
        const auto kind = entry.at("kind").get<std::string>();
        if (kind == "he2" && !entry.contains("theta")) {
          const int w = entry.at("width").get<int>(), d = entry.at("depth").get<int>();
          spec_json["theta"] = EmbeddingSpec::he2(w, d, cfg.seed("theta_seed") + index).theta;
        }
        if (!entry.contains("scaler"))
          spec_json["scaler"] = to_json(kind == "iqp" || kind == "he2" ? quantum : classical);
        KernelEntry ke;
        ke.spec = kernel_from_json(spec_json);
        ke.name = entry.value("name", ke.spec.default_name());
        ke.train = entry.value("train", false);
        if (entry.contains("C")) ke.C = entry["C"].get<double>();
        if (ke.train && !is_trainable(ke.spec))
          problem(where + ": kernel '" + ke.name + "' is not trainable");
        if (ke.C && !(*ke.C > 0.0)) problem(where + ": C must be positive");
        if (!names.insert(ke.name).second) problem(where + ": duplicate kernel name '" + ke.name + "'");
        cfg.kernels.push_back(std::move(ke));
      } catch (const std::exception& e) {
        problem(where + ": " + e.what());
      }
      ++index;
    }
  }

  cfg.kta.seed = cfg.seed("adam_seed");
  cfg.kta.workers = cfg.workers;

  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw Error(ErrorCode::Config, msg);
  }
  return cfg;
}

RunConfig load_config(const fs::path& file, const std::vector<std::string>& seed_overrides) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::Config, "invalid configuration:\n  - config file not found: " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, "config " + file.string() + " is not valid JSON: " + e.what());
  }
  for (const auto& o : seed_overrides) apply_seed_override(j, o);
  return parse_config(j, file.parent_path());
}

json materialize(const RunConfig& cfg) {
  json kernels = json::array();
  for (const auto& k : cfg.kernels) {
    json e = to_json(k.spec);
    e["name"] = k.name;
    e["train"] = k.train;
    if (k.C) e["C"] = *k.C;
    kernels.push_back(e);
  }
  json input = {{"kind", input_kind_name(cfg.input.kind)}};
  if (cfg.input.kind == InputKind::Synthetic)
    input["n"] = cfg.input.n;
  else
    input["file"] = cfg.input.file.string();
  return {
      {"schema_version", kConfigSchemaVersion},
      {"input", input},
      {"geometry",
       {{"D1", cfg.geometry.d1},
        {"D2", cfg.geometry.d2},
        {"t", cfg.geometry.t},
        {"hole_diameter", cfg.geometry.hole_diameter}}},
      {"threshold", cfg.threshold},
      {"eps_div", cfg.eps_div},
      {"test_fraction", cfg.test_fraction},
      {"kernels", kernels},
      {"kta",
       {{"iterations", cfg.kta.iterations},
        {"learning_rate", cfg.kta.adam.learning_rate},
        {"beta1", cfg.kta.adam.beta1},
        {"beta2", cfg.kta.adam.beta2},
        {"epsilon", cfg.kta.adam.epsilon},
        {"batch_size", cfg.kta.batch_size},
        {"log_every", cfg.kta.log_every},
        {"fd_step", cfg.kta.fd_step}}},
      {"svm", {{"tol", cfg.svm.tol}, {"max_iter", cfg.svm.max_iter}, {"support_eps", cfg.svm.support_eps}}},
      {"C_grid", cfg.C_grid},
      {"folds", cfg.folds},
      {"fractions", cfg.fractions},
      {"seeds", cfg.seeds},
  };
}

void apply_seed_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw Error(ErrorCode::Config, "seed override must look like name=value: " + assignment);
  const auto name = assignment.substr(0, eq);
  if (!RunConfig{}.seeds.contains(name)) throw Error(ErrorCode::Config, "unknown seed '" + name + "'");
  const auto text = assignment.substr(eq + 1);
  try {
    std::size_t used = 0;
    const auto value = std::stoull(text, &used);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument("not unsigned");
    if (!config.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
    config["seeds"][name] = value;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::Config, "seed override value is not an unsigned integer: " + assignment);
  }
}

// ---------------------------------------------------------------------------
// Stages

namespace {

class StageRunner {
 public:
  StageRunner(const RunConfig& cfg, Stage stage, std::ostream& console)
      : cfg_(cfg), out_(cfg.output_dir), console_(console) {
    fs::create_directories(out_);
    // A full run starts a fresh log; single stages append to it.
    log_file_.open(out_ / "log.txt", stage == Stage::Run ? std::ios::trunc : std::ios::app);
  }

  void run(Stage stage) {
    switch (stage) {
      case Stage::Label: label(); break;
      case Stage::TrainKernel: train_kernels(); break;
      case Stage::GridSearch: grid_search(); break;
      case Stage::Fit: fit(); break;
      case Stage::Curve: curve(); break;
      case Stage::Metrics: metrics(); break;
      case Stage::Run:
        for (auto s : {Stage::Label, Stage::TrainKernel, Stage::GridSearch, Stage::Fit,
                       Stage::Curve, Stage::Metrics})
          guarded(s);
        write_manifest();
        break;
    }
  }

  void guarded(Stage s) {
    try {
      run(s);
    } catch (const Error& e) {
      throw Error(e.code(), "stage " + to_string(s) + " failed: " + e.what());
    }
  }

 private:
  void log(const std::string& line) {
    console_ << line << '\n';
    log_file_ << line << '\n';
  }

  fs::path require(const fs::path& rel) const {
    const auto p = out_ / rel;
    if (!fs::exists(p))
      throw Error(ErrorCode::Dependency, "required upstream artifact missing: " + p.string());
    return p;
  }

  std::ofstream create(const fs::path& rel) {
    const auto p = out_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + p.string());
    outputs_.insert(rel.generic_string());
    return f;
  }

  void write_json(const fs::path& rel, const json& j) { create(rel) << j.dump(2) << '\n'; }

  json read_json(const fs::path& rel) const {
    std::ifstream in(require(rel));
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, (out_ / rel).string() + ": " + e.what());
    }
  }

  KernelSpec trained_kernel(const KernelEntry& k) const {
    return kernel_from_json(read_json(fs::path("kernels") / (k.name + ".json")));
  }

  double chosen_C(const KernelEntry& k) const {
    if (k.C) return *k.C;
    return read_json(fs::path("cv") / (k.name + ".json")).at("best_C").get<double>();
  }

  // -- label ---------------------------------------------------------------
  void label() {
    Dataset ds;
    switch (cfg_.input.kind) {
      case InputKind::Synthetic:
        ds = synth_oracle_dataset(cfg_.input.n, cfg_.seed("data_seed")).dataset;
        break;
      case InputKind::Paths:
        ds = make_dataset(read_paths_csv(cfg_.input.file), cfg_.threshold, cfg_.eps_div);
        break;
      case InputKind::Raw:
        ds = make_dataset(read_raw_csv(cfg_.input.file, cfg_.geometry, cfg_.eps_div),
                          cfg_.threshold, cfg_.eps_div);
        break;
      case InputKind::Dataset:
        ds = read_dataset_csv(cfg_.input.file);
        break;
    }
    const auto [train, test] = split_dataset(ds, cfg_.test_fraction, cfg_.seed("split_seed"));
    { auto f = create("dataset.csv"); write_dataset_csv(f, ds); }
    { auto f = create("train.csv"); write_dataset_csv(f, train); }
    { auto f = create("test.csv"); write_dataset_csv(f, test); }
    const auto counts = ds.class_counts();
    write_json("label_summary.json", {{"samples", ds.size()},
                                      {"non_failed", counts[0]},
                                      {"failed", counts[1]},
                                      {"train", train.size()},
                                      {"test", test.size()},
                                      {"threshold", cfg_.threshold}});
    log("label: " + std::to_string(ds.size()) + " samples (" + std::to_string(counts[0]) +
        " non-failed, " + std::to_string(counts[1]) + " failed), train " +
        std::to_string(train.size()) + ", test " + std::to_string(test.size()));
  }

  // -- train-kernel ----------------------------------------------------------
  void train_kernels() {
    const auto train = read_dataset_csv(require("train.csv"));
    for (const auto& k : cfg_.kernels) {
      KernelSpec spec = k.spec;
      if (k.train) {
        auto [trained, report] = train_kta(spec, train.features(spec.scaler), train.labels(), cfg_.kta);
        { auto f = create(fs::path("kta") / (k.name + "_history.csv")); write_kta_history_csv(f, report); }
        write_json(fs::path("kta") / (k.name + "_summary.json"), kta_summary_json(report, trained));
        log("train-kernel: " + k.name + " KTA " + format_double(report.initial_kta()) + " -> " +
            format_double(report.final_kta()));
        spec = std::move(trained);
      } else {
        log("train-kernel: " + k.name + " kept fixed");
      }
      write_json(fs::path("kernels") / (k.name + ".json"), to_json(spec));
    }
  }

  // -- grid-search -----------------------------------------------------------
  void grid_search() {
    const auto train = read_dataset_csv(require("train.csv"));
    for (const auto& k : cfg_.kernels) {
      const auto spec = trained_kernel(k);
      const auto cv = grid_search_cv(spec, train.features(spec.scaler), train.labels(), cfg_.C_grid,
                                     cfg_.folds, cfg_.seed("cv_seed"), cfg_.svm, cfg_.workers);
      for (const auto& w : cv.warnings) log("grid-search: warning: " + w);
      { auto f = create(fs::path("cv") / (k.name + ".csv")); write_cv_csv(f, cv); }
      write_json(fs::path("cv") / (k.name + ".json"), to_json(cv));
      log("grid-search: " + k.name + " best C " + format_double(cv.best_C));
    }
  }

  // -- fit -------------------------------------------------------------------
  void fit() {
    const auto train = read_dataset_csv(require("train.csv"));
    const auto test = read_dataset_csv(require("test.csv"));
    for (const auto& k : cfg_.kernels) {
      const auto spec = trained_kernel(k);
      const double C = chosen_C(k);
      const auto model = fit_svm(spec, train.features(spec.scaler), train.labels(), C, cfg_.svm, cfg_.workers);
      write_json(fs::path("models") / (k.name + ".json"), to_json(model));
      const Vector f = decision_values(model, test.features(spec.scaler), cfg_.workers);
      auto out = create(fs::path("predictions") / (k.name + ".csv"));
      out << "index,label,decision,predicted\n";
      for (std::size_t i = 0; i < test.size(); ++i) {
        const double v = f(static_cast<Eigen::Index>(i));
        out << i << ',' << test.samples[i].y << ',' << format_double(v) << ',' << sign_label(v) << '\n';
      }
      log("fit: " + k.name + " C " + format_double(C) + ", " +
          std::to_string(model.support_indices.size()) + " support vectors, " +
          (model.diagnostics.converged ? "converged" : "NOT converged"));
    }
  }

  // -- curve -----------------------------------------------------------------
  void curve() {
    const auto train = read_dataset_csv(require("train.csv"));
    const auto test = read_dataset_csv(require("test.csv"));
    for (const auto& k : cfg_.kernels) {
      const auto spec = trained_kernel(k);
      const auto lc = learning_curve(spec, train.features(spec.scaler), train.labels(),
                                     test.features(spec.scaler), test.labels(), chosen_C(k),
                                     cfg_.fractions, cfg_.seed("cv_seed"), cfg_.svm, cfg_.workers);
      { auto f = create(fs::path("curves") / (k.name + ".csv")); write_curve_csv(f, lc); }
      write_json(fs::path("curves") / (k.name + ".json"), to_json(lc));
      log("curve: " + k.name + " accuracy at N_train=" + std::to_string(lc.points.back().n_train) +
          ": " + format_double(lc.points.back().metrics.accuracy));
    }
  }

  // -- metrics ---------------------------------------------------------------
  void metrics() {
    for (const auto& k : cfg_.kernels) {
      const auto file = require(fs::path("predictions") / (k.name + ".csv"));
      std::ifstream in(file);
      std::string line;
      std::getline(in, line);
      if (line != "index,label,decision,predicted")
        throw Error(ErrorCode::Parse, file.string() + ": unexpected header");
      Labels truth, pred;
      std::size_t row = 1;
      while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 4)
          throw Error(ErrorCode::Parse, file.string() + ": row " + std::to_string(row) + " malformed");
        truth.push_back(std::stoi(cells[1]));
        pred.push_back(std::stoi(cells[3]));
      }
      const auto counts = confusion(truth, pred);
      const auto m = classification_metrics(counts);
      write_json(fs::path("metrics") / (k.name + ".json"),
                 {{"kernel", k.name}, {"counts", to_json(counts)}, {"metrics", to_json(m)}});
      log("metrics: " + k.name + " accuracy " + format_double(m.accuracy));
    }
  }

  void write_manifest() {
    json manifest = {{"version", kVersion}, {"config", materialize(cfg_)}};
    outputs_.insert("manifest.json");
    manifest["outputs"] = outputs_;
    auto f = create("manifest.json");
    f << manifest.dump(2) << '\n';
  }

  const RunConfig& cfg_;
  fs::path out_;
  std::ostream& console_;
  std::ofstream log_file_;
  std::set<std::string> outputs_;
};

}  // namespace

void run_stage(const RunConfig& config, Stage stage, std::ostream& log) {
  StageRunner runner(config, stage, log);
  if (stage == Stage::Run)
    runner.run(stage);
  else
    runner.guarded(stage);
}

}  // namespace qkf
