// Command-line front end. Links only the C interface.
#include "romlab/romlab.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0;
constexpr int kStageFailure = 1;
constexpr int kUsage = 2;

int report_failure(const char* what, romlab_status s) {
  std::fprintf(stderr, "romlab: %s failed (%s): %s\n", what, romlab_status_string(s),
               romlab_last_error());
  return kStageFailure;
}

struct Globals {
  std::string config, out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool deterministic = false;
};

std::string output_override(const Globals& g) {
  if (!g.out.empty()) return g.out;
  if (const char* env = std::getenv("ROMLAB_OUT"); env && *env) return env;
  return {};
}

int run_stage(const Globals& g, const std::string& stage) {
  if (g.config.empty()) {
    std::fprintf(stderr, "romlab: %s requires --config\n", stage.c_str());
    return kUsage;
  }
  romlab_config* cfg = nullptr;
  romlab_status s = romlab_config_load(g.config.c_str(), &cfg);
  if (s != ROMLAB_OK) return report_failure("loading config", s);
  const std::string out = output_override(g);
  if (s == ROMLAB_OK && !out.empty()) s = romlab_config_set_output(cfg, out.c_str());
  if (s == ROMLAB_OK && g.seed_set) s = romlab_config_set_seed(cfg, g.seed);
  if (s == ROMLAB_OK && g.threads > 0) s = romlab_config_set_threads(cfg, g.threads);
  if (s == ROMLAB_OK && g.deterministic) s = romlab_config_set_deterministic(cfg, 1);
  if (s != ROMLAB_OK) {
    romlab_config_free(cfg);
    return report_failure("applying options", s);
  }
  char dir[4096] = {0};
  romlab_config_output(cfg, dir, sizeof dir);
  s = romlab_run_stage(cfg, stage.c_str());
  romlab_config_free(cfg);
  if (s != ROMLAB_OK) return report_failure(stage.c_str(), s);
  std::printf("%s: done, artifacts in %s/%s\n", stage.c_str(), dir, stage.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-order and neural surrogate pipeline for parametric Burgers problems"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Experiment configuration (JSON)");
  app.add_option("--out", g.out, "Output directory (overrides ROMLAB_OUT and the config)");
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed (overrides the config)");
  app.add_option("--threads", g.threads, "Thread count recorded with the run")
      ->check(CLI::PositiveNumber);
  app.add_flag("--deterministic", g.deterministic, "Single-threaded, reproducible run");

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"snapshots", "Simulate the FOM at the training and test parameters"},
      {"eim", "Build the EIM from training nonlinearity snapshots"},
      {"greedy", "Run POD-greedy with the residual error estimator"},
      {"rom-simulate", "Simulate the configured ROMs at the test parameters"},
      {"train-hybrid", "Train the G-ROM error-correction network"},
      {"train-nonintrusive", "Train the POD-FFNN-e-decoder surrogate"},
      {"benchmark", "Run FOM and all configured surrogates at the test parameters"},
  };
  std::vector<CLI::App*> stage_cmds;
  for (const auto& [name, help] : stages) stage_cmds.push_back(app.add_subcommand(name, help));

  auto* predict = app.add_subcommand("predict", "Predict a trajectory with a surrogate bundle");
  std::string bundle, file;
  std::vector<double> mu;
  predict->add_option("--surrogate", bundle, "Bundle directory")->required();
  predict->add_option("--mu", mu, "Parameter value(s)")->required()->expected(1, 8);
  predict->add_option("--file", file, "Output trajectory file (default <out>/prediction.romsnap)");

  auto* report = app.add_subcommand("report", "Merge run manifests into one table");
  std::string runs;
  report->add_option("--runs", runs, "Directory holding one or more runs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  g.seed_set = seed_opt->count() > 0;

  for (std::size_t k = 0; k < stages.size(); ++k)
    if (stage_cmds[k]->parsed()) return run_stage(g, stages[k].first);

  if (predict->parsed()) {
    if (file.empty()) {
      std::string out = output_override(g);
      if (out.empty()) out = ".";
      std::filesystem::create_directories(out);
      file = out + "/prediction.romsnap";
    }
    const romlab_status s = romlab_predict(bundle.c_str(), mu.data(), mu.size(), file.c_str());
    if (s != ROMLAB_OK) return report_failure("predict", s);
    std::printf("predict: wrote %s\n", file.c_str());
    return kOk;
  }
  if (report->parsed()) {
    char path[4096];
    const romlab_status s = romlab_report(runs.c_str(), path, sizeof path);
    if (s != ROMLAB_OK) return report_failure("report", s);
    std::printf("report: wrote %s\n", path);
    return kOk;
  }
  return kUsage;
}
