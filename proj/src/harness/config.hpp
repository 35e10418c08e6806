#pragma once

#include "fom/burgers.hpp"
#include "fom/model.hpp"
#include "neural/train.hpp"
#include "reduction/greedy.hpp"
#include "reduction/pod.hpp"
#include "surrogates/hybrid.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace romlab {

struct FomSettings {
  std::string benchmark = "burgers1d";  // "burgers1d" | "burgers2d"
  Index elements = 1000;
  double length = 2.0;
  double final_time = 0.5;
  Index steps = 500;
  std::string initial_condition = "continuous";  // 1D ic_formula: "continuous" | "literal"
  std::string form = "conservative";             // 2D: "conservative" | "nonconservative"
  double source_amplitude = 0.02;
  bool strict_bounds = false;
  NewtonOptions newton;
};

struct ReductionSettings {
  double tol_rb = 0.05;
  double tol_svd = 0.01;
  double tol_eim = 1e-5;
  Index eim_max = -1;
  Index r_s = 1;
  Index r_max = 200;
  Index r = 5;        // latent size of the hybrid/pure G-ROM
  Index r_tilde = 0;  // RBM G-ROM size; 0 uses the whole greedy basis
  Index lspg_r = 0;   // LSPG benchmark size; 0 skips LSPG in the benchmark
  RomKind rom_kind = RomKind::kGalerkin;
  BasisMode mode = BasisMode::kGreedyDirect;
  bool max_over_time = false;
  double lspg_oversample = 2.0;
  int repeat_limit = 10;
};

struct HybridSettings {
  bool enabled = true;
  ErrorNetSpec net;
  bool ux_only = false;  // 2D: correct the u_x block only
  bool projection_latents = false;
  nn::TrainConfig train;
};

struct NonIntrusiveSettings {
  bool enabled = true;
  Index r = 5;
  Index r0 = 0;  // > 0 compresses the error with POD
  ErrorNetSpec decoder;
  std::vector<Index> hidden{128, 128, 128, 128};
  bool ux_only = false;
  nn::TrainConfig train;
};

struct FigureSettings {
  std::vector<double> times;  // physical times of the slices
  Index y_index = -1;         // 2D: grid row of the slice (-1 = middle)
  std::vector<Param> mus;     // empty: every test parameter
};

struct ExperimentConfig {
  std::string name = "experiment";
  FomSettings fom;
  std::vector<Param> train;
  std::vector<Param> test;
  ReductionSettings reduction;
  HybridSettings hybrid;
  NonIntrusiveSettings nonintrusive;
  FigureSettings figures;
  std::string output = "out";
  std::uint64_t seed = 0;
  bool deterministic = false;
  int threads = 1;
  int timing_repeats = 3;

  TimeGrid time_grid() const { return TimeGrid(fom.final_time, fom.steps); }
};

// Parses a config; unknown keys are rejected so typos do not pass silently.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
// Canonical form (every field, sorted keys). Round-trips through parse_config.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

std::uint64_t fnv1a(const void* data, std::size_t size,
                    std::uint64_t h = 0xcbf29ce484222325ull);
std::uint64_t fnv1a_file(const std::string& path);
std::string hex64(std::uint64_t h);
// Hash of the canonical config without the output directory and thread count.
std::string config_hash(const ExperimentConfig& cfg);
// Hash of the settings that determine the FOM snapshots.
std::string fom_hash(const ExperimentConfig& cfg);

std::shared_ptr<FomModel> build_model(const ExperimentConfig& cfg);
// Rows the error nets see (whole state in 1D, optionally u_x only in 2D).
RowBlock hybrid_rows(const ExperimentConfig& cfg, const FomModel& model);
RowBlock nonintrusive_rows(const ExperimentConfig& cfg, const FomModel& model);
// Rows on which errors are reported.
RowBlock report_rows(const ExperimentConfig& cfg, const FomModel& model);

}  // namespace romlab
