#pragma once

#include "harness/config.hpp"
#include "reduction/eim.hpp"
#include "reduction/greedy.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace romlab {

// One pipeline stage per call. Each stage writes its artifacts under
// <output>/<stage>/ together with
//   manifest.json  config hash, seed, stage key, artifact hashes (no timings)
//   timings.json   wall-clock seconds of the work done in this call
// Upstream stages are reused when their manifest key matches the config and
// recomputed otherwise.
class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const FomModel& model() const { return *model_; }
  std::shared_ptr<FomModel> model_ptr() const { return model_; }
  const TimeGrid& time_grid() const { return tg_; }
  std::string stage_dir(const std::string& stage) const;

  void snapshots();
  void eim();
  void greedy();
  void rom_simulate();
  void train_hybrid();
  void train_nonintrusive();
  void benchmark();

  // Dispatches by CLI stage name ("snapshots", "greedy", ...).
  void run(const std::string& stage);

  // Loaded (or computed) artifacts.
  const std::vector<Matrix>& train_snapshots();
  const std::vector<Matrix>& test_snapshots();
  std::shared_ptr<const EimData> eim_data();
  const GreedyResult& greedy_result();

 private:
  bool up_to_date(const std::string& stage) const;
  std::string stage_key(const std::string& stage) const;
  void finish(const std::string& stage, const std::vector<std::string>& artifacts,
              const nlohmann::json& timings, const nlohmann::json& extra = {}) const;
  void ensure(const std::string& stage);
  Matrix rbm_basis();
  Matrix latent_basis(Index r);

  ExperimentConfig cfg_;
  std::shared_ptr<FomModel> model_;
  TimeGrid tg_;
  std::vector<Matrix> train_, test_;
  bool train_loaded_ = false, test_loaded_ = false;
  std::shared_ptr<const EimData> eim_;
  std::unique_ptr<GreedyResult> greedy_;
};

// Loads a surrogate bundle (hybrid or non-intrusive), predicts at mu on the
// time grid stored with the bundle and writes a trajectory container.
void predict_to_file(const std::string& bundle_dir, const Param& mu, const std::string& out_path);

// Scans `runs_dir` for stage manifests and benchmark error tables and writes
// <runs_dir>/summary.csv. Deterministic for fixed inputs.
std::string merge_reports(const std::string& runs_dir);

// Figure slices: for each time in `times`, rows "t,x,u_fom,u_surrogate".
// 1D: whole line; 2D: grid row y_index of the u_x block. An empty time list
// yields the header only.
void write_figure_csv(const std::string& path, const FomModel& model, const TimeGrid& tg,
                      const Matrix& U_fom, const Matrix& U_sur,
                      const std::vector<double>& times, Index y_index = -1);

}  // namespace romlab
