#pragma once

#include "fom/model.hpp"
#include "reduction/eim.hpp"
#include "reduction/pod.hpp"
#include "roms/grom.hpp"
#include "roms/lspg.hpp"

#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace romlab {

enum class RomKind { kGalerkin, kLspg };
const char* to_string(RomKind kind);
RomKind rom_kind_from_string(const std::string& s);

// ||r(T, mu)||_2 of the lifted ROM trajectory, where r is the backward-Euler
// residual built from the last two lifted states. With max_over_time the
// maximum over all steps is returned instead.
double residual_estimate(const FomModel& model, const Matrix& V, const ReducedTrajectory& traj,
                         const TimeGrid& tg, bool max_over_time = false);

// Simulates the ROM at mu and evaluates the residual estimate. A ROM that
// fails to converge yields +infinity.
double error_estimator(const GRom& rom, const Param& mu, const TimeGrid& tg,
                       const NewtonOptions& opts, bool max_over_time = false);
double error_estimator(const LspgRom& rom, const FomModel& model, const Param& mu,
                       const TimeGrid& tg, const NewtonOptions& opts,
                       bool max_over_time = false);

struct GreedyOptions {
  double tol_rb = 0.05;
  Index r_max = 200;
  Index r_s = 1;          // modes added per iteration; <= 0 selects by tol_svd
  double tol_svd = 0.01;
  RomKind kind = RomKind::kGalerkin;
  NewtonOptions newton;
  bool max_over_time = false;
  int repeat_limit = 10;
  double lspg_oversample = 2.0;
};

struct GreedyIteration {
  Index iteration = 0;
  Index enriched_index = 0;   // training index whose snapshots were added
  Index added = 0;            // r_s
  Index basis_size = 0;       // r~ after enrichment
  std::vector<double> estimates;  // eta over the training set
  Index selected_index = 0;   // argmax of eta
  double eta_max = 0.0;
};

struct GreedyReport {
  std::vector<GreedyIteration> iterations;
  std::string stopping_reason;
};

struct GreedyResult {
  ReducedBasis basis;
  GreedyReport report;
  std::vector<Index> selected_indices;  // distinct training indices that were enriched, in order
};

// POD-greedy over precomputed training trajectories (one n x n_t block per
// training parameter). `hyper` is the EIM used by the estimator ROM; for LSPG
// its rows (in greedy order) feed the collocation set.
GreedyResult pod_greedy(const FomModel& model, const std::vector<Param>& train,
                        const std::vector<Matrix>& snapshots, std::shared_ptr<const EimData> hyper,
                        const TimeGrid& tg, const GreedyOptions& opts);

// "iteration,mu_index,mu_0[,mu_1],eta,r_tilde"
void write_greedy_report_csv(const std::string& path, const GreedyReport& report,
                             const std::vector<Param>& train);

// Model component basis from greedy output or raw snapshots.
ReducedBasis build_model_basis(const GreedyResult& greedy, const std::vector<Param>& train,
                               const std::vector<Matrix>& snapshots, BasisMode mode, Index r);

}  // namespace romlab
