#pragma once

#include "fom/model.hpp"
#include "neural/network.hpp"
#include "neural/normalize.hpp"
#include "neural/train.hpp"
#include "roms/grom.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace romlab {

// Contiguous block of state rows an error net corrects (2D: u_x only is the
// first half of the state).
struct RowBlock {
  Index begin = 0;
  Index count = -1;  // -1: to the end of the state
  Index resolve(Index n) const { return count < 0 ? n - begin : count; }
};

struct ErrorDataset {
  Matrix inputs;   // r x N latent states
  Matrix targets;  // m x N errors (rows of the block)
  std::vector<std::pair<Index, Index>> index;  // column -> (time index, parameter index)
};

// Simulates the G-ROM at every training parameter and pairs z(t_i, mu_j) with
// e = u - V z on the row block. With projection_latents, z = V^T u instead.
ErrorDataset build_hybrid_dataset(const GRom& grom, const std::vector<Param>& train,
                                  const std::vector<Matrix>& snapshots, const TimeGrid& tg,
                                  const RowBlock& rows = {}, bool projection_latents = false);

enum class ErrorNetKind { kCnn1d, kCnn2d, kPodCnn2d };
const char* to_string(ErrorNetKind k);
ErrorNetKind error_net_kind_from_string(const std::string& s);

struct ErrorNetSpec {
  ErrorNetKind kind = ErrorNetKind::kCnn1d;
  Index r0 = 1024;            // POD head only
  Index height = 0, width = 0;  // 2D grid of the row block (kCnn2d)
  Index channels = 1;         // kCnn2d output channels
  nn::Cnn1dOptions cnn1d;
  nn::Cnn2dOptions cnn2d;
  nn::Cnn2dOptions pod_head = nn::Cnn2dOptions{16, {16, 8}, 3};
};

std::unique_ptr<nn::Network> build_error_net(const ErrorNetSpec& spec, Index r, Index m);

struct HybridSurrogate {
  std::shared_ptr<const FomModel> model;
  std::shared_ptr<const EimData> eim;
  std::unique_ptr<GRom> grom;
  std::unique_ptr<nn::Network> net;
  ErrorNetSpec spec;
  nn::Scaler input_scaler;   // standardized latents
  nn::Scaler target_scaler;  // global max-abs
  Matrix V0;                 // empty unless the POD head is used
  RowBlock rows;

  const Matrix& V() const { return grom->basis(); }
};

struct HybridPrediction {
  Matrix U;          // full state, n x n_t
  Matrix Z;          // r x n_t
  double rom_time = 0.0;
  double net_time = 0.0;
  double total_time = 0.0;
};

// Trains the error net on the dataset and assembles the surrogate.
HybridSurrogate train_hybrid(std::shared_ptr<const FomModel> model, const Matrix& V,
                             std::shared_ptr<const EimData> eim, const ErrorDataset& data,
                             const ErrorNetSpec& spec, const nn::TrainConfig& cfg,
                             const RowBlock& rows = {}, nn::LossHistory* history = nullptr);

// e~ for a batch of latent columns (rows of the block only).
Matrix hybrid_error(const HybridSurrogate& s, const Matrix& Z);

// u~ = V z + e~(z) with z from the G-ROM.
HybridPrediction hybrid_predict(const HybridSurrogate& s, const Param& mu, const TimeGrid& tg,
                                const NewtonOptions& opts = {});

}  // namespace romlab
