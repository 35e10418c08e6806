#pragma once

#include "fom/grid.hpp"
#include "neural/network.hpp"
#include "neural/normalize.hpp"
#include "neural/train.hpp"
#include "surrogates/hybrid.hpp"

#include <memory>
#include <vector>

namespace romlab {

struct NonIntrusiveDatasets {
  Matrix inputs;   // (1 + p) x N raw (t, mu)
  Matrix Z;        // r x N, V^T X
  Matrix E;        // n x N (X - V Z) or r0 x N (V0^T X_e)
  Matrix V;        // n x r
  Matrix V0;       // n x r0, empty without POD compression
  Vector sigma;    // singular values of X
  Vector sigma_e;  // singular values of X_e (POD compression only)
  RowBlock rows;
};

// X is assembled from the row block of all training trajectories; r0 <= 0
// skips the error POD.
NonIntrusiveDatasets build_nonintrusive_datasets(const std::vector<Param>& train,
                                                 const std::vector<Matrix>& snapshots,
                                                 const TimeGrid& tg, Index r, Index r0 = 0,
                                                 const RowBlock& rows = {});

struct NonIntrusiveSurrogate {
  Matrix V, V0;
  std::unique_ptr<nn::Network> ffnn, decoder;
  ErrorNetSpec decoder_spec;
  std::vector<Index> hidden;
  nn::Scaler input_scaler;   // min-max over (t, mu)
  nn::Scaler latent_scaler;  // standardized z
  nn::Scaler error_scaler;   // global max-abs
  RowBlock rows;
  Index param_dim = 0;
  Matrix input_lo, input_hi;  // training box for extrapolation warnings
};

NonIntrusiveSurrogate train_nonintrusive(const NonIntrusiveDatasets& data, const ErrorNetSpec& decoder,
                                         const nn::TrainConfig& cfg,
                                         const std::vector<Index>& hidden = {128, 128, 128, 128},
                                         nn::LossHistory* history = nullptr);

struct NonIntrusivePrediction {
  Matrix U;  // rows of the block, n_t columns
  Matrix Z;  // predicted latents (physical scale)
  double total_time = 0.0;
  bool extrapolated = false;
};

// u~ = V z~ + e~(z~) at every t_i of the grid.
NonIntrusivePrediction nonintrusive_predict(const NonIntrusiveSurrogate& s, const Param& mu,
                                            const TimeGrid& tg);

}  // namespace romlab
