#pragma once

#include "neural/network.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace romlab::nn {

// Mean squared error over all entries; optional gradient w.r.t. a.
double mse(const Tensor& a, const Tensor& b, Tensor* grad_a = nullptr);

struct CompositeLoss {
  double loss1 = 0.0;
  double loss2 = 0.0;
  double total = 0.0;
};

// alpha1 * MSE(z_pred, z) + alpha2 * MSE(e_pred, e), with gradients w.r.t. the
// predictions when requested.
CompositeLoss composite_loss(const Tensor& z_pred, const Tensor& z, const Tensor& e_pred,
                             const Tensor& e, double alpha1, double alpha2,
                             Tensor* grad_z = nullptr, Tensor* grad_e = nullptr);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig cfg);
  // Throws NumericError (parameters untouched) on a non-finite gradient.
  void step();
  long steps() const { return t_; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

struct TrainConfig {
  int epochs = 1000;
  Index batch_size = 32;
  AdamConfig adam;
  std::uint64_t seed = 0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double validation_fraction = 0.1;
  bool teacher_forcing = false;   // joint training: decoder sees true latents
  double divergence_factor = 1e6; // abort when epoch loss exceeds this x the first
  std::function<void(int epoch, double loss)> on_epoch;

  void validate() const;
};

struct LossHistory {
  std::vector<double> loss1, loss2, total, validation;
};

// Supervised regression, inputs/targets as column samples (already scaled).
// Records the MSE in loss1/total.
LossHistory train_regression(Network& net, const Matrix& X, const Matrix& Y, const TrainConfig& cfg);

// Joint FFNN + decoder training: z~ = ffnn(x), e~ = decoder(z~ or z).
LossHistory train_joint(Network& ffnn, Network& decoder, const Matrix& X, const Matrix& Z,
                        const Matrix& E, const TrainConfig& cfg);

// "epoch,loss1,loss2,total,validation"
void write_loss_csv(const std::string& path, const LossHistory& h);

}  // namespace romlab::nn
