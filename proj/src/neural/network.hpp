#pragma once

#include "neural/layers.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace romlab::nn {

// A shape-checked sequential model with a named architecture.
class Network {
 public:
  Network(std::string arch, Shape input, std::unique_ptr<Sequential> body);

  const std::string& arch() const { return arch_; }
  const Shape& input_shape() const { return in_; }
  const Shape& output_shape() const { return out_; }
  Index input_size() const { return numel(in_); }
  Index output_size() const { return numel(out_); }

  Tensor apply(const Tensor& x) const;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);

  // Column-sample matrices: in_size x N -> out_size x N.
  Matrix predict(const Matrix& X) const;
  Tensor to_input(const Matrix& X) const;

  std::vector<Parameter*> parameters();
  Index parameter_count() const;
  void zero_grad();
  // He-uniform hidden layers, zero output layer.
  void init(std::uint64_t seed);
  Sequential& body() { return *body_; }
  const Sequential& body() const { return *body_; }

 private:
  std::string arch_;
  Shape in_, out_;
  std::unique_ptr<Sequential> body_;
};

struct Cnn1dOptions {
  Index c0 = 32;
  Index l0 = 16;
  std::vector<Index> channels{16, 16, 8, 8, 4, 4};  // one upsampling block each
  Index kernel = 3;
  bool crop = false;  // centered crop instead of linear interpolation
};

struct Cnn2dOptions {
  Index c0 = 16;
  std::vector<Index> channels{16, 8, 4};  // one ConvTranspose2d block each
  Index kernel = 3;
};

// latent r -> 1 x n_out (stem, ResiBlock, 6 x [upsample, ProjResiBlock], conv, resample)
Network build_1dcnnresi(Index r_latent, Index n_out, const Cnn1dOptions& opts = {});
// latent r -> out_channels x H x W with H, W divisible by 2^blocks.
Network build_2dcnnresi(Index r_latent, Index height, Index width, Index out_channels,
                        const Cnn2dOptions& opts = {});
// latent r -> r0 POD coefficients; r0 must be a square with side divisible by 4
// (two ConvTranspose2d blocks).
Network build_pod_head_network(Index r_latent, Index r0,
                               const Cnn2dOptions& opts = Cnn2dOptions{16, {16, 8}, 3});
// (t, mu) -> z: hidden ReLU layers then a linear output layer.
Network build_ffnn(Index in_dim, Index out_dim, const std::vector<Index>& hidden = {128, 128, 128, 128});

void save_network(const std::string& path, Network& net);
Network load_network(const std::string& path);

}  // namespace romlab::nn
