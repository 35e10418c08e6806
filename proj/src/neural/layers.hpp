#pragma once

#include "common/binio.hpp"
#include "common/rng.hpp"
#include "neural/tensor.hpp"

#include <memory>
#include <string>
#include <vector>

namespace romlab::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// A differentiable map on batched tensors. apply() is const and cache-free
// (safe for concurrent inference); forward() caches what backward() needs.
// backward() accumulates into parameter gradients and returns dL/dx.
class Module {
 public:
  virtual ~Module() = default;
  virtual std::string kind() const = 0;
  virtual Shape output_shape(const Shape& in) const = 0;  // per-sample shapes
  virtual Tensor apply(const Tensor& x) const = 0;
  virtual Tensor forward(const Tensor& x) = 0;
  virtual Tensor backward(const Tensor& gy) = 0;
  virtual void collect(std::vector<Parameter*>& out) { (void)out; }
  virtual void init(Rng& rng) { (void)rng; }
  virtual void write(io::BinaryWriter& w) const = 0;  // kind + hyper-parameters
};

using ModulePtr = std::unique_ptr<Module>;

ModulePtr read_module(io::BinaryReader& r);

// y = W x + b on flattened samples; output shape {out}.
class Linear final : public Module {
 public:
  Linear(Index in, Index out);
  std::string kind() const override { return "linear"; }
  Shape output_shape(const Shape& in) const override;
  Tensor apply(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void collect(std::vector<Parameter*>& out) override;
  void init(Rng& rng) override;
  void write(io::BinaryWriter& w) const override;
  Parameter& weight() { return W_; }
  Parameter& bias() { return b_; }

 private:
  Index in_, out_;
  Parameter W_, b_;  // out x in, out
  Tensor x_;
};

class Relu final : public Module {
 public:
  std::string kind() const override { return "relu"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor apply(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void write(io::BinaryWriter& w) const override;

 private:
  Tensor y_;
};

class Reshape final : public Module {
 public:
  explicit Reshape(Shape target) : target_(std::move(target)) {}
  std::string kind() const override { return "reshape"; }
  Shape output_shape(const Shape& in) const override;
  Tensor apply(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void write(io::BinaryWriter& w) const override;

 private:
  Shape target_;
  Shape in_;
};

// Same-padded stride-1 convolution over 1 (N x C x L) or 2 (N x C x H x W)
// spatial axes; cross-correlation plus bias.
class Conv final : public Module {
 public:
  Conv(int spatial_dims, Index cin, Index cout, Index k);
  std::string kind() const override { return spatial_dims_ == 1 ? "conv1d" : "conv2d"; }
  Shape output_shape(const Shape& in) const override;
  Tensor apply(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void collect(std::vector<Parameter*>& out) override;
  void init(Rng& rng) override;
  void write(io::BinaryWriter& w) const override;
  Parameter& weight() { return W_; }
  Parameter& bias() { return b_; }
  Index in_channels() const { return cin_; }
  Index out_channels() const { return cout_; }

 private:
  int spatial_dims_;
  Index cin_, cout_, k_;
  Parameter W_, b_;  // cout x cin x k [x k], cout
  Tensor x_;
};

// Transposed 2D convolution, weights cin x cout x k x k. Output side is
// (H - 1) * stride - 2 * pad + k; k=4, stride=2, pad=1 doubles each axis.
class ConvTranspose2d final : public Module {
 public:
  ConvTranspose2d(Index cin, Index cout, Index k = 4, Index stride = 2, Index pad = 1);
  std::string kind() const override { return "conv_transpose2d"; }
  Shape output_shape(const Shape& in) const override;
  Tensor apply(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void collect(std::vector<Parameter*>& out) override;
  void init(Rng& rng) override;
  void write(io::BinaryWriter& w) const override;
  Parameter& weight() { return W_; }
  Parameter& bias() { return b_; }

 private:
  Index cin_, cout_, k_, stride_, pad_;
  Parameter W_, b_;
  Tensor x_;
};

// Nearest-neighbour upsampling of every spatial axis by an integer factor.
class UpsampleNearest final : public Module {
 public:
  explicit UpsampleNearest(Index factor = 2) : factor_(factor) {}
  std::string kind() const override { return "upsample_nearest"; }
  Shape output_shape(const Shape& in) const override;
  Tensor apply(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void write(io::BinaryWriter& w) const override;

 private:
  Index factor_;
  Shape in_;
};

// Length adaptation of the last axis: linear interpolation (end points
// aligned) or a centered crop.
class Resample1d final : public Module {
 public:
  Resample1d(Index n_out, bool crop = false) : n_out_(n_out), crop_(crop) {}
  std::string kind() const override { return "resample1d"; }
  Shape output_shape(const Shape& in) const override;
  Tensor apply(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void write(io::BinaryWriter& w) const override;

 private:
  Index n_out_;
  bool crop_;
  Shape in_;
};

class Sequential final : public Module {
 public:
  Sequential() = default;
  explicit Sequential(std::vector<ModulePtr> layers) : layers_(std::move(layers)) {}
  void add(ModulePtr m) { layers_.push_back(std::move(m)); }
  std::string kind() const override { return "sequential"; }
  Shape output_shape(const Shape& in) const override;
  Tensor apply(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void collect(std::vector<Parameter*>& out) override;
  void init(Rng& rng) override;
  void write(io::BinaryWriter& w) const override;
  std::size_t size() const { return layers_.size(); }
  Module& at(std::size_t i) { return *layers_.at(i); }

 private:
  std::vector<ModulePtr> layers_;
};

// ReLU(skip(x) + main(x)); skip is the identity when absent (ResiBlock),
// otherwise a projection convolution (ProjResiBlock).
class ResidualBlock final : public Module {
 public:
  ResidualBlock(ModulePtr main, ModulePtr skip, std::string kind);
  std::string kind() const override { return kind_; }
  Shape output_shape(const Shape& in) const override;
  Tensor apply(const Tensor& x) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& gy) override;
  void collect(std::vector<Parameter*>& out) override;
  void init(Rng& rng) override;
  void write(io::BinaryWriter& w) const override;
  Module& main() { return *main_; }
  Module* skip() { return skip_.get(); }

 private:
  ModulePtr main_, skip_;
  std::string kind_;
  Tensor y_;
};

// conv -> relu -> conv with the same channel count, k odd.
ModulePtr make_resiblock(int spatial_dims, Index channels, Index k = 3);
// ReLU(conv_k1(x) + conv(ReLU(conv(x)))) changing cin -> cout.
ModulePtr make_projresiblock(int spatial_dims, Index cin, Index cout, Index k = 3, Index k_proj = 1);

}  // namespace romlab::nn
