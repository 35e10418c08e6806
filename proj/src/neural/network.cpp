#include "neural/network.hpp"

#include <cmath>

namespace romlab::nn {

Network::Network(std::string arch, Shape input, std::unique_ptr<Sequential> body)
    : arch_(std::move(arch)), in_(std::move(input)), body_(std::move(body)) {
  require(body_ != nullptr, "Network: missing body");
  out_ = body_->output_shape(in_);
}

Tensor Network::to_input(const Matrix& X) const {
  require_dims(X.rows() == input_size(), "Network " + arch_ + ": input has " +
                                             std::to_string(X.rows()) + " rows, expected " +
                                             std::to_string(input_size()));
  Tensor t(prepend(X.cols(), in_));
  std::copy(X.data(), X.data() + X.size(), t.ptr());
  return t;
}

Tensor Network::apply(const Tensor& x) const { return body_->apply(x); }
Tensor Network::forward(const Tensor& x) { return body_->forward(x); }
Tensor Network::backward(const Tensor& gy) { return body_->backward(gy); }

Matrix Network::predict(const Matrix& X) const {
  const Tensor y = apply(to_input(X));
  Matrix out(output_size(), X.cols());
  std::copy(y.ptr(), y.ptr() + y.size(), out.data());
  return out;
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> p;
  body_->collect(p);
  return p;
}

Index Network::parameter_count() const {
  std::vector<Parameter*> p;
  const_cast<Sequential&>(*body_).collect(p);
  Index n = 0;
  for (const auto* q : p) n += q->value.size();
  return n;
}

void Network::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(0.0);
}

void Network::init(std::uint64_t seed) {
  Rng rng(seed);
  body_->init(rng);
  // Output layer (weight and bias, the last two parameters) starts at zero:
  // targets scaled by a global max-abs are small, and O(1) initial outputs
  // drive the hidden ReLUs dead in the first few steps.
  auto ps = parameters();
  for (std::size_t k = ps.size() >= 2 ? ps.size() - 2 : 0; k < ps.size(); ++k) ps[k]->value.fill(0.0);
  zero_grad();
}

Network build_1dcnnresi(Index r_latent, Index n_out, const Cnn1dOptions& opts) {
  require(r_latent >= 1, "build_1dcnnresi: r_latent must be >= 1");
  require(opts.c0 >= 1 && opts.l0 >= 1, "build_1dcnnresi: stem shape must be positive");
  const Index decoded = opts.l0 << opts.channels.size();
  require(n_out >= 1 && n_out <= decoded,
          "build_1dcnnresi: n_out = " + std::to_string(n_out) + " exceeds decoded length " +
              std::to_string(decoded));
  auto body = std::make_unique<Sequential>();
  body->add(std::make_unique<Linear>(r_latent, opts.c0 * opts.l0));
  body->add(std::make_unique<Reshape>(Shape{opts.c0, opts.l0}));
  body->add(make_resiblock(1, opts.c0, opts.kernel));
  Index c = opts.c0;
  for (Index co : opts.channels) {
    body->add(std::make_unique<UpsampleNearest>(2));
    body->add(make_projresiblock(1, c, co, opts.kernel));
    c = co;
  }
  body->add(std::make_unique<Conv>(1, c, 1, opts.kernel));
  if (n_out != decoded || opts.crop) body->add(std::make_unique<Resample1d>(n_out, opts.crop));
  return Network("1dcnnresi", {r_latent}, std::move(body));
}

namespace {

std::unique_ptr<Sequential> cnn2d_body(Index r_latent, Index side0_h, Index side0_w,
                                       Index out_channels, const Cnn2dOptions& opts) {
  auto body = std::make_unique<Sequential>();
  body->add(std::make_unique<Linear>(r_latent, opts.c0 * side0_h * side0_w));
  body->add(std::make_unique<Reshape>(Shape{opts.c0, side0_h, side0_w}));
  body->add(make_resiblock(2, opts.c0, opts.kernel));
  body->add(make_resiblock(2, opts.c0, opts.kernel));
  Index c = opts.c0;
  for (Index co : opts.channels) {
    body->add(std::make_unique<ConvTranspose2d>(c, co, 4, 2, 1));
    body->add(make_resiblock(2, co, opts.kernel));
    body->add(make_resiblock(2, co, opts.kernel));
    c = co;
  }
  body->add(std::make_unique<Conv>(2, c, out_channels, opts.kernel));
  return body;
}

}  // namespace

Network build_2dcnnresi(Index r_latent, Index height, Index width, Index out_channels,
                        const Cnn2dOptions& opts) {
  require(r_latent >= 1, "build_2dcnnresi: r_latent must be >= 1");
  require(out_channels == 1 || out_channels == 2, "build_2dcnnresi: out_channels must be 1 or 2");
  const Index f = Index(1) << opts.channels.size();
  require(height >= f && width >= f && height % f == 0 && width % f == 0,
          "build_2dcnnresi: output " + std::to_string(height) + "x" + std::to_string(width) +
              " is not divisible by " + std::to_string(f));
  return Network("2dcnnresi", {r_latent},
                 cnn2d_body(r_latent, height / f, width / f, out_channels, opts));
}

Network build_pod_head_network(Index r_latent, Index r0, const Cnn2dOptions& opts) {
  require(r_latent >= 1, "build_pod_head_network: r_latent must be >= 1");
  require(r_latent <= r0, "build_pod_head_network: r must not exceed r0");
  const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(r0))));
  require(side * side == r0 && side % 4 == 0,
          "build_pod_head_network: r0 = " + std::to_string(r0) +
              " is not a square with side divisible by 4");
  require(opts.channels.size() == 2, "build_pod_head_network: expects two upsampling blocks");
  auto body = cnn2d_body(r_latent, side / 4, side / 4, 1, opts);
  body->add(std::make_unique<Reshape>(Shape{r0}));
  return Network("pod_head", {r_latent}, std::move(body));
}

Network build_ffnn(Index in_dim, Index out_dim, const std::vector<Index>& hidden) {
  require(in_dim >= 1 && out_dim >= 1, "build_ffnn: sizes must be positive");
  auto body = std::make_unique<Sequential>();
  Index c = in_dim;
  for (Index h : hidden) {
    require(h >= 1, "build_ffnn: hidden widths must be positive");
    body->add(std::make_unique<Linear>(c, h));
    body->add(std::make_unique<Relu>());
    c = h;
  }
  body->add(std::make_unique<Linear>(c, out_dim));
  return Network("ffnn", {in_dim}, std::move(body));
}

void save_network(const std::string& path, Network& net) {
  io::BinaryWriter w(path, "ROMNN01");
  w.str(net.arch());
  w.u64(net.input_shape().size());
  for (Index d : net.input_shape()) w.u64(static_cast<std::uint64_t>(d));
  net.body().write(w);
  const auto params = net.parameters();
  w.u64(params.size());
  for (const auto* p : params) {
    w.str(p->name);
    w.u64(p->value.shape.size());
    for (Index d : p->value.shape) w.u64(static_cast<std::uint64_t>(d));
    w.f64s(p->value.ptr(), static_cast<std::size_t>(p->value.size()));
  }
  w.close();
}

Network load_network(const std::string& path) {
  io::BinaryReader r(path, "ROMNN01");
  std::string arch = r.str();
  const auto nin = r.u64();
  if (nin > 8) throw IoError(path + ": corrupt input shape");
  Shape in(nin);
  for (auto& d : in) d = static_cast<Index>(r.u64());
  ModulePtr body = read_module(r);
  auto* seq = dynamic_cast<Sequential*>(body.get());
  if (seq == nullptr) throw IoError(path + ": network body is not sequential");
  body.release();
  Network net(std::move(arch), std::move(in), std::unique_ptr<Sequential>(seq));
  auto params = net.parameters();
  if (r.u64() != params.size()) throw IoError(path + ": parameter count does not match layers");
  for (auto* p : params) {
    const std::string name = r.str();
    const auto rank = r.u64();
    if (rank > 8) throw IoError(path + ": corrupt parameter shape");
    Shape s(rank);
    for (auto& d : s) d = static_cast<Index>(r.u64());
    if (name != p->name || s != p->value.shape) {
      throw IoError(path + ": parameter '" + name + "' " + shape_str(s) + " does not match layer '" +
                    p->name + "' " + shape_str(p->value.shape));
    }
    r.f64s(p->value.ptr(), static_cast<std::size_t>(p->value.size()));
  }
  net.zero_grad();
  return net;
}

}  // namespace romlab::nn
