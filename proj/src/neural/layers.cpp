#include "neural/layers.hpp"

#include <algorithm>
#include <cmath>

namespace romlab::nn {

namespace {

// Patch geometry of a strided, padded 2D correlation from a C x H x W image
// onto Ho x Wo output positions.
struct Geometry {
  Index C, H, W, kh, kw, stride, ph, pw, Ho, Wo;
  Index K() const { return C * kh * kw; }
  Index P() const { return Ho * Wo; }
};

// cols (row-major K x nb*P) <- patches of nb consecutive images.
void im2col(const double* x, Index nb, const Geometry& g, double* cols) {
  const Index P = g.P(), NP = nb * P, HW = g.H * g.W;
  for (Index c = 0; c < g.C; ++c) {
    for (Index ki = 0; ki < g.kh; ++ki) {
      for (Index kj = 0; kj < g.kw; ++kj) {
        double* dst = cols + ((c * g.kh + ki) * g.kw + kj) * NP;
        for (Index n = 0; n < nb; ++n) {
          const double* src = x + (n * g.C + c) * HW;
          double* d = dst + n * P;
          for (Index oh = 0; oh < g.Ho; ++oh) {
            const Index ih = oh * g.stride - g.ph + ki;
            double* drow = d + oh * g.Wo;
            if (ih < 0 || ih >= g.H) {
              std::fill(drow, drow + g.Wo, 0.0);
              continue;
            }
            const double* srow = src + ih * g.W;
            for (Index ow = 0; ow < g.Wo; ++ow) {
              const Index iw = ow * g.stride - g.pw + kj;
              drow[ow] = (iw >= 0 && iw < g.W) ? srow[iw] : 0.0;
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates cols into the nb images.
void col2im(const double* cols, Index nb, const Geometry& g, double* x) {
  const Index P = g.P(), NP = nb * P, HW = g.H * g.W;
  for (Index c = 0; c < g.C; ++c) {
    for (Index ki = 0; ki < g.kh; ++ki) {
      for (Index kj = 0; kj < g.kw; ++kj) {
        const double* src = cols + ((c * g.kh + ki) * g.kw + kj) * NP;
        for (Index n = 0; n < nb; ++n) {
          double* dst = x + (n * g.C + c) * HW;
          const double* s = src + n * P;
          for (Index oh = 0; oh < g.Ho; ++oh) {
            const Index ih = oh * g.stride - g.ph + ki;
            if (ih < 0 || ih >= g.H) continue;
            double* drow = dst + ih * g.W;
            const double* srow = s + oh * g.Wo;
            for (Index ow = 0; ow < g.Wo; ++ow) {
              const Index iw = ow * g.stride - g.pw + kj;
              if (iw >= 0 && iw < g.W) drow[iw] += srow[ow];
            }
          }
        }
      }
    }
  }
}

// Samples per chunk so that a K x nb*P column buffer stays around 64 MB.
Index chunk_size(Index n, Index K, Index P) {
  constexpr Index kBudget = Index(1) << 23;
  return std::max<Index>(1, std::min<Index>(n, kBudget / std::max<Index>(1, K * P)));
}

// M(c, n*P + p) <- t[(n0 + n), c, p]
void gather_channels(const double* t, Index n0, Index nb, Index C, Index P, double* M) {
  const Index NP = nb * P;
  for (Index n = 0; n < nb; ++n) {
    for (Index c = 0; c < C; ++c) {
      const double* src = t + ((n0 + n) * C + c) * P;
      std::copy(src, src + P, M + c * NP + n * P);
    }
  }
}

void scatter_channels(const double* M, Index n0, Index nb, Index C, Index P, double* t) {
  const Index NP = nb * P;
  for (Index n = 0; n < nb; ++n) {
    for (Index c = 0; c < C; ++c) {
      const double* src = M + c * NP + n * P;
      std::copy(src, src + P, t + ((n0 + n) * C + c) * P);
    }
  }
}

void he_uniform(Tensor& w, double fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  for (double& v : w.data) v = rng.uniform(-bound, bound);
}

Parameter make_param(std::string name, Shape shape) {
  Parameter p;
  p.name = std::move(name);
  p.value = Tensor(shape);
  p.grad = Tensor(std::move(shape));
  return p;
}

void require_batch(const Tensor& x, const char* who) {
  require_dims(x.rank() >= 1 && x.batch() >= 1, std::string(who) + ": empty batch");
}

void write_shape(io::BinaryWriter& w, const Shape& s) {
  w.u64(s.size());
  for (Index d : s) w.u64(static_cast<std::uint64_t>(d));
}

Shape read_shape(io::BinaryReader& r) {
  const auto n = r.u64();
  if (n > 8) throw IoError("corrupt shape in network file");
  Shape s(n);
  for (auto& d : s) d = static_cast<Index>(r.u64());
  return s;
}

}  // namespace

// ---------------------------------------------------------------- Linear

Linear::Linear(Index in, Index out) : in_(in), out_(out) {
  require(in >= 1 && out >= 1, "Linear: sizes must be positive");
  W_ = make_param("linear.weight", {out, in});
  b_ = make_param("linear.bias", {out});
}

Shape Linear::output_shape(const Shape& in) const {
  require_dims(numel(in) == in_, "Linear: input " + shape_str(in) + " does not flatten to " +
                                     std::to_string(in_));
  return {out_};
}

Tensor Linear::apply(const Tensor& x) const {
  require_batch(x, "Linear");
  require_dims(x.sample_size() == in_, "Linear: input " + shape_str(x.shape) +
                                           " does not flatten to " + std::to_string(in_));
  Tensor y({x.batch(), out_});
  ConstRowMap W(W_.value.ptr(), out_, in_);
  const Eigen::Map<const Eigen::RowVectorXd> b(b_.value.ptr(), out_);
  y.rows().noalias() = x.rows() * W.transpose();
  y.rows().rowwise() += b;
  return y;
}

Tensor Linear::forward(const Tensor& x) {
  x_ = x;
  return apply(x);
}

Tensor Linear::backward(const Tensor& gy) {
  require_dims(gy.batch() == x_.batch() && gy.sample_size() == out_, "Linear: bad gradient shape");
  RowMap gW(W_.grad.ptr(), out_, in_);
  Eigen::Map<Eigen::RowVectorXd> gb(b_.grad.ptr(), out_);
  gW.noalias() += gy.rows().transpose() * x_.rows();
  gb += gy.rows().colwise().sum();
  Tensor gx(x_.shape);
  gx.rows().noalias() = gy.rows() * ConstRowMap(W_.value.ptr(), out_, in_);
  return gx;
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&W_);
  out.push_back(&b_);
}

void Linear::init(Rng& rng) {
  he_uniform(W_.value, static_cast<double>(in_), rng);
  b_.value.fill(0.0);
}

void Linear::write(io::BinaryWriter& w) const {
  w.str(kind());
  w.u64(static_cast<std::uint64_t>(in_));
  w.u64(static_cast<std::uint64_t>(out_));
}

// ---------------------------------------------------------------- Relu

Tensor Relu::apply(const Tensor& x) const {
  Tensor y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor Relu::forward(const Tensor& x) {
  y_ = apply(x);
  return y_;
}

Tensor Relu::backward(const Tensor& gy) {
  require_dims(gy.size() == y_.size(), "Relu: bad gradient shape");
  Tensor gx = gy;
  for (Index i = 0; i < gx.size(); ++i) {
    if (!(y_.data[static_cast<std::size_t>(i)] > 0.0)) gx.data[static_cast<std::size_t>(i)] = 0.0;
  }
  return gx;
}

void Relu::write(io::BinaryWriter& w) const { w.str(kind()); }

// ---------------------------------------------------------------- Reshape

Shape Reshape::output_shape(const Shape& in) const {
  require_dims(numel(in) == numel(target_),
               "Reshape: " + shape_str(in) + " cannot be viewed as " + shape_str(target_));
  return target_;
}

Tensor Reshape::apply(const Tensor& x) const {
  require_batch(x, "Reshape");
  Tensor y = x;
  y.reshape(prepend(x.batch(), output_shape(x.sample_shape())));
  return y;
}

Tensor Reshape::forward(const Tensor& x) {
  in_ = x.shape;
  return apply(x);
}

Tensor Reshape::backward(const Tensor& gy) {
  Tensor gx = gy;
  gx.reshape(in_);
  return gx;
}

void Reshape::write(io::BinaryWriter& w) const {
  w.str(kind());
  write_shape(w, target_);
}

// ---------------------------------------------------------------- Conv

Conv::Conv(int spatial_dims, Index cin, Index cout, Index k)
    : spatial_dims_(spatial_dims), cin_(cin), cout_(cout), k_(k) {
  require(spatial_dims == 1 || spatial_dims == 2, "Conv: 1 or 2 spatial axes");
  require(cin >= 1 && cout >= 1, "Conv: channel counts must be positive");
  require(k >= 1 && k % 2 == 1, "Conv: kernel size must be odd for same padding");
  const std::string base = spatial_dims == 1 ? "conv1d" : "conv2d";
  Shape ws{cout, cin, k};
  if (spatial_dims == 2) ws.push_back(k);
  W_ = make_param(base + ".weight", ws);
  b_ = make_param(base + ".bias", {cout});
}

Shape Conv::output_shape(const Shape& in) const {
  require_dims(static_cast<int>(in.size()) == spatial_dims_ + 1,
               kind() + ": expected " + std::to_string(spatial_dims_ + 1) +
                   "-axis sample, got " + shape_str(in));
  require_dims(in[0] == cin_, kind() + ": expected " + std::to_string(cin_) + " channels, got " +
                                  std::to_string(in[0]));
  Shape out = in;
  out[0] = cout_;
  return out;
}

namespace {

Geometry conv_geometry(int dims, Index C, const Shape& sample, Index k) {
  const Index H = dims == 1 ? 1 : sample[1];
  const Index W = dims == 1 ? sample[1] : sample[2];
  const Index kh = dims == 1 ? 1 : k;
  return Geometry{C, H, W, kh, k, 1, (kh - 1) / 2, (k - 1) / 2, H, W};
}

// Direct same-padded 1D correlation on a zero-padded copy of each sample. The
// 8-wide register blocks over positions beat im2col + GEMM for the narrow
// channel counts used by the decoders.
constexpr Index kBlock = 8;
using Lane = Eigen::Array<double, kBlock, 1>;
using LaneMap = Eigen::Map<const Lane, Eigen::Unaligned>;

void pad_rows(const double* src, Index rows, Index L, Index pad, Buffer& dst) {
  const Index Lp = L + 2 * pad + 4 * kBlock;
  dst.assign(static_cast<std::size_t>(rows * Lp), 0.0);
  for (Index r = 0; r < rows; ++r) std::copy(src + r * L, src + (r + 1) * L, dst.data() + r * Lp + pad);
}

// out[o][l] (+)= sum_i sum_j w(o, i, j) * in_p[i][l + j], in_p padded rows of
// stride L + 2 pad + 4 kBlock; w(o, i, j) = W[(o * wi + i) * k + j] or, with
// flip, W[(i * wi + o) * k + (k - 1 - j)].
void correlate(const double* in_p, Index rows_in, Index L, Index k, const double* W, bool flip,
               Index rows_out, const double* bias, double* out) {
  const Index pad = (k - 1) / 2;
  const Index Lp = L + 2 * pad + 4 * kBlock;
  Buffer wbuf(static_cast<std::size_t>(rows_in * k));
  for (Index o = 0; o < rows_out; ++o) {
    for (Index i = 0; i < rows_in; ++i) {
      for (Index j = 0; j < k; ++j) {
        wbuf[static_cast<std::size_t>(i * k + j)] =
            flip ? W[(i * rows_out + o) * k + (k - 1 - j)] : W[(o * rows_in + i) * k + j];
      }
    }
    double* yr = out + o * L;
    const double b0 = bias ? bias[o] : 0.0;
    // Four independent accumulators hide the FMA latency.
    for (Index l0 = 0; l0 < L; l0 += 4 * kBlock) {
      Lane a0 = Lane::Constant(b0), a1 = a0, a2 = a0, a3 = a0;
      for (Index i = 0; i < rows_in; ++i) {
        const double* xr = in_p + i * Lp + l0;
        const double* wr = wbuf.data() + i * k;
        for (Index j = 0; j < k; ++j) {
          const double w = wr[j];
          a0 += w * LaneMap(xr + j);
          a1 += w * LaneMap(xr + j + kBlock);
          a2 += w * LaneMap(xr + j + 2 * kBlock);
          a3 += w * LaneMap(xr + j + 3 * kBlock);
        }
      }
      const Lane* acc[4] = {&a0, &a1, &a2, &a3};
      for (int q = 0; q < 4; ++q) {
        const Index s0 = l0 + q * kBlock;
        if (s0 + kBlock <= L) {
          Eigen::Map<Lane, Eigen::Unaligned>(yr + s0) = *acc[q];
        } else {
          for (Index t = 0; s0 + t < L; ++t) yr[s0 + t] = (*acc[q])[t];
        }
      }
    }
  }
}

void conv1d_direct(const double* x, const double* W, const double* b, Index N, Index cin,
                   Index cout, Index k, Index L, double* y) {
  Buffer xp;
  for (Index n = 0; n < N; ++n) {
    pad_rows(x + n * cin * L, cin, L, (k - 1) / 2, xp);
    correlate(xp.data(), cin, L, k, W, false, cout, b, y + n * cout * L);
  }
}

void conv1d_direct_backward(const double* x, const double* W, const double* gy, Index N, Index cin,
                            Index cout, Index k, Index L, double* gx, double* gW, double* gb) {
  const Index pad = (k - 1) / 2;
  const Index Lp = L + 2 * pad + 4 * kBlock;
  Buffer xp, gp;
  for (Index n = 0; n < N; ++n) {
    const double* g = gy + n * cout * L;
    pad_rows(g, cout, L, pad, gp);
    correlate(gp.data(), cout, L, k, W, true, cin, nullptr, gx + n * cin * L);
    pad_rows(x + n * cin * L, cin, L, pad, xp);
    for (Index co = 0; co < cout; ++co) {
      const double* gr = g + co * L;
      double sb = 0.0;
      for (Index l = 0; l < L; ++l) sb += gr[l];
      gb[co] += sb;
      for (Index ci = 0; ci < cin; ++ci) {
        const double* xr = xp.data() + ci * Lp;
        double* gwr = gW + (co * cin + ci) * k;
        for (Index j = 0; j < k; ++j) {
          Lane acc = Lane::Zero();
          Index l = 0;
          for (; l + kBlock <= L; l += kBlock) acc += LaneMap(gr + l) * LaneMap(xr + l + j);
          double sum = acc.sum();
          for (; l < L; ++l) sum += gr[l] * xr[l + j];
          gwr[j] += sum;
        }
      }
    }
  }
}

}  // namespace

Tensor Conv::apply(const Tensor& x) const {
  require_batch(x, "Conv");
  if (spatial_dims_ == 1) {
    const Shape out_s = output_shape(x.sample_shape());
    Tensor y(prepend(x.batch(), out_s));
    conv1d_direct(x.ptr(), W_.value.ptr(), b_.value.ptr(), x.batch(), cin_, cout_, k_, x.shape[2],
                  y.ptr());
    return y;
  }
  const Shape out_s = output_shape(x.sample_shape());
  const Geometry g = conv_geometry(spatial_dims_, cin_, x.sample_shape(), k_);
  const Index N = x.batch(), K = g.K(), P = g.P();
  Tensor y(prepend(N, out_s));
  ConstRowMap W(W_.value.ptr(), cout_, K);
  const Eigen::Map<const Eigen::VectorXd> b(b_.value.ptr(), cout_);
  const Index nb_max = chunk_size(N, K, P);
  Buffer cols(static_cast<std::size_t>(K * nb_max * P));
  RowMatrix Y;
  for (Index n0 = 0; n0 < N; n0 += nb_max) {
    const Index nb = std::min(nb_max, N - n0);
    im2col(x.ptr() + n0 * cin_ * g.H * g.W, nb, g, cols.data());
    Y.noalias() = W * ConstRowMap(cols.data(), K, nb * P);
    Y.colwise() += b;
    scatter_channels(Y.data(), n0, nb, cout_, P, y.ptr());
  }
  return y;
}

Tensor Conv::forward(const Tensor& x) {
  x_ = x;
  return apply(x);
}

Tensor Conv::backward(const Tensor& gy) {
  if (spatial_dims_ == 1) {
    const Index L = x_.shape[2];
    require_dims(gy.batch() == x_.batch() && gy.sample_size() == cout_ * L,
                 kind() + ": bad gradient shape");
    Tensor gx(x_.shape);
    conv1d_direct_backward(x_.ptr(), W_.value.ptr(), gy.ptr(), x_.batch(), cin_, cout_, k_, L,
                           gx.ptr(), W_.grad.ptr(), b_.grad.ptr());
    return gx;
  }
  const Geometry g = conv_geometry(spatial_dims_, cin_, x_.sample_shape(), k_);
  const Index N = x_.batch(), K = g.K(), P = g.P();
  require_dims(gy.batch() == N && gy.sample_size() == cout_ * P, kind() + ": bad gradient shape");
  Tensor gx(x_.shape);
  ConstRowMap W(W_.value.ptr(), cout_, K);
  RowMap gW(W_.grad.ptr(), cout_, K);
  Eigen::Map<Eigen::VectorXd> gb(b_.grad.ptr(), cout_);
  const Index nb_max = chunk_size(N, K, P);
  Buffer cols(static_cast<std::size_t>(K * nb_max * P));
  Buffer G(static_cast<std::size_t>(cout_ * nb_max * P));
  RowMatrix gcols;
  for (Index n0 = 0; n0 < N; n0 += nb_max) {
    const Index nb = std::min(nb_max, N - n0);
    im2col(x_.ptr() + n0 * cin_ * g.H * g.W, nb, g, cols.data());
    gather_channels(gy.ptr(), n0, nb, cout_, P, G.data());
    ConstRowMap Gm(G.data(), cout_, nb * P);
    ConstRowMap C(cols.data(), K, nb * P);
    gW.noalias() += Gm * C.transpose();
    gb += Gm.rowwise().sum();
    gcols.noalias() = W.transpose() * Gm;
    col2im(gcols.data(), nb, g, gx.ptr() + n0 * cin_ * g.H * g.W);
  }
  return gx;
}

void Conv::collect(std::vector<Parameter*>& out) {
  out.push_back(&W_);
  out.push_back(&b_);
}

void Conv::init(Rng& rng) {
  const double fan_in = static_cast<double>(cin_ * (spatial_dims_ == 1 ? k_ : k_ * k_));
  he_uniform(W_.value, fan_in, rng);
  b_.value.fill(0.0);
}

void Conv::write(io::BinaryWriter& w) const {
  w.str(kind());
  w.u64(static_cast<std::uint64_t>(cin_));
  w.u64(static_cast<std::uint64_t>(cout_));
  w.u64(static_cast<std::uint64_t>(k_));
}

// ---------------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(Index cin, Index cout, Index k, Index stride, Index pad)
    : cin_(cin), cout_(cout), k_(k), stride_(stride), pad_(pad) {
  require(cin >= 1 && cout >= 1, "ConvTranspose2d: channel counts must be positive");
  require(k >= 1 && stride >= 1 && pad >= 0 && 2 * pad < k, "ConvTranspose2d: bad geometry");
  W_ = make_param("conv_transpose2d.weight", {cin, cout, k, k});
  b_ = make_param("conv_transpose2d.bias", {cout});
}

Shape ConvTranspose2d::output_shape(const Shape& in) const {
  require_dims(in.size() == 3, "conv_transpose2d: expected C x H x W sample, got " + shape_str(in));
  require_dims(in[0] == cin_, "conv_transpose2d: expected " + std::to_string(cin_) +
                                  " channels, got " + std::to_string(in[0]));
  const auto side = [&](Index h) { return (h - 1) * stride_ - 2 * pad_ + k_; };
  return {cout_, side(in[1]), side(in[2])};
}

Tensor ConvTranspose2d::apply(const Tensor& x) const {
  require_batch(x, "ConvTranspose2d");
  const Shape out_s = output_shape(x.sample_shape());
  const Index N = x.batch(), Hin = x.shape[2], Win = x.shape[3];
  const Geometry g{cout_, out_s[1], out_s[2], k_, k_, stride_, pad_, pad_, Hin, Win};
  const Index K = g.K(), P = g.P();
  Tensor y(prepend(N, out_s));
  ConstRowMap W(W_.value.ptr(), cin_, K);
  const Index nb_max = chunk_size(N, K, P);
  Buffer X(static_cast<std::size_t>(cin_ * nb_max * P));
  RowMatrix cols;
  for (Index n0 = 0; n0 < N; n0 += nb_max) {
    const Index nb = std::min(nb_max, N - n0);
    gather_channels(x.ptr(), n0, nb, cin_, P, X.data());
    cols.noalias() = W.transpose() * ConstRowMap(X.data(), cin_, nb * P);
    col2im(cols.data(), nb, g, y.ptr() + n0 * cout_ * g.H * g.W);
  }
  const Index HW = g.H * g.W;
  for (Index n = 0; n < N; ++n) {
    for (Index c = 0; c < cout_; ++c) {
      double* p = y.ptr() + (n * cout_ + c) * HW;
      const double bc = b_.value.data[static_cast<std::size_t>(c)];
      for (Index i = 0; i < HW; ++i) p[i] += bc;
    }
  }
  return y;
}

Tensor ConvTranspose2d::forward(const Tensor& x) {
  x_ = x;
  return apply(x);
}

Tensor ConvTranspose2d::backward(const Tensor& gy) {
  const Index N = x_.batch(), Hin = x_.shape[2], Win = x_.shape[3];
  const Shape out_s = output_shape(x_.sample_shape());
  const Geometry g{cout_, out_s[1], out_s[2], k_, k_, stride_, pad_, pad_, Hin, Win};
  const Index K = g.K(), P = g.P(), HW = g.H * g.W;
  require_dims(gy.batch() == N && gy.sample_size() == cout_ * HW,
               "conv_transpose2d: bad gradient shape");
  Tensor gx(x_.shape);
  ConstRowMap W(W_.value.ptr(), cin_, K);
  RowMap gW(W_.grad.ptr(), cin_, K);
  const Index nb_max = chunk_size(N, K, P);
  Buffer gcols(static_cast<std::size_t>(K * nb_max * P));
  Buffer X(static_cast<std::size_t>(cin_ * nb_max * P));
  RowMatrix gX;
  for (Index n0 = 0; n0 < N; n0 += nb_max) {
    const Index nb = std::min(nb_max, N - n0);
    im2col(gy.ptr() + n0 * cout_ * HW, nb, g, gcols.data());
    gather_channels(x_.ptr(), n0, nb, cin_, P, X.data());
    ConstRowMap C(gcols.data(), K, nb * P);
    gW.noalias() += ConstRowMap(X.data(), cin_, nb * P) * C.transpose();
    gX.noalias() = W * C;
    scatter_channels(gX.data(), n0, nb, cin_, P, gx.ptr());
  }
  for (Index n = 0; n < N; ++n) {
    for (Index c = 0; c < cout_; ++c) {
      const double* p = gy.ptr() + (n * cout_ + c) * HW;
      double s = 0.0;
      for (Index i = 0; i < HW; ++i) s += p[i];
      b_.grad.data[static_cast<std::size_t>(c)] += s;
    }
  }
  return gx;
}

void ConvTranspose2d::collect(std::vector<Parameter*>& out) {
  out.push_back(&W_);
  out.push_back(&b_);
}

void ConvTranspose2d::init(Rng& rng) {
  // Each output pixel sees about cin * (k / stride)^2 inputs.
  const double per_axis = static_cast<double>(k_) / static_cast<double>(stride_);
  he_uniform(W_.value, static_cast<double>(cin_) * per_axis * per_axis, rng);
  b_.value.fill(0.0);
}

void ConvTranspose2d::write(io::BinaryWriter& w) const {
  w.str(kind());
  for (Index v : {cin_, cout_, k_, stride_, pad_}) w.u64(static_cast<std::uint64_t>(v));
}

// ---------------------------------------------------------------- UpsampleNearest

Shape UpsampleNearest::output_shape(const Shape& in) const {
  require_dims(in.size() == 2 || in.size() == 3,
               "upsample_nearest: expected C x L or C x H x W sample, got " + shape_str(in));
  Shape out = in;
  for (std::size_t i = 1; i < out.size(); ++i) out[i] *= factor_;
  return out;
}

Tensor UpsampleNearest::apply(const Tensor& x) const {
  require_batch(x, "UpsampleNearest");
  const Shape out_s = output_shape(x.sample_shape());
  const bool two_d = out_s.size() == 3;
  const Index H = two_d ? x.shape[2] : 1, W = x.shape.back();
  const Index fh = two_d ? factor_ : 1, Ho = H * fh, Wo = W * factor_;
  const Index planes = x.batch() * x.shape[1];
  Tensor y(prepend(x.batch(), out_s));
  for (Index pl = 0; pl < planes; ++pl) {
    const double* src = x.ptr() + pl * H * W;
    double* dst = y.ptr() + pl * Ho * Wo;
    for (Index i = 0; i < H; ++i) {
      double* drow = dst + i * fh * Wo;
      const double* srow = src + i * W;
      for (Index j = 0; j < W; ++j) {
        for (Index f = 0; f < factor_; ++f) drow[j * factor_ + f] = srow[j];
      }
      for (Index r = 1; r < fh; ++r) std::copy(drow, drow + Wo, drow + r * Wo);
    }
  }
  return y;
}

Tensor UpsampleNearest::forward(const Tensor& x) {
  in_ = x.shape;
  return apply(x);
}

Tensor UpsampleNearest::backward(const Tensor& gy) {
  Tensor gx(in_);
  const bool two_d = in_.size() == 4;
  const Index H = two_d ? in_[2] : 1, W = in_.back();
  const Index fh = two_d ? factor_ : 1, Ho = H * fh, Wo = W * factor_;
  const Index planes = in_[0] * in_[1];
  require_dims(gy.size() == planes * Ho * Wo, "upsample_nearest: bad gradient shape");
  for (Index pl = 0; pl < planes; ++pl) {
    const double* src = gy.ptr() + pl * Ho * Wo;
    double* dst = gx.ptr() + pl * H * W;
    for (Index i = 0; i < H; ++i) {
      double* drow = dst + i * W;
      for (Index r = 0; r < fh; ++r) {
        const double* srow = src + (i * fh + r) * Wo;
        for (Index j = 0; j < W; ++j) {
          double acc = 0.0;
          for (Index f = 0; f < factor_; ++f) acc += srow[j * factor_ + f];
          drow[j] += acc;
        }
      }
    }
  }
  return gx;
}

void UpsampleNearest::write(io::BinaryWriter& w) const {
  w.str(kind());
  w.u64(static_cast<std::uint64_t>(factor_));
}

// ---------------------------------------------------------------- Resample1d

Shape Resample1d::output_shape(const Shape& in) const {
  require_dims(!in.empty(), "resample1d: empty sample shape");
  require_dims(n_out_ <= in.back(), "resample1d: output length " + std::to_string(n_out_) +
                                        " exceeds decoded length " + std::to_string(in.back()));
  Shape out = in;
  out.back() = n_out_;
  return out;
}

namespace {

struct Tap {
  Index i0, i1;
  double w;
};

std::vector<Tap> taps(Index n_in, Index n_out, bool crop) {
  std::vector<Tap> t(static_cast<std::size_t>(n_out));
  const Index off = (n_in - n_out) / 2;
  for (Index j = 0; j < n_out; ++j) {
    if (crop) {
      t[static_cast<std::size_t>(j)] = {off + j, off + j, 0.0};
      continue;
    }
    const double pos = n_out == 1 ? 0.0 : static_cast<double>(j) * static_cast<double>(n_in - 1) /
                                              static_cast<double>(n_out - 1);
    Index i0 = static_cast<Index>(std::floor(pos));
    i0 = std::min(i0, n_in - 1);
    const Index i1 = std::min(i0 + 1, n_in - 1);
    t[static_cast<std::size_t>(j)] = {i0, i1, pos - static_cast<double>(i0)};
  }
  return t;
}

}  // namespace

Tensor Resample1d::apply(const Tensor& x) const {
  require_batch(x, "Resample1d");
  const Shape out_s = output_shape(x.sample_shape());
  const Index n_in = x.shape.back();
  const Index rows = x.size() / n_in;
  const auto tp = taps(n_in, n_out_, crop_);
  Tensor y(prepend(x.batch(), out_s));
  for (Index r = 0; r < rows; ++r) {
    const double* src = x.ptr() + r * n_in;
    double* dst = y.ptr() + r * n_out_;
    for (Index j = 0; j < n_out_; ++j) {
      const Tap& t = tp[static_cast<std::size_t>(j)];
      dst[j] = (1.0 - t.w) * src[t.i0] + t.w * src[t.i1];
    }
  }
  return y;
}

Tensor Resample1d::forward(const Tensor& x) {
  in_ = x.shape;
  return apply(x);
}

Tensor Resample1d::backward(const Tensor& gy) {
  Tensor gx(in_);
  const Index n_in = in_.back();
  const Index rows = gx.size() / n_in;
  require_dims(gy.size() == rows * n_out_, "resample1d: bad gradient shape");
  const auto tp = taps(n_in, n_out_, crop_);
  for (Index r = 0; r < rows; ++r) {
    const double* src = gy.ptr() + r * n_out_;
    double* dst = gx.ptr() + r * n_in;
    for (Index j = 0; j < n_out_; ++j) {
      const Tap& t = tp[static_cast<std::size_t>(j)];
      dst[t.i0] += (1.0 - t.w) * src[j];
      dst[t.i1] += t.w * src[j];
    }
  }
  return gx;
}

void Resample1d::write(io::BinaryWriter& w) const {
  w.str(kind());
  w.u64(static_cast<std::uint64_t>(n_out_));
  w.u64(crop_ ? 1 : 0);
}

// ---------------------------------------------------------------- Sequential

Shape Sequential::output_shape(const Shape& in) const {
  Shape s = in;
  for (const auto& l : layers_) s = l->output_shape(s);
  return s;
}

Tensor Sequential::apply(const Tensor& x) const {
  Tensor h = x;
  for (const auto& l : layers_) h = l->apply(h);
  return h;
}

Tensor Sequential::forward(const Tensor& x) {
  Tensor h = x;
  for (auto& l : layers_) h = l->forward(h);
  return h;
}

Tensor Sequential::backward(const Tensor& gy) {
  Tensor g = gy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

void Sequential::collect(std::vector<Parameter*>& out) {
  for (auto& l : layers_) l->collect(out);
}

void Sequential::init(Rng& rng) {
  for (auto& l : layers_) l->init(rng);
}

void Sequential::write(io::BinaryWriter& w) const {
  w.str(kind());
  w.u64(layers_.size());
  for (const auto& l : layers_) l->write(w);
}

// ---------------------------------------------------------------- ResidualBlock

ResidualBlock::ResidualBlock(ModulePtr main, ModulePtr skip, std::string kind)
    : main_(std::move(main)), skip_(std::move(skip)), kind_(std::move(kind)) {
  require(main_ != nullptr, "ResidualBlock: missing main branch");
}

Shape ResidualBlock::output_shape(const Shape& in) const {
  const Shape m = main_->output_shape(in);
  const Shape s = skip_ ? skip_->output_shape(in) : in;
  require_dims(m == s, kind_ + ": branch shapes differ, main " + shape_str(m) + " vs skip " +
                           shape_str(s));
  return m;
}

Tensor ResidualBlock::apply(const Tensor& x) const {
  output_shape(x.sample_shape());
  Tensor y = main_->apply(x);
  const Tensor s = skip_ ? skip_->apply(x) : Tensor{};
  const Tensor& sk = skip_ ? s : x;
  for (Index i = 0; i < y.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double v = y.data[k] + sk.data[k];
    y.data[k] = v > 0.0 ? v : 0.0;
  }
  return y;
}

Tensor ResidualBlock::forward(const Tensor& x) {
  output_shape(x.sample_shape());
  y_ = main_->forward(x);
  const Tensor s = skip_ ? skip_->forward(x) : Tensor{};
  const Tensor& sk = skip_ ? s : x;
  for (Index i = 0; i < y_.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double v = y_.data[k] + sk.data[k];
    y_.data[k] = v > 0.0 ? v : 0.0;
  }
  return y_;
}

Tensor ResidualBlock::backward(const Tensor& gy) {
  require_dims(gy.size() == y_.size(), kind_ + ": bad gradient shape");
  Tensor g = gy;
  for (Index i = 0; i < g.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!(y_.data[k] > 0.0)) g.data[k] = 0.0;
  }
  Tensor gx = main_->backward(g);
  const Tensor gs = skip_ ? skip_->backward(g) : g;
  for (Index i = 0; i < gx.size(); ++i) gx.data[static_cast<std::size_t>(i)] += gs.data[static_cast<std::size_t>(i)];
  return gx;
}

void ResidualBlock::collect(std::vector<Parameter*>& out) {
  main_->collect(out);
  if (skip_) skip_->collect(out);
}

void ResidualBlock::init(Rng& rng) {
  main_->init(rng);
  if (skip_) skip_->init(rng);
}

void ResidualBlock::write(io::BinaryWriter& w) const {
  w.str("residual");
  w.str(kind_);
  w.u64(skip_ ? 1 : 0);
  main_->write(w);
  if (skip_) skip_->write(w);
}

ModulePtr make_resiblock(int spatial_dims, Index channels, Index k) {
  auto main = std::make_unique<Sequential>();
  main->add(std::make_unique<Conv>(spatial_dims, channels, channels, k));
  main->add(std::make_unique<Relu>());
  main->add(std::make_unique<Conv>(spatial_dims, channels, channels, k));
  return std::make_unique<ResidualBlock>(std::move(main), nullptr,
                                         spatial_dims == 1 ? "resiblock" : "resiblock2d");
}

ModulePtr make_projresiblock(int spatial_dims, Index cin, Index cout, Index k, Index k_proj) {
  auto main = std::make_unique<Sequential>();
  main->add(std::make_unique<Conv>(spatial_dims, cin, cout, k));
  main->add(std::make_unique<Relu>());
  main->add(std::make_unique<Conv>(spatial_dims, cout, cout, k));
  auto skip = std::make_unique<Conv>(spatial_dims, cin, cout, k_proj);
  return std::make_unique<ResidualBlock>(std::move(main), std::move(skip),
                                         spatial_dims == 1 ? "projresiblock" : "projresiblock2d");
}

// ---------------------------------------------------------------- factory

ModulePtr read_module(io::BinaryReader& r) {
  const std::string kind = r.str();
  auto u = [&] { return static_cast<Index>(r.u64()); };
  if (kind == "linear") {
    const Index in = u(), out = u();
    return std::make_unique<Linear>(in, out);
  }
  if (kind == "relu") return std::make_unique<Relu>();
  if (kind == "reshape") return std::make_unique<Reshape>(read_shape(r));
  if (kind == "conv1d" || kind == "conv2d") {
    const Index cin = u(), cout = u(), k = u();
    return std::make_unique<Conv>(kind == "conv1d" ? 1 : 2, cin, cout, k);
  }
  if (kind == "conv_transpose2d") {
    const Index cin = u(), cout = u(), k = u(), s = u(), p = u();
    return std::make_unique<ConvTranspose2d>(cin, cout, k, s, p);
  }
  if (kind == "upsample_nearest") return std::make_unique<UpsampleNearest>(u());
  if (kind == "resample1d") {
    const Index n = u();
    const bool crop = r.u64() != 0;
    return std::make_unique<Resample1d>(n, crop);
  }
  if (kind == "sequential") {
    const auto n = r.u64();
    if (n > 100000) throw IoError("corrupt layer count in network file");
    auto seq = std::make_unique<Sequential>();
    for (std::uint64_t i = 0; i < n; ++i) seq->add(read_module(r));
    return seq;
  }
  if (kind == "residual") {
    std::string name = r.str();
    const bool has_skip = r.u64() != 0;
    ModulePtr main = read_module(r);
    ModulePtr skip = has_skip ? read_module(r) : nullptr;
    return std::make_unique<ResidualBlock>(std::move(main), std::move(skip), std::move(name));
  }
  throw IoError("unknown layer kind '" + kind + "' in network file");
}

}  // namespace romlab::nn
