#include "neural/train.hpp"

#include "common/binio.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace romlab::nn {

double mse(const Tensor& a, const Tensor& b, Tensor* grad_a) {
  require_dims(a.size() == b.size() && a.batch() == b.batch() && a.size() > 0,
               "mse: shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
  const double inv = 1.0 / static_cast<double>(a.size());
  if (grad_a) *grad_a = Tensor(a.shape);
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
    if (grad_a) grad_a->data[i] = 2.0 * d * inv;
  }
  return s * inv;
}

CompositeLoss composite_loss(const Tensor& z_pred, const Tensor& z, const Tensor& e_pred,
                             const Tensor& e, double alpha1, double alpha2, Tensor* grad_z,
                             Tensor* grad_e) {
  require(alpha1 >= 0.0 && alpha2 >= 0.0 && alpha1 + alpha2 > 0.0,
          "composite_loss: weights must be nonnegative and not both zero");
  CompositeLoss out;
  out.loss1 = mse(z_pred, z, grad_z);
  out.loss2 = mse(e_pred, e, grad_e);
  out.total = alpha1 * out.loss1 + alpha2 * out.loss2;
  if (grad_z) {
    for (double& v : grad_z->data) v *= alpha1;
  }
  if (grad_e) {
    for (double& v : grad_e->data) v *= alpha2;
  }
  return out;
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  require(cfg.learning_rate > 0.0, "Adam: learning rate must be positive");
  require(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0,
          "Adam: betas must lie in [0, 1)");
  require(cfg.eps > 0.0, "Adam: eps must be positive");
  for (const auto* p : params_) {
    m_.emplace_back(p->value.data.size(), 0.0);
    v_.emplace_back(p->value.data.size(), 0.0);
  }
}

void Adam::step() {
  for (const auto* p : params_) {
    if (!p->grad.all_finite()) throw NumericError("Adam: non-finite gradient in '" + p->name + "'");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& w = params_[k]->value.data;
    const auto& g = params_[k]->grad.data;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      w[i] -= cfg_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
    }
  }
}

void TrainConfig::validate() const {
  require(epochs >= 1, "TrainConfig: epochs must be >= 1");
  require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
  require(alpha1 >= 0.0 && alpha2 >= 0.0 && alpha1 + alpha2 > 0.0,
          "TrainConfig: loss weights must be nonnegative and not both zero");
  require(validation_fraction >= 0.0 && validation_fraction < 1.0,
          "TrainConfig: validation_fraction must lie in [0, 1)");
}

namespace {

struct Split {
  std::vector<Index> train, val;
};

Split split_indices(Index n, double frac, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index(0));
  rng.shuffle(idx);
  auto nv = static_cast<Index>(std::floor(frac * static_cast<double>(n)));
  if (nv >= n) nv = n - 1;
  Split s;
  s.val.assign(idx.begin(), idx.begin() + nv);
  s.train.assign(idx.begin() + nv, idx.end());
  return s;
}

Tensor batch_of(const Matrix& M, const std::vector<Index>& idx, std::size_t lo, std::size_t hi,
                const Shape& sample) {
  Tensor t(prepend(static_cast<Index>(hi - lo), sample));
  const Index d = M.rows();
  for (std::size_t k = lo; k < hi; ++k) {
    const double* src = M.data() + idx[k] * d;
    std::copy(src, src + d, t.ptr() + static_cast<Index>(k - lo) * d);
  }
  return t;
}

void check_divergence(const LossHistory& h, const TrainConfig& cfg, int epoch) {
  const double last = h.total.back();
  if (!std::isfinite(last) || (h.total.front() > 0.0 && last > cfg.divergence_factor * h.total.front())) {
    std::ostringstream os;
    os << "training diverged at epoch " << epoch << " (loss " << last << ", initial "
       << h.total.front() << ")";
    throw NumericError(os.str());
  }
}

}  // namespace

LossHistory train_regression(Network& net, const Matrix& X, const Matrix& Y, const TrainConfig& cfg) {
  cfg.validate();
  require_dims(X.cols() == Y.cols() && X.cols() >= 1, "train_regression: sample count mismatch");
  require_dims(X.rows() == net.input_size(), "train_regression: input width mismatch");
  require_dims(Y.rows() == net.output_size(), "train_regression: target width mismatch");
  Rng rng(cfg.seed);
  Split sp = split_indices(X.cols(), cfg.validation_fraction, rng);
  Adam opt(net.parameters(), cfg.adam);
  LossHistory h;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(sp.train);
    double sum = 0.0;
    for (std::size_t lo = 0; lo < sp.train.size(); lo += bs) {
      const std::size_t hi = std::min(sp.train.size(), lo + bs);
      const Tensor xb = batch_of(X, sp.train, lo, hi, net.input_shape());
      const Tensor yb = batch_of(Y, sp.train, lo, hi, net.output_shape());
      net.zero_grad();
      const Tensor pred = net.forward(xb);
      Tensor g;
      const double l = mse(pred, yb, &g);
      net.backward(g);
      opt.step();
      sum += l * static_cast<double>(hi - lo);
    }
    const double mean = sum / static_cast<double>(sp.train.size());
    h.loss1.push_back(mean);
    h.loss2.push_back(0.0);
    h.total.push_back(mean);
    if (!sp.val.empty()) {
      const Tensor xv = batch_of(X, sp.val, 0, sp.val.size(), net.input_shape());
      const Tensor yv = batch_of(Y, sp.val, 0, sp.val.size(), net.output_shape());
      h.validation.push_back(mse(net.apply(xv), yv));
    } else {
      h.validation.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    check_divergence(h, cfg, epoch);
    if (cfg.on_epoch) cfg.on_epoch(epoch, mean);
  }
  return h;
}

LossHistory train_joint(Network& ffnn, Network& decoder, const Matrix& X, const Matrix& Z,
                        const Matrix& E, const TrainConfig& cfg) {
  cfg.validate();
  require_dims(X.cols() == Z.cols() && X.cols() == E.cols() && X.cols() >= 1,
               "train_joint: sample count mismatch");
  require_dims(X.rows() == ffnn.input_size(), "train_joint: FFNN input width mismatch");
  require_dims(Z.rows() == ffnn.output_size(), "train_joint: latent width mismatch");
  require_dims(decoder.input_size() == ffnn.output_size(), "train_joint: decoder input width mismatch");
  require_dims(E.rows() == decoder.output_size(), "train_joint: decoder output width mismatch");
  Rng rng(cfg.seed);
  Split sp = split_indices(X.cols(), cfg.validation_fraction, rng);
  std::vector<Parameter*> params = ffnn.parameters();
  for (auto* p : decoder.parameters()) params.push_back(p);
  Adam opt(params, cfg.adam);
  LossHistory h;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  auto eval = [&](const std::vector<Index>& idx, std::size_t lo, std::size_t hi, bool train) {
    const Tensor xb = batch_of(X, idx, lo, hi, ffnn.input_shape());
    const Tensor zb = batch_of(Z, idx, lo, hi, ffnn.output_shape());
    const Tensor eb = batch_of(E, idx, lo, hi, decoder.output_shape());
    if (!train) {
      const Tensor zp = ffnn.apply(xb);
      Tensor zin = cfg.teacher_forcing ? zb : zp;
      zin.reshape(prepend(zin.batch(), decoder.input_shape()));
      return composite_loss(zp, zb, decoder.apply(zin), eb, cfg.alpha1, cfg.alpha2);
    }
    ffnn.zero_grad();
    decoder.zero_grad();
    const Tensor zp = ffnn.forward(xb);
    Tensor zin = cfg.teacher_forcing ? zb : zp;
    zin.reshape(prepend(zin.batch(), decoder.input_shape()));
    const Tensor ep = decoder.forward(zin);
    Tensor gz, ge;
    const CompositeLoss l = composite_loss(zp, zb, ep, eb, cfg.alpha1, cfg.alpha2, &gz, &ge);
    Tensor gzin = decoder.backward(ge);
    if (!cfg.teacher_forcing) {
      for (std::size_t i = 0; i < gz.data.size(); ++i) gz.data[i] += gzin.data[i];
    }
    ffnn.backward(gz);
    opt.step();
    return l;
  };
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(sp.train);
    CompositeLoss sum;
    for (std::size_t lo = 0; lo < sp.train.size(); lo += bs) {
      const std::size_t hi = std::min(sp.train.size(), lo + bs);
      const CompositeLoss l = eval(sp.train, lo, hi, true);
      const auto w = static_cast<double>(hi - lo);
      sum.loss1 += l.loss1 * w;
      sum.loss2 += l.loss2 * w;
      sum.total += l.total * w;
    }
    const auto n = static_cast<double>(sp.train.size());
    h.loss1.push_back(sum.loss1 / n);
    h.loss2.push_back(sum.loss2 / n);
    h.total.push_back(sum.total / n);
    h.validation.push_back(sp.val.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : eval(sp.val, 0, sp.val.size(), false).total);
    check_divergence(h, cfg, epoch);
    if (cfg.on_epoch) cfg.on_epoch(epoch, h.total.back());
  }
  return h;
}

void write_loss_csv(const std::string& path, const LossHistory& h) {
  Matrix t(static_cast<Index>(h.total.size()), 5);
  for (std::size_t i = 0; i < h.total.size(); ++i) {
    const auto r = static_cast<Index>(i);
    t(r, 0) = static_cast<double>(i + 1);
    t(r, 1) = h.loss1[i];
    t(r, 2) = h.loss2[i];
    t(r, 3) = h.total[i];
    t(r, 4) = i < h.validation.size() ? h.validation[i] : std::numeric_limits<double>::quiet_NaN();
  }
  io::write_csv(path, t, {"epoch", "loss1", "loss2", "total", "validation"});
}

}  // namespace romlab::nn
