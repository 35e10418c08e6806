#include "surrogates/nonintrusive.hpp"

#include "reduction/pod.hpp"

#include <chrono>
#include <iostream>

namespace romlab {

NonIntrusiveDatasets build_nonintrusive_datasets(const std::vector<Param>& train,
                                                 const std::vector<Matrix>& snapshots,
                                                 const TimeGrid& tg, Index r, Index r0,
                                                 const RowBlock& rows) {
  require(!train.empty() && train.size() == snapshots.size(),
          "build_nonintrusive_datasets: need one snapshot block per training parameter");
  const Index n = snapshots.front().rows();
  const Index m = rows.resolve(n);
  require(rows.begin >= 0 && m >= 1 && rows.begin + m <= n,
          "build_nonintrusive_datasets: bad row block");
  const Index nt = tg.size();
  const Index p = static_cast<Index>(train.front().size());
  const Index N = nt * static_cast<Index>(train.size());
  NonIntrusiveDatasets d;
  d.rows = rows;
  Matrix X(m, N);
  d.inputs.resize(1 + p, N);
  for (std::size_t j = 0; j < train.size(); ++j) {
    require_dims(snapshots[j].rows() == n && snapshots[j].cols() == nt,
                 "build_nonintrusive_datasets: snapshot shape mismatch");
    require_dims(static_cast<Index>(train[j].size()) == p,
                 "build_nonintrusive_datasets: parameter dimension mismatch");
    const Index c0 = static_cast<Index>(j) * nt;
    X.middleCols(c0, nt) = snapshots[j].middleRows(rows.begin, m);
    for (Index i = 0; i < nt; ++i) {
      d.inputs(0, c0 + i) = tg.time(i);
      for (Index k = 0; k < p; ++k) d.inputs(1 + k, c0 + i) = train[j][static_cast<std::size_t>(k)];
    }
  }
  require(r >= 1 && r <= std::min(m, N), "build_nonintrusive_datasets: r exceeds the snapshot rank bound");
  ReducedBasis b = pod_basis(X, Truncation::fixed(r));
  d.V = std::move(b.V);
  d.sigma = std::move(b.singular_values);
  d.Z = d.V.transpose() * X;
  Matrix Xe = X - d.V * d.Z;
  if (r0 > 0) {
    require(r0 <= std::min(m, N), "build_nonintrusive_datasets: r0 exceeds the error rank bound");
    ReducedBasis be = pod_basis(Xe, Truncation::fixed(r0));
    d.V0 = std::move(be.V);
    d.sigma_e = std::move(be.singular_values);
    d.E = d.V0.transpose() * Xe;
  } else {
    d.E = std::move(Xe);
  }
  return d;
}

NonIntrusiveSurrogate train_nonintrusive(const NonIntrusiveDatasets& data, const ErrorNetSpec& decoder,
                                         const nn::TrainConfig& cfg, const std::vector<Index>& hidden,
                                         nn::LossHistory* history) {
  const Index r = data.Z.rows();
  if (cfg.alpha1 == 0.0) {
    std::cerr << "warning: train_nonintrusive with alpha1 = 0 leaves the FFNN latents unsupervised\n";
  }
  NonIntrusiveSurrogate s;
  s.V = data.V;
  s.V0 = data.V0;
  s.rows = data.rows;
  s.decoder_spec = decoder;
  s.hidden = hidden;
  s.param_dim = data.inputs.rows() - 1;
  s.input_lo = data.inputs.rowwise().minCoeff();
  s.input_hi = data.inputs.rowwise().maxCoeff();
  s.input_scaler = nn::Scaler::fit(data.inputs, nn::ScaleKind::kMinMax);
  s.latent_scaler = nn::Scaler::fit(data.Z, nn::ScaleKind::kStandardize);
  s.error_scaler = nn::Scaler::fit(data.E, nn::ScaleKind::kMaxAbs);
  s.ffnn = std::make_unique<nn::Network>(nn::build_ffnn(data.inputs.rows(), r, hidden));
  if (decoder.kind == ErrorNetKind::kPodCnn2d) {
    require(data.V0.size() > 0 && data.E.rows() == decoder.r0,
            "train_nonintrusive: POD decoder needs error POD coefficients with r0 rows");
  }
  s.decoder = build_error_net(decoder, r, data.E.rows());
  s.ffnn->init(cfg.seed);
  s.decoder->init(cfg.seed + 1);
  nn::LossHistory h = nn::train_joint(*s.ffnn, *s.decoder, s.input_scaler.normalize(data.inputs),
                                      s.latent_scaler.normalize(data.Z),
                                      s.error_scaler.normalize(data.E), cfg);
  if (history) *history = std::move(h);
  return s;
}

NonIntrusivePrediction nonintrusive_predict(const NonIntrusiveSurrogate& s, const Param& mu,
                                            const TimeGrid& tg) {
  require_dims(static_cast<Index>(mu.size()) == s.param_dim,
               "nonintrusive_predict: parameter dimension mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  NonIntrusivePrediction p;
  const Index nt = tg.size();
  Matrix X(1 + s.param_dim, nt);
  for (Index i = 0; i < nt; ++i) {
    X(0, i) = tg.time(i);
    for (Index k = 0; k < s.param_dim; ++k) X(1 + k, i) = mu[static_cast<std::size_t>(k)];
  }
  for (Index k = 0; k < X.rows(); ++k) {
    if (X.row(k).minCoeff() < s.input_lo(k, 0) || X.row(k).maxCoeff() > s.input_hi(k, 0)) {
      p.extrapolated = true;
    }
  }
  const Matrix zn = s.ffnn->predict(s.input_scaler.normalize(X));
  p.Z = s.latent_scaler.denormalize(zn);
  Matrix E(s.decoder->output_size(), nt);
  constexpr Index kChunk = 64;
  for (Index c0 = 0; c0 < nt; c0 += kChunk) {
    const Index nc = std::min(kChunk, nt - c0);
    E.middleCols(c0, nc) = s.decoder->predict(zn.middleCols(c0, nc));
  }
  E = s.error_scaler.denormalize(E);
  p.U = s.V * p.Z;
  if (s.V0.size() > 0) {
    p.U += s.V0 * E;
  } else {
    p.U += E;
  }
  p.total_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return p;
}

}  // namespace romlab
