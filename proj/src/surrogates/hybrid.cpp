#include "surrogates/hybrid.hpp"

#include "reduction/pod.hpp"

#include <chrono>

namespace romlab {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Batched network evaluation over column samples, in chunks to bound memory.
Matrix predict_chunked(const nn::Network& net, const Matrix& X, Index chunk = 64) {
  Matrix Y(net.output_size(), X.cols());
  for (Index c0 = 0; c0 < X.cols(); c0 += chunk) {
    const Index nc = std::min(chunk, X.cols() - c0);
    Y.middleCols(c0, nc) = net.predict(X.middleCols(c0, nc));
  }
  return Y;
}

}  // namespace

ErrorDataset build_hybrid_dataset(const GRom& grom, const std::vector<Param>& train,
                                  const std::vector<Matrix>& snapshots, const TimeGrid& tg,
                                  const RowBlock& rows, bool projection_latents) {
  require(!train.empty() && train.size() == snapshots.size(),
          "build_hybrid_dataset: need one snapshot block per training parameter");
  const Matrix& V = grom.basis();
  const Index n = V.rows();
  const Index m = rows.resolve(n);
  require(rows.begin >= 0 && m >= 1 && rows.begin + m <= n, "build_hybrid_dataset: bad row block");
  const Index nt = tg.size();
  ErrorDataset d;
  d.inputs.resize(V.cols(), nt * static_cast<Index>(train.size()));
  d.targets.resize(m, d.inputs.cols());
  for (std::size_t j = 0; j < train.size(); ++j) {
    const Matrix& U = snapshots[j];
    require_dims(U.rows() == n && U.cols() == nt, "build_hybrid_dataset: snapshot shape mismatch");
    Matrix Z;
    if (projection_latents) {
      Z = V.transpose() * U;
    } else {
      try {
        Z = grom.simulate(train[j], tg).Z;
      } catch (const Error& e) {
        throw NonConvergence(std::string("build_hybrid_dataset: G-ROM failed at training parameter ") +
                                 std::to_string(j) + ": " + e.what(),
                             0.0);
      }
    }
    const Index c0 = static_cast<Index>(j) * nt;
    d.inputs.middleCols(c0, nt) = Z;
    d.targets.middleCols(c0, nt) = (U - V * Z).middleRows(rows.begin, m);
    for (Index i = 0; i < nt; ++i) d.index.emplace_back(i, static_cast<Index>(j));
  }
  return d;
}

const char* to_string(ErrorNetKind k) {
  switch (k) {
    case ErrorNetKind::kCnn1d: return "1dcnnresi";
    case ErrorNetKind::kCnn2d: return "2dcnnresi";
    case ErrorNetKind::kPodCnn2d: return "pod-2dcnnresi";
  }
  return "?";
}

ErrorNetKind error_net_kind_from_string(const std::string& s) {
  if (s == "1dcnnresi") return ErrorNetKind::kCnn1d;
  if (s == "2dcnnresi") return ErrorNetKind::kCnn2d;
  if (s == "pod-2dcnnresi") return ErrorNetKind::kPodCnn2d;
  throw InvalidArgument("unknown error network '" + s + "'");
}

std::unique_ptr<nn::Network> build_error_net(const ErrorNetSpec& spec, Index r, Index m) {
  switch (spec.kind) {
    case ErrorNetKind::kCnn1d:
      return std::make_unique<nn::Network>(nn::build_1dcnnresi(r, m, spec.cnn1d));
    case ErrorNetKind::kCnn2d:
      require(spec.channels * spec.height * spec.width == m,
              "build_error_net: grid " + std::to_string(spec.channels) + "x" +
                  std::to_string(spec.height) + "x" + std::to_string(spec.width) +
                  " does not cover " + std::to_string(m) + " error rows");
      return std::make_unique<nn::Network>(
          nn::build_2dcnnresi(r, spec.height, spec.width, spec.channels, spec.cnn2d));
    case ErrorNetKind::kPodCnn2d:
      return std::make_unique<nn::Network>(nn::build_pod_head_network(r, spec.r0, spec.pod_head));
  }
  throw InvalidArgument("build_error_net: unknown kind");
}

HybridSurrogate train_hybrid(std::shared_ptr<const FomModel> model, const Matrix& V,
                             std::shared_ptr<const EimData> eim, const ErrorDataset& data,
                             const ErrorNetSpec& spec, const nn::TrainConfig& cfg,
                             const RowBlock& rows, nn::LossHistory* history) {
  require(model != nullptr && eim != nullptr, "train_hybrid: missing model or EIM data");
  require_dims(data.inputs.rows() == V.cols(), "train_hybrid: latent width differs from basis size");
  HybridSurrogate s;
  s.model = model;
  s.eim = eim;
  s.grom = std::make_unique<GRom>(*model, V, eim);
  s.spec = spec;
  s.rows = rows;
  const Index m = data.targets.rows();
  require_dims(rows.resolve(model->dim()) == m, "train_hybrid: target rows differ from row block");

  Matrix targets;
  if (spec.kind == ErrorNetKind::kPodCnn2d) {
    require(spec.r0 <= std::min(m, data.targets.cols()),
            "train_hybrid: r0 = " + std::to_string(spec.r0) + " exceeds the error snapshot rank bound");
    s.V0 = pod_basis(data.targets, Truncation::fixed(spec.r0)).V;
    targets = s.V0.transpose() * data.targets;
  } else {
    targets = data.targets;
  }
  s.input_scaler = nn::Scaler::fit(data.inputs, nn::ScaleKind::kStandardize);
  s.target_scaler = nn::Scaler::fit(targets, nn::ScaleKind::kMaxAbs);
  s.net = build_error_net(spec, V.cols(), spec.kind == ErrorNetKind::kPodCnn2d ? spec.r0 : m);
  s.net->init(cfg.seed);
  nn::LossHistory h = nn::train_regression(*s.net, s.input_scaler.normalize(data.inputs),
                                           s.target_scaler.normalize(targets), cfg);
  if (history) *history = std::move(h);
  return s;
}

Matrix hybrid_error(const HybridSurrogate& s, const Matrix& Z) {
  const Matrix out = s.target_scaler.denormalize(predict_chunked(*s.net, s.input_scaler.normalize(Z)));
  return s.V0.size() > 0 ? Matrix(s.V0 * out) : out;
}

HybridPrediction hybrid_predict(const HybridSurrogate& s, const Param& mu, const TimeGrid& tg,
                                const NewtonOptions& opts) {
  HybridPrediction p;
  const auto t0 = std::chrono::steady_clock::now();
  p.Z = s.grom->simulate(mu, tg, opts).Z;
  p.rom_time = seconds_since(t0);
  const auto t1 = std::chrono::steady_clock::now();
  const Matrix E = hybrid_error(s, p.Z);
  p.U = s.V() * p.Z;
  p.U.middleRows(s.rows.begin, E.rows()) += E;
  p.net_time = seconds_since(t1);
  p.total_time = seconds_since(t0);
  return p;
}

}  // namespace romlab
