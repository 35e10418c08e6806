#include "surrogates/bundle.hpp"

#include "reduction/eim.hpp"
#include "reduction/pod.hpp"

#include <filesystem>
#include <fstream>

namespace romlab {

namespace fs = std::filesystem;
using nlohmann::json;

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path);
}

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

json scaler_to_json(const nn::Scaler& s) {
  return json{{"kind", static_cast<int>(s.kind)},
              {"shift", std::vector<double>(s.shift.data(), s.shift.data() + s.shift.size())},
              {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())}};
}

nn::Scaler scaler_from_json(const json& j) {
  nn::Scaler s;
  const int k = j.at("kind").get<int>();
  if (k < 0 || k > 3) throw IoError("bad scaler kind in manifest");
  s.kind = static_cast<nn::ScaleKind>(k);
  const auto shift = j.at("shift").get<std::vector<double>>();
  const auto scale = j.at("scale").get<std::vector<double>>();
  if (shift.size() != scale.size()) throw IoError("scaler shift/scale length mismatch");
  s.shift = Eigen::Map<const Vector>(shift.data(), static_cast<Index>(shift.size()));
  s.scale = Eigen::Map<const Vector>(scale.data(), static_cast<Index>(scale.size()));
  return s;
}

namespace {

json spec_to_json(const ErrorNetSpec& s) {
  return json{{"kind", to_string(s.kind)},
              {"r0", s.r0},
              {"height", s.height},
              {"width", s.width},
              {"channels", s.channels}};
}

ErrorNetSpec spec_from_json(const json& j) {
  ErrorNetSpec s;
  s.kind = error_net_kind_from_string(j.at("kind").get<std::string>());
  s.r0 = j.at("r0").get<Index>();
  s.height = j.at("height").get<Index>();
  s.width = j.at("width").get<Index>();
  s.channels = j.at("channels").get<Index>();
  return s;
}

void save_matrix(const std::string& path, const Matrix& M) {
  ReducedBasis b;
  b.V = M;
  save_basis(path, b);
}

Matrix load_matrix(const std::string& path) { return load_basis(path).V; }

std::string in_dir(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

}  // namespace

void save_hybrid_bundle(const std::string& dir, HybridSurrogate& s, const json& provenance) {
  require(s.grom && s.net && s.eim, "save_hybrid_bundle: incomplete surrogate");
  fs::create_directories(dir);
  save_matrix(in_dir(dir, "basis.rombase"), s.V());
  save_eim(in_dir(dir, "eim.romeim"), *s.eim);
  nn::save_network(in_dir(dir, "error_net.romnn"), *s.net);
  if (s.V0.size() > 0) save_matrix(in_dir(dir, "error_pod.rombase"), s.V0);
  json m{{"format", "romlab-hybrid-1"},
         {"r", s.V().cols()},
         {"n", s.V().rows()},
         {"error_net", spec_to_json(s.spec)},
         {"error_net_arch", s.net->arch()},
         {"parameter_count", s.net->parameter_count()},
         {"rows", {{"begin", s.rows.begin}, {"count", s.rows.count}}},
         {"input_scaler", scaler_to_json(s.input_scaler)},
         {"target_scaler", scaler_to_json(s.target_scaler)},
         {"error_pod", s.V0.size() > 0},
         {"provenance", provenance}};
  write_json(in_dir(dir, "manifest.json"), m);
}

HybridSurrogate load_hybrid_bundle(const std::string& dir, std::shared_ptr<const FomModel> model) {
  require(model != nullptr, "load_hybrid_bundle: missing model");
  const json m = read_json(in_dir(dir, "manifest.json"));
  if (m.value("format", "") != "romlab-hybrid-1") throw IoError(dir + ": not a hybrid bundle");
  HybridSurrogate s;
  s.model = model;
  const Matrix V = load_matrix(in_dir(dir, "basis.rombase"));
  require_dims(V.rows() == model->dim(), "load_hybrid_bundle: basis rows do not match the model");
  s.eim = std::make_shared<EimData>(load_eim(in_dir(dir, "eim.romeim")));
  s.grom = std::make_unique<GRom>(*model, V, s.eim);
  s.net = std::make_unique<nn::Network>(nn::load_network(in_dir(dir, "error_net.romnn")));
  s.spec = spec_from_json(m.at("error_net"));
  s.rows.begin = m.at("rows").at("begin").get<Index>();
  s.rows.count = m.at("rows").at("count").get<Index>();
  s.input_scaler = scaler_from_json(m.at("input_scaler"));
  s.target_scaler = scaler_from_json(m.at("target_scaler"));
  if (m.at("error_pod").get<bool>()) s.V0 = load_matrix(in_dir(dir, "error_pod.rombase"));
  return s;
}

void save_nonintrusive_bundle(const std::string& dir, NonIntrusiveSurrogate& s, const json& provenance) {
  require(s.ffnn && s.decoder, "save_nonintrusive_bundle: incomplete surrogate");
  fs::create_directories(dir);
  save_matrix(in_dir(dir, "basis.rombase"), s.V);
  if (s.V0.size() > 0) save_matrix(in_dir(dir, "error_pod.rombase"), s.V0);
  nn::save_network(in_dir(dir, "ffnn.romnn"), *s.ffnn);
  nn::save_network(in_dir(dir, "e_decoder.romnn"), *s.decoder);
  auto col = [](const Matrix& M) { return std::vector<double>(M.data(), M.data() + M.size()); };
  json m{{"format", "romlab-nonintrusive-1"},
         {"r", s.V.cols()},
         {"n", s.V.rows()},
         {"param_dim", s.param_dim},
         {"hidden", s.hidden},
         {"decoder", spec_to_json(s.decoder_spec)},
         {"rows", {{"begin", s.rows.begin}, {"count", s.rows.count}}},
         {"input_scaler", scaler_to_json(s.input_scaler)},
         {"latent_scaler", scaler_to_json(s.latent_scaler)},
         {"error_scaler", scaler_to_json(s.error_scaler)},
         {"input_lo", col(s.input_lo)},
         {"input_hi", col(s.input_hi)},
         {"error_pod", s.V0.size() > 0},
         {"provenance", provenance}};
  write_json(in_dir(dir, "manifest.json"), m);
}

NonIntrusiveSurrogate load_nonintrusive_bundle(const std::string& dir) {
  const json m = read_json(in_dir(dir, "manifest.json"));
  if (m.value("format", "") != "romlab-nonintrusive-1") throw IoError(dir + ": not a non-intrusive bundle");
  NonIntrusiveSurrogate s;
  s.V = load_matrix(in_dir(dir, "basis.rombase"));
  if (m.at("error_pod").get<bool>()) s.V0 = load_matrix(in_dir(dir, "error_pod.rombase"));
  s.ffnn = std::make_unique<nn::Network>(nn::load_network(in_dir(dir, "ffnn.romnn")));
  s.decoder = std::make_unique<nn::Network>(nn::load_network(in_dir(dir, "e_decoder.romnn")));
  s.decoder_spec = spec_from_json(m.at("decoder"));
  s.hidden = m.at("hidden").get<std::vector<Index>>();
  s.param_dim = m.at("param_dim").get<Index>();
  s.rows.begin = m.at("rows").at("begin").get<Index>();
  s.rows.count = m.at("rows").at("count").get<Index>();
  s.input_scaler = scaler_from_json(m.at("input_scaler"));
  s.latent_scaler = scaler_from_json(m.at("latent_scaler"));
  s.error_scaler = scaler_from_json(m.at("error_scaler"));
  const auto lo = m.at("input_lo").get<std::vector<double>>();
  const auto hi = m.at("input_hi").get<std::vector<double>>();
  s.input_lo = Eigen::Map<const Matrix>(lo.data(), static_cast<Index>(lo.size()), 1);
  s.input_hi = Eigen::Map<const Matrix>(hi.data(), static_cast<Index>(hi.size()), 1);
  return s;
}

}  // namespace romlab
