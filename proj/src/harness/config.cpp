#include "harness/config.hpp"

#include "common/error.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace romlab {

using nlohmann::json;

namespace {

// Reads keys of one JSON object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidArgument("config: '" + where_ + "' must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw InvalidArgument("config: unknown key '" + where_ + "." + it.key() + "'");
  }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }
  template <class T>
  void get(const std::string& k, T& out) {
    if (!has(k)) return;
    try {
      out = j_.at(k).get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument("config: bad value for '" + where_ + "." + k + "': " + e.what());
    }
  }
  const json& sub(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }
  std::string path(const std::string& k) const { return where_ + "." + k; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::vector<Param> parse_params(const json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidArgument("config: '" + where + "' must be an array");
  std::vector<Param> out;
  for (const auto& e : j) {
    std::vector<double> v;
    if (e.is_number()) {
      v.push_back(e.get<double>());
    } else if (e.is_array()) {
      v = e.get<std::vector<double>>();
    } else {
      throw InvalidArgument("config: '" + where + "' entries must be numbers or arrays");
    }
    out.push_back(std::move(v));
  }
  return out;
}

json params_json(const std::vector<Param>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(p);
  return a;
}

void parse_train(const json& j, const std::string& where, nn::TrainConfig& t) {
  Section s(j, where);
  s.get("epochs", t.epochs);
  s.get("batch_size", t.batch_size);
  s.get("learning_rate", t.adam.learning_rate);
  s.get("beta1", t.adam.beta1);
  s.get("beta2", t.adam.beta2);
  s.get("eps", t.adam.eps);
  s.get("alpha1", t.alpha1);
  s.get("alpha2", t.alpha2);
  s.get("validation_fraction", t.validation_fraction);
  s.get("teacher_forcing", t.teacher_forcing);
  s.get("divergence_factor", t.divergence_factor);
  t.validate();
}

json train_json(const nn::TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.adam.learning_rate},
          {"beta1", t.adam.beta1},
          {"beta2", t.adam.beta2},
          {"eps", t.adam.eps},
          {"alpha1", t.alpha1},
          {"alpha2", t.alpha2},
          {"validation_fraction", t.validation_fraction},
          {"teacher_forcing", t.teacher_forcing},
          {"divergence_factor", t.divergence_factor}};
}

void parse_net(const json& j, const std::string& where, ErrorNetSpec& n) {
  Section s(j, where);
  if (s.has("kind")) n.kind = error_net_kind_from_string(s.sub("kind").get<std::string>());
  s.get("r0", n.r0);
  s.get("height", n.height);
  s.get("width", n.width);
  s.get("channels", n.channels);
  if (s.has("cnn1d")) {
    Section c(s.sub("cnn1d"), s.path("cnn1d"));
    c.get("c0", n.cnn1d.c0);
    c.get("l0", n.cnn1d.l0);
    c.get("channels", n.cnn1d.channels);
    c.get("kernel", n.cnn1d.kernel);
    c.get("crop", n.cnn1d.crop);
  }
  auto parse2d = [&](const char* key, nn::Cnn2dOptions& o) {
    if (!s.has(key)) return;
    Section c(s.sub(key), s.path(key));
    c.get("c0", o.c0);
    c.get("channels", o.channels);
    c.get("kernel", o.kernel);
  };
  parse2d("cnn2d", n.cnn2d);
  parse2d("pod_head", n.pod_head);
}

json net_json(const ErrorNetSpec& n) {
  auto j2 = [](const nn::Cnn2dOptions& o) {
    return json{{"c0", o.c0}, {"channels", o.channels}, {"kernel", o.kernel}};
  };
  return {{"kind", to_string(n.kind)},
          {"r0", n.r0},
          {"height", n.height},
          {"width", n.width},
          {"channels", n.channels},
          {"cnn1d",
           {{"c0", n.cnn1d.c0},
            {"l0", n.cnn1d.l0},
            {"channels", n.cnn1d.channels},
            {"kernel", n.cnn1d.kernel},
            {"crop", n.cnn1d.crop}}},
          {"cnn2d", j2(n.cnn2d)},
          {"pod_head", j2(n.pod_head)}};
}

ExperimentConfig defaults_for(const std::string& benchmark) {
  ExperimentConfig c;
  c.fom.benchmark = benchmark;
  if (benchmark == "burgers2d") {
    c.fom.elements = 249;
    c.fom.length = 100.0;
    c.fom.final_time = 25.0;
    c.fom.steps = 500;
    c.fom.strict_bounds = true;
    c.reduction.r = 10;
    c.hybrid.net.kind = ErrorNetKind::kPodCnn2d;
    c.hybrid.ux_only = true;
    c.nonintrusive.r = 10;
    c.nonintrusive.decoder.kind = ErrorNetKind::kPodCnn2d;
    c.nonintrusive.ux_only = true;
  } else if (benchmark != "burgers1d") {
    throw InvalidArgument("config: unknown benchmark '" + benchmark + "'");
  }
  return c;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  std::string bench = "burgers1d";
  if (j.contains("fom") && j["fom"].contains("benchmark"))
    bench = j["fom"]["benchmark"].get<std::string>();
  ExperimentConfig c = defaults_for(bench);

  Section s(j, "config");
  s.get("name", c.name);
  s.get("output", c.output);
  s.get("seed", c.seed);
  s.get("deterministic", c.deterministic);
  s.get("threads", c.threads);
  s.get("timing_repeats", c.timing_repeats);

  if (s.has("fom")) {
    Section f(s.sub("fom"), "fom");
    f.get("benchmark", c.fom.benchmark);
    f.get("elements", c.fom.elements);
    f.get("length", c.fom.length);
    f.get("T", c.fom.final_time);
    f.get("n_t", c.fom.steps);
    f.get("ic_formula", c.fom.initial_condition);
    if (c.fom.initial_condition != "continuous" && c.fom.initial_condition != "literal")
      throw InvalidArgument("config: unknown ic_formula '" + c.fom.initial_condition + "'");
    f.get("form", c.fom.form);
    f.get("source_amplitude", c.fom.source_amplitude);
    f.get("strict_bounds", c.fom.strict_bounds);
    if (f.has("newton")) {
      Section nw(f.sub("newton"), "fom.newton");
      nw.get("tol", c.fom.newton.tol);
      nw.get("max_iter", c.fom.newton.max_iter);
    }
  }
  if (!s.has("train") || !s.has("test"))
    throw InvalidArgument("config: 'train' and 'test' parameter lists are required");
  c.train = parse_params(s.sub("train"), "train");
  c.test = parse_params(s.sub("test"), "test");

  if (s.has("reduction")) {
    Section r(s.sub("reduction"), "reduction");
    auto& R = c.reduction;
    r.get("tol_rb", R.tol_rb);
    r.get("tol_svd", R.tol_svd);
    r.get("tol_eim", R.tol_eim);
    r.get("eim_max", R.eim_max);
    r.get("r_s", R.r_s);
    r.get("r_max", R.r_max);
    r.get("r", R.r);
    r.get("r_tilde", R.r_tilde);
    r.get("lspg_r", R.lspg_r);
    if (r.has("rom_kind")) R.rom_kind = rom_kind_from_string(r.sub("rom_kind").get<std::string>());
    if (r.has("mode")) R.mode = basis_mode_from_string(r.sub("mode").get<std::string>());
    r.get("max_over_time", R.max_over_time);
    r.get("lspg_oversample", R.lspg_oversample);
    r.get("repeat_limit", R.repeat_limit);
  }
  if (s.has("hybrid")) {
    Section h(s.sub("hybrid"), "hybrid");
    h.get("enabled", c.hybrid.enabled);
    if (h.has("net")) parse_net(h.sub("net"), "hybrid.net", c.hybrid.net);
    h.get("ux_only", c.hybrid.ux_only);
    h.get("projection_latents", c.hybrid.projection_latents);
    if (h.has("train")) parse_train(h.sub("train"), "hybrid.train", c.hybrid.train);
  }
  if (s.has("nonintrusive")) {
    Section h(s.sub("nonintrusive"), "nonintrusive");
    h.get("enabled", c.nonintrusive.enabled);
    h.get("r", c.nonintrusive.r);
    h.get("r0", c.nonintrusive.r0);
    if (h.has("decoder")) parse_net(h.sub("decoder"), "nonintrusive.decoder", c.nonintrusive.decoder);
    h.get("hidden", c.nonintrusive.hidden);
    h.get("ux_only", c.nonintrusive.ux_only);
    if (h.has("train")) parse_train(h.sub("train"), "nonintrusive.train", c.nonintrusive.train);
  }
  if (s.has("figures")) {
    Section g(s.sub("figures"), "figures");
    g.get("times", c.figures.times);
    g.get("y_index", c.figures.y_index);
    if (g.has("mus")) c.figures.mus = parse_params(g.sub("mus"), "figures.mus");
  }

  require(!c.train.empty(), "config: empty training set");
  require(!c.test.empty(), "config: empty test set");
  require(c.timing_repeats >= 1, "config: timing_repeats must be >= 1");
  require(c.threads >= 1, "config: threads must be >= 1");
  require(c.reduction.r >= 1, "config: reduction.r must be >= 1");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("config: " + path + ": " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
  const auto& R = c.reduction;
  return {{"name", c.name},
          {"output", c.output},
          {"seed", c.seed},
          {"deterministic", c.deterministic},
          {"threads", c.threads},
          {"timing_repeats", c.timing_repeats},
          {"fom",
           {{"benchmark", c.fom.benchmark},
            {"elements", c.fom.elements},
            {"length", c.fom.length},
            {"T", c.fom.final_time},
            {"n_t", c.fom.steps},
            {"ic_formula", c.fom.initial_condition},
            {"form", c.fom.form},
            {"source_amplitude", c.fom.source_amplitude},
            {"strict_bounds", c.fom.strict_bounds},
            {"newton", {{"tol", c.fom.newton.tol}, {"max_iter", c.fom.newton.max_iter}}}}},
          {"train", params_json(c.train)},
          {"test", params_json(c.test)},
          {"reduction",
           {{"tol_rb", R.tol_rb},
            {"tol_svd", R.tol_svd},
            {"tol_eim", R.tol_eim},
            {"eim_max", R.eim_max},
            {"r_s", R.r_s},
            {"r_max", R.r_max},
            {"r", R.r},
            {"r_tilde", R.r_tilde},
            {"lspg_r", R.lspg_r},
            {"rom_kind", to_string(R.rom_kind)},
            {"mode", to_string(R.mode)},
            {"max_over_time", R.max_over_time},
            {"lspg_oversample", R.lspg_oversample},
            {"repeat_limit", R.repeat_limit}}},
          {"hybrid",
           {{"enabled", c.hybrid.enabled},
            {"net", net_json(c.hybrid.net)},
            {"ux_only", c.hybrid.ux_only},
            {"projection_latents", c.hybrid.projection_latents},
            {"train", train_json(c.hybrid.train)}}},
          {"nonintrusive",
           {{"enabled", c.nonintrusive.enabled},
            {"r", c.nonintrusive.r},
            {"r0", c.nonintrusive.r0},
            {"decoder", net_json(c.nonintrusive.decoder)},
            {"hidden", c.nonintrusive.hidden},
            {"ux_only", c.nonintrusive.ux_only},
            {"train", train_json(c.nonintrusive.train)}}},
          {"figures",
           {{"times", c.figures.times},
            {"y_index", c.figures.y_index},
            {"mus", params_json(c.figures.mus)}}}};
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h = fnv1a(buf.data(), static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char s[17];
  std::snprintf(s, sizeof s, "%016llx", static_cast<unsigned long long>(h));
  return s;
}

std::string config_hash(const ExperimentConfig& cfg) {
  json j = config_to_json(cfg);
  j.erase("output");
  j.erase("threads");
  const std::string s = j.dump();
  return hex64(fnv1a(s.data(), s.size()));
}

std::string fom_hash(const ExperimentConfig& cfg) {
  json j = config_to_json(cfg);
  const std::string s = json{{"fom", j["fom"]}, {"train", j["train"]}, {"test", j["test"]}}.dump();
  return hex64(fnv1a(s.data(), s.size()));
}

std::shared_ptr<FomModel> build_model(const ExperimentConfig& cfg) {
  const TimeGrid tg = cfg.time_grid();
  const auto& f = cfg.fom;
  if (f.benchmark == "burgers1d") {
    Burgers1dConfig b;
    b.elements = f.elements;
    b.length = f.length;
    b.strict_bounds = f.strict_bounds;
    if (f.initial_condition == "continuous") {
      b.ic = InitialCondition::kContinuous;
    } else if (f.initial_condition == "literal") {
      b.ic = InitialCondition::kLiteral;
    } else {
      throw InvalidArgument("config: unknown ic_formula '" + f.initial_condition + "'");
    }
    return build_burgers1d(b, tg);
  }
  if (f.benchmark == "burgers2d") {
    Burgers2dConfig b;
    b.elements = f.elements;
    b.length = f.length;
    b.source_amplitude = f.source_amplitude;
    b.strict_bounds = f.strict_bounds;
    if (f.form == "conservative") {
      b.form = ConvectiveForm::kConservative;
    } else if (f.form == "nonconservative") {
      b.form = ConvectiveForm::kNonconservative;
    } else {
      throw InvalidArgument("config: unknown form '" + f.form + "'");
    }
    return build_burgers2d(b, tg);
  }
  throw InvalidArgument("config: unknown benchmark '" + f.benchmark + "'");
}

namespace {
RowBlock block_for(bool ux_only, const FomModel& model) {
  if (ux_only && model.grid().dimensionality == 2) return RowBlock{0, model.dim() / 2};
  return RowBlock{};
}
}  // namespace

RowBlock hybrid_rows(const ExperimentConfig& cfg, const FomModel& model) {
  return block_for(cfg.hybrid.ux_only, model);
}

RowBlock nonintrusive_rows(const ExperimentConfig& cfg, const FomModel& model) {
  return block_for(cfg.nonintrusive.ux_only, model);
}

RowBlock report_rows(const ExperimentConfig& cfg, const FomModel& model) {
  return block_for(cfg.hybrid.ux_only || cfg.nonintrusive.ux_only, model);
}

}  // namespace romlab
