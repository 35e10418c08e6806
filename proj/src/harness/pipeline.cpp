#include "harness/pipeline.hpp"

#include "common/error.hpp"
#include "fom/trajectory_io.hpp"
#include "harness/timing.hpp"
#include "reduction/pod.hpp"
#include "roms/grom.hpp"
#include "roms/lspg.hpp"
#include "surrogates/bundle.hpp"
#include "surrogates/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

namespace romlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string indexed(const std::string& prefix, std::size_t k, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03zu", k);
  return prefix + buf + ext;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string mu_cells(const Param& mu) {
  std::string s;
  for (std::size_t k = 0; k < mu.size(); ++k) s += (k ? "," : "") + fmt(mu[k]);
  return s;
}

std::string mu_header(Index p) {
  std::string s;
  for (Index k = 0; k < p; ++k) s += (k ? ",mu_" : "mu_") + std::to_string(k);
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

Matrix block_of(const Matrix& U, const RowBlock& rows, Index full_dim) {
  const Index m = rows.resolve(full_dim);
  if (U.rows() == m) return U;
  require(U.rows() == full_dim, "benchmark: prediction has " + std::to_string(U.rows()) +
                                    " rows, expected " + std::to_string(full_dim));
  return U.middleRows(rows.begin, m);
}

json read_timings(const std::string& dir) {
  const std::string p = dir + "/timings.json";
  return fs::exists(p) ? read_json(p) : json::object();
}

// Config recorded in bundles: everything but where and how wide the run was.
json provenance_config(const ExperimentConfig& cfg) {
  json j = config_to_json(cfg);
  j.erase("output");
  j.erase("threads");
  return j;
}

double timing_value(const json& t, const std::string& key) {
  return t.contains(key) && t[key].is_number() ? t[key].get<double>() : 0.0;
}

}  // namespace

Pipeline::Pipeline(ExperimentConfig cfg)
    : cfg_(std::move(cfg)), model_(build_model(cfg_)), tg_(cfg_.time_grid()) {
  for (const auto& mu : cfg_.train) model_->check_param(mu);
  for (const auto& mu : cfg_.test) model_->check_param(mu);
  if (cfg_.deterministic) cfg_.threads = 1;
}

std::string Pipeline::stage_dir(const std::string& stage) const {
  return (fs::path(cfg_.output) / stage).string();
}

std::string Pipeline::stage_key(const std::string& stage) const {
  const json j = config_to_json(cfg_);
  json k = {{"stage", stage}, {"fom", j["fom"]}, {"train", j["train"]}, {"test", j["test"]}};
  const json& R = j["reduction"];
  if (stage == "eim" || stage == "greedy" || stage == "rom-simulate" || stage == "train-hybrid")
    k["eim"] = {R["tol_eim"], R["eim_max"]};
  if (stage == "greedy" || stage == "rom-simulate" || stage == "train-hybrid") k["reduction"] = R;
  if (stage == "train-hybrid") {
    k["hybrid"] = j["hybrid"];
    k["seed"] = cfg_.seed;
  }
  if (stage == "train-nonintrusive") {
    k["nonintrusive"] = j["nonintrusive"];
    k["seed"] = cfg_.seed;
  }
  if (stage == "benchmark") k = {{"stage", stage}, {"config", config_hash(cfg_)}};
  const std::string s = k.dump();
  return hex64(fnv1a(s.data(), s.size()));
}

bool Pipeline::up_to_date(const std::string& stage) const {
  const std::string p = stage_dir(stage) + "/manifest.json";
  if (!fs::exists(p)) return false;
  const json m = read_json(p);
  if (m.value("key", "") != stage_key(stage)) return false;
  for (const auto& [name, hash] : m.at("artifacts").items()) {
    const std::string f = stage_dir(stage) + "/" + name;
    if (!fs::exists(f) || hex64(fnv1a_file(f)) != hash.get<std::string>()) return false;
  }
  return true;
}

void Pipeline::finish(const std::string& stage, const std::vector<std::string>& artifacts,
                      const json& timings, const json& extra) const {
  const std::string dir = stage_dir(stage);
  json arts = json::object();
  for (const auto& a : artifacts) arts[a] = hex64(fnv1a_file(dir + "/" + a));
  json m = {{"stage", stage},
            {"config_hash", config_hash(cfg_)},
            {"key", stage_key(stage)},
            {"seed", cfg_.seed},
            {"deterministic", cfg_.deterministic},
            {"benchmark", cfg_.fom.benchmark},
            {"artifacts", arts}};
  if (!extra.is_null()) m["extra"] = extra;
  write_json(dir + "/manifest.json", m);
  json t = timings;
  t["threads"] = cfg_.threads;
  write_json(dir + "/timings.json", t);
}

void Pipeline::ensure(const std::string& stage) {
  if (!up_to_date(stage)) run(stage);
}

void Pipeline::run(const std::string& stage) {
  if (stage == "snapshots") return snapshots();
  if (stage == "eim") return eim();
  if (stage == "greedy") return greedy();
  if (stage == "rom-simulate") return rom_simulate();
  if (stage == "train-hybrid") return train_hybrid();
  if (stage == "train-nonintrusive") return train_nonintrusive();
  if (stage == "benchmark") return benchmark();
  throw InvalidArgument("unknown stage '" + stage + "'");
}

// ---------------------------------------------------------------- snapshots

void Pipeline::snapshots() {
  const std::string dir = stage_dir("snapshots");
  fs::create_directories(dir);
  std::vector<std::string> arts;
  json times = json::object();
  auto run_set = [&](const std::vector<Param>& set, const std::string& prefix,
                     std::vector<Matrix>& store) {
    store.clear();
    json t = json::array();
    for (std::size_t k = 0; k < set.size(); ++k) {
      SnapshotTrajectory tr = simulate_fom(*model_, set[k], tg_, cfg_.fom.newton);
      const std::string name = indexed(prefix, k, ".romsnap");
      save_trajectory(dir + "/" + name, tr);
      arts.push_back(name);
      t.push_back(tr.wall_time);
      store.push_back(std::move(tr.states));
    }
    times[prefix + "fom_seconds"] = t;
  };
  run_set(cfg_.train, "train_", train_);
  run_set(cfg_.test, "test_", test_);
  train_loaded_ = test_loaded_ = true;
  finish("snapshots", arts, times);
}

const std::vector<Matrix>& Pipeline::train_snapshots() {
  if (train_loaded_) return train_;
  ensure("snapshots");
  if (!train_loaded_) {
    train_.clear();
    for (std::size_t k = 0; k < cfg_.train.size(); ++k)
      train_.push_back(load_trajectory(stage_dir("snapshots") + "/" + indexed("train_", k, ".romsnap")).states);
    train_loaded_ = true;
  }
  return train_;
}

const std::vector<Matrix>& Pipeline::test_snapshots() {
  if (test_loaded_) return test_;
  ensure("snapshots");
  if (!test_loaded_) {
    test_.clear();
    for (std::size_t k = 0; k < cfg_.test.size(); ++k)
      test_.push_back(load_trajectory(stage_dir("snapshots") + "/" + indexed("test_", k, ".romsnap")).states);
    test_loaded_ = true;
  }
  return test_;
}

// ---------------------------------------------------------------------- eim

void Pipeline::eim() {
  const auto& snaps = train_snapshots();
  const std::string dir = stage_dir("eim");
  fs::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();
  Index cols = 0;
  for (const auto& X : snaps) cols += X.cols();
  Matrix F(model_->dim(), cols);
  Index c = 0;
  Vector f;
  for (std::size_t j = 0; j < snaps.size(); ++j)
    for (Index i = 0; i < snaps[j].cols(); ++i) {
      model_->eval_f(snaps[j].col(i), cfg_.train[j], f);
      F.col(c++) = f;
    }
  EimOptions opts;
  opts.tol = cfg_.reduction.tol_eim;
  opts.max_size = cfg_.reduction.eim_max;
  auto data = std::make_shared<EimData>(eim_build(F, opts, model_.get()));
  const double secs = seconds_since(t0);
  save_eim(dir + "/eim.romeim", *data);
  export_eim_csv(dir + "/indices.csv", *data);
  eim_ = data;
  finish("eim", {"eim.romeim", "indices.csv"}, {{"eim_seconds", secs}},
         {{"size", data->size()}, {"condition", data->condition}});
}

std::shared_ptr<const EimData> Pipeline::eim_data() {
  if (eim_) return eim_;
  ensure("eim");
  if (!eim_) {
    auto d = std::make_shared<EimData>(load_eim(stage_dir("eim") + "/eim.romeim"));
    eim_attach_closure(*d, *model_);
    eim_ = d;
  }
  return eim_;
}

// ------------------------------------------------------------------- greedy

void Pipeline::greedy() {
  const auto& snaps = train_snapshots();
  auto hyper = eim_data();
  const std::string dir = stage_dir("greedy");
  fs::create_directories(dir);
  const auto& R = cfg_.reduction;
  GreedyOptions o;
  o.tol_rb = R.tol_rb;
  o.r_max = R.r_max;
  o.r_s = R.r_s;
  o.tol_svd = R.tol_svd;
  o.kind = R.rom_kind;
  o.newton = cfg_.fom.newton;
  o.max_over_time = R.max_over_time;
  o.repeat_limit = R.repeat_limit;
  o.lspg_oversample = R.lspg_oversample;
  const auto t0 = std::chrono::steady_clock::now();
  auto res = std::make_unique<GreedyResult>(pod_greedy(*model_, cfg_.train, snaps, hyper, tg_, o));
  const double secs = seconds_since(t0);
  save_basis(dir + "/basis.rombase", res->basis);
  write_greedy_report_csv(dir + "/report.csv", res->report, cfg_.train);
  json extra = {{"r_tilde", res->basis.rank()},
                {"selected_indices", res->selected_indices},
                {"stopping_reason", res->report.stopping_reason}};
  greedy_ = std::move(res);
  finish("greedy", {"basis.rombase", "report.csv"}, {{"greedy_seconds", secs}}, extra);
}

const GreedyResult& Pipeline::greedy_result() {
  if (greedy_) return *greedy_;
  ensure("greedy");
  if (!greedy_) {
    auto res = std::make_unique<GreedyResult>();
    res->basis = load_basis(stage_dir("greedy") + "/basis.rombase");
    const json m = read_json(stage_dir("greedy") + "/manifest.json");
    res->selected_indices = m.at("extra").at("selected_indices").get<std::vector<Index>>();
    res->report.stopping_reason = m.at("extra").at("stopping_reason").get<std::string>();
    greedy_ = std::move(res);
  }
  return *greedy_;
}

Matrix Pipeline::rbm_basis() {
  const Matrix& V = greedy_result().basis.V;
  const Index r = cfg_.reduction.r_tilde;
  return r > 0 && r < V.cols() ? Matrix(V.leftCols(r)) : V;
}

Matrix Pipeline::latent_basis(Index r) {
  const BasisMode mode = cfg_.reduction.mode;
  if (mode == BasisMode::kPod || mode == BasisMode::kAllSnapshotsSvd)
    return build_model_basis(GreedyResult{}, cfg_.train, train_snapshots(), mode, r).V;
  return build_model_basis(greedy_result(), cfg_.train, train_snapshots(), mode, r).V;
}

// ------------------------------------------------------------- rom-simulate

void Pipeline::rom_simulate() {
  auto hyper = eim_data();
  const std::string dir = stage_dir("rom-simulate");
  fs::create_directories(dir);
  const auto& tests = test_snapshots();
  const RowBlock rows = report_rows(cfg_, *model_);
  const Index n = model_->dim();

  struct Rom {
    std::string name;
    Matrix V;
    std::function<ReducedTrajectory(const Param&)> sim;
  };
  std::vector<Rom> roms;
  auto add_grom = [&](const std::string& name, Matrix V) {
    auto g = std::make_shared<GRom>(*model_, V, hyper);
    roms.push_back({name, std::move(V), [g, this](const Param& mu) {
                      return g->simulate(mu, tg_, cfg_.fom.newton);
                    }});
  };
  add_grom("rbm_grom", rbm_basis());
  add_grom("grom", latent_basis(cfg_.reduction.r));
  if (cfg_.reduction.lspg_r > 0) {
    Matrix V = latent_basis(cfg_.reduction.lspg_r);
    auto l = std::make_shared<LspgRom>(*model_, V,
                                       lspg_sample_rows(*hyper, V, cfg_.reduction.lspg_oversample));
    roms.push_back({"lspg", std::move(V), [l, this](const Param& mu) {
                      return l->simulate(mu, tg_, cfg_.fom.newton);
                    }});
  }

  std::vector<std::string> arts;
  auto csv = open_out(dir + "/errors.csv");
  csv << "rom,r,mu_index," << mu_header(model_->param_dim()) << ",rel_error\n";
  json times = json::object();
  for (const auto& rom : roms) {
    json t = json::array();
    for (std::size_t k = 0; k < cfg_.test.size(); ++k) {
      const ReducedTrajectory z = rom.sim(cfg_.test[k]);
      const std::string name = indexed(rom.name + "_", k, ".romred");
      save_reduced(dir + "/" + name, z);
      arts.push_back(name);
      t.push_back(z.wall_time);
      const double e = relative_error(block_of(tests[k], rows, n),
                                      block_of(lift(rom.V, z.Z), rows, n));
      csv << rom.name << "," << rom.V.cols() << "," << k << "," << mu_cells(cfg_.test[k]) << ","
          << fmt(e) << "\n";
    }
    times[rom.name + "_seconds"] = t;
  }
  csv.close();
  arts.push_back("errors.csv");
  finish("rom-simulate", arts, times);
}

// ------------------------------------------------------------- train-hybrid

namespace {

void fill_grid(ErrorNetSpec& spec, const FomModel& model, const RowBlock& rows) {
  if (spec.kind == ErrorNetKind::kCnn1d) return;
  const GridInfo& g = model.grid();
  require(g.dimensionality == 2, "2D error nets need a 2D model");
  if (spec.height == 0) spec.height = g.points_per_axis[1];
  if (spec.width == 0) spec.width = g.points_per_axis[0];
  spec.channels = rows.resolve(model.dim()) / (spec.height * spec.width);
}

}  // namespace

void Pipeline::train_hybrid() {
  require(cfg_.hybrid.enabled, "train-hybrid: hybrid surrogate disabled in config");
  const auto& snaps = train_snapshots();
  auto hyper = eim_data();
  const std::string dir = stage_dir("train-hybrid");
  fs::create_directories(dir);
  const RowBlock rows = hybrid_rows(cfg_, *model_);

  auto t0 = std::chrono::steady_clock::now();
  const Matrix V = latent_basis(cfg_.reduction.r);
  GRom grom(*model_, V, hyper);
  const ErrorDataset data = build_hybrid_dataset(grom, cfg_.train, snaps, tg_, rows,
                                                 cfg_.hybrid.projection_latents);
  const double t_data = seconds_since(t0);

  ErrorNetSpec spec = cfg_.hybrid.net;
  fill_grid(spec, *model_, rows);
  nn::TrainConfig tc = cfg_.hybrid.train;
  tc.seed = cfg_.seed;
  nn::LossHistory hist;
  t0 = std::chrono::steady_clock::now();
  HybridSurrogate s = romlab::train_hybrid(model_, V, hyper, data, spec, tc, rows, &hist);
  const double t_nn = seconds_since(t0);

  save_hybrid_bundle(dir + "/bundle", s, {{"config", provenance_config(cfg_)}});
  nn::write_loss_csv(dir + "/loss.csv", hist);
  std::vector<std::string> arts = {"loss.csv"};
  for (const auto& e : fs::directory_iterator(dir + "/bundle"))
    arts.push_back("bundle/" + e.path().filename().string());
  std::sort(arts.begin(), arts.end());
  finish("train-hybrid", arts, {{"dataset_seconds", t_data}, {"nn_seconds", t_nn}},
         {{"parameters", s.net->parameter_count()}, {"samples", data.inputs.cols()}});
}

// ------------------------------------------------------- train-nonintrusive

void Pipeline::train_nonintrusive() {
  const auto& ni = cfg_.nonintrusive;
  require(ni.enabled, "train-nonintrusive: non-intrusive surrogate disabled in config");
  const auto& snaps = train_snapshots();
  const std::string dir = stage_dir("train-nonintrusive");
  fs::create_directories(dir);
  const RowBlock rows = nonintrusive_rows(cfg_, *model_);

  ErrorNetSpec spec = ni.decoder;
  fill_grid(spec, *model_, rows);
  Index r0 = 0;
  if (spec.kind == ErrorNetKind::kPodCnn2d) {
    r0 = ni.r0 > 0 ? ni.r0 : spec.r0;
    spec.r0 = r0;
  }
  auto t0 = std::chrono::steady_clock::now();
  const NonIntrusiveDatasets data = build_nonintrusive_datasets(cfg_.train, snaps, tg_, ni.r, r0, rows);
  const double t_pod = seconds_since(t0);

  nn::TrainConfig tc = ni.train;
  tc.seed = cfg_.seed;
  nn::LossHistory hist;
  t0 = std::chrono::steady_clock::now();
  NonIntrusiveSurrogate s = romlab::train_nonintrusive(data, spec, tc, ni.hidden, &hist);
  const double t_nn = seconds_since(t0);

  save_nonintrusive_bundle(dir + "/bundle", s, {{"config", provenance_config(cfg_)}});
  nn::write_loss_csv(dir + "/loss.csv", hist);
  std::vector<std::string> arts = {"loss.csv"};
  for (const auto& e : fs::directory_iterator(dir + "/bundle"))
    arts.push_back("bundle/" + e.path().filename().string());
  std::sort(arts.begin(), arts.end());
  finish("train-nonintrusive", arts, {{"pod_seconds", t_pod}, {"nn_seconds", t_nn}},
         {{"ffnn_parameters", s.ffnn->parameter_count()},
          {"decoder_parameters", s.decoder->parameter_count()}});
}

// ---------------------------------------------------------------- benchmark

void Pipeline::benchmark() {
  auto hyper = eim_data();
  const std::string dir = stage_dir("benchmark");
  fs::create_directories(dir + "/figures");
  const RowBlock rows = report_rows(cfg_, *model_);
  const Index n = model_->dim();
  const int reps = cfg_.timing_repeats;
  const auto& NO = cfg_.fom.newton;

  struct Method {
    std::string name, slug;
    Index size = 0;
    std::function<Matrix(const Param&)> predict;  // full state or block rows
    double t_greedy = 0, t_eim = 0, t_pod = 0, t_nn = 0;
  };
  std::vector<Method> methods;

  const json t_eim = read_timings(stage_dir("eim"));
  const double eim_s = timing_value(t_eim, "eim_seconds");
  const Matrix Vr = rbm_basis();
  const double greedy_s = timing_value(read_timings(stage_dir("greedy")), "greedy_seconds");
  {
    auto g = std::make_shared<GRom>(*model_, Vr, hyper);
    methods.push_back({"RBM G-ROM", "rbm_grom", Vr.cols(),
                       [g, this, NO](const Param& mu) {
                         return lift(g->basis(), g->simulate(mu, tg_, NO).Z);
                       },
                       greedy_s, eim_s, 0, 0});
  }
  {
    const Matrix V = latent_basis(cfg_.reduction.r);
    auto g = std::make_shared<GRom>(*model_, V, hyper);
    methods.push_back({"G-ROM", "grom", V.cols(),
                       [g, this, NO](const Param& mu) {
                         return lift(g->basis(), g->simulate(mu, tg_, NO).Z);
                       },
                       greedy_s, eim_s, 0, 0});
  }
  if (cfg_.reduction.lspg_r > 0) {
    const Matrix V = latent_basis(cfg_.reduction.lspg_r);
    auto l = std::make_shared<LspgRom>(*model_, V,
                                       lspg_sample_rows(*hyper, V, cfg_.reduction.lspg_oversample));
    methods.push_back({"LSPG-ROM", "lspg", V.cols(),
                       [l, this, NO](const Param& mu) {
                         return lift(l->basis(), l->simulate(mu, tg_, NO).Z);
                       },
                       greedy_s, eim_s, 0, 0});
  }
  if (cfg_.hybrid.enabled) {
    ensure("train-hybrid");
    auto s = std::make_shared<HybridSurrogate>(
        load_hybrid_bundle(stage_dir("train-hybrid") + "/bundle", model_));
    const json t = read_timings(stage_dir("train-hybrid"));
    methods.push_back({"G-ROM+" + std::string(to_string(s->spec.kind)), "hybrid", s->V().cols(),
                       [s, this, NO](const Param& mu) { return hybrid_predict(*s, mu, tg_, NO).U; },
                       greedy_s, eim_s, 0,
                       timing_value(t, "dataset_seconds") + timing_value(t, "nn_seconds")});
  }
  if (cfg_.nonintrusive.enabled) {
    ensure("train-nonintrusive");
    auto s = std::make_shared<NonIntrusiveSurrogate>(
        load_nonintrusive_bundle(stage_dir("train-nonintrusive") + "/bundle"));
    const json t = read_timings(stage_dir("train-nonintrusive"));
    methods.push_back({"POD-FFNN-e-decoder", "nonintrusive", s->V.cols(),
                       [s, this](const Param& mu) { return nonintrusive_predict(*s, mu, tg_).U; },
                       0, 0, timing_value(t, "pod_seconds"), timing_value(t, "nn_seconds")});
  }

  // Figure selection: requested parameters that are in the test set.
  std::vector<std::size_t> fig_idx;
  for (std::size_t k = 0; k < cfg_.test.size(); ++k) {
    bool take = cfg_.figures.mus.empty();
    for (const auto& m : cfg_.figures.mus)
      if (m.size() == cfg_.test[k].size() &&
          std::equal(m.begin(), m.end(), cfg_.test[k].begin(),
                     [](double a, double b) { return std::abs(a - b) < 1e-12; }))
        take = true;
    if (take) fig_idx.push_back(k);
  }

  const std::size_t nt = cfg_.test.size();
  std::vector<double> fom_time(nt);
  std::vector<std::vector<double>> err(methods.size(), std::vector<double>(nt));
  std::vector<std::vector<double>> ptime(methods.size(), std::vector<double>(nt));
  std::vector<std::string> arts;
  for (std::size_t k = 0; k < nt; ++k) {
    const Param& mu = cfg_.test[k];
    SnapshotTrajectory ref;
    fom_time[k] = measure_timing([&] { return simulate_fom(*model_, mu, tg_, NO); }, reps, &ref);
    const Matrix Uref = block_of(ref.states, rows, n);
    const bool fig = std::find(fig_idx.begin(), fig_idx.end(), k) != fig_idx.end();
    for (std::size_t m = 0; m < methods.size(); ++m) {
      Matrix U;
      ptime[m][k] = measure_timing([&] { return methods[m].predict(mu); }, reps, &U);
      const Matrix Ub = block_of(U, rows, n);
      err[m][k] = relative_error(Uref, Ub);
      if (fig) {
        const std::string name = indexed("figures/" + methods[m].slug + "_mu", k, ".csv");
        write_figure_csv(dir + "/" + name, *model_, tg_, Uref, Ub, cfg_.figures.times,
                         cfg_.figures.y_index);
        arts.push_back(name);
      }
    }
  }

  // errors.csv: deterministic; report.csv: the table with timings.
  {
    auto csv = open_out(dir + "/errors.csv");
    csv << "method,size,mu_index," << mu_header(model_->param_dim()) << ",rel_error\n";
    for (std::size_t m = 0; m < methods.size(); ++m) {
      for (std::size_t k = 0; k < nt; ++k)
        csv << methods[m].name << "," << methods[m].size << "," << k << ","
            << mu_cells(cfg_.test[k]) << "," << fmt(err[m][k]) << "\n";
    }
  }
  arts.push_back("errors.csv");
  {
    auto csv = open_out(dir + "/report.csv");
    csv << "method,size";
    for (std::size_t k = 0; k < nt; ++k) csv << ",err_mu" << k;
    csv << ",eps_max,t_greedy_s,t_eim_s,t_pod_s,t_nn_s,predict_s,fom_s,speedup\n";
    double fom_mean = 0;
    for (double t : fom_time) fom_mean += t / static_cast<double>(nt);
    csv << "FOM," << n;
    for (std::size_t k = 0; k < nt; ++k) csv << ",0";
    csv << ",0,0,0,0,0," << fmt(fom_mean) << "," << fmt(fom_mean) << ",1\n";
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto& M = methods[m];
      double pm = 0;
      for (double t : ptime[m]) pm += t / static_cast<double>(nt);
      csv << M.name << "," << M.size;
      for (double e : err[m]) csv << "," << fmt(e);
      csv << "," << fmt(max_relative_error(err[m])) << "," << fmt(M.t_greedy) << ","
          << fmt(M.t_eim) << "," << fmt(M.t_pod) << "," << fmt(M.t_nn) << "," << fmt(pm) << ","
          << fmt(fom_mean) << "," << fmt(fom_mean / pm) << "\n";
    }
  }
  json times = {{"fom_seconds", fom_time}};
  for (std::size_t m = 0; m < methods.size(); ++m) times[methods[m].slug + "_seconds"] = ptime[m];
  std::sort(arts.begin(), arts.end());
  finish("benchmark", arts, times, {{"timing_files", {"report.csv", "timings.json"}}});
}

// ---------------------------------------------------------------- figures

void write_figure_csv(const std::string& path, const FomModel& model, const TimeGrid& tg,
                      const Matrix& U_fom, const Matrix& U_sur, const std::vector<double>& times,
                      Index y_index) {
  require_dims(U_fom.rows() == U_sur.rows() && U_fom.cols() == U_sur.cols(),
               "write_figure_csv: FOM and surrogate shapes differ");
  const GridInfo& g = model.grid();
  std::vector<Index> rows;
  std::vector<double> xs;
  if (g.dimensionality == 1) {
    for (Index i = 0; i < g.points_per_axis[0]; ++i) {
      rows.push_back(i);
      xs.push_back(static_cast<double>(i) * g.spacing[0]);
    }
  } else {
    const Index m = g.points_per_axis[0];
    const Index y = y_index < 0 ? m / 2 : y_index;
    if (y >= g.points_per_axis[1])
      throw InvalidArgument("write_figure_csv: y index " + std::to_string(y) + " out of range");
    for (Index i = 0; i < m; ++i) {
      rows.push_back(y * m + i);
      xs.push_back(static_cast<double>(i + 1) * g.spacing[0]);
    }
  }
  require_dims(U_fom.rows() > rows.back(), "write_figure_csv: state too short for the slice");
  std::vector<Index> cols;
  for (double t : times) {
    const double s = t / tg.dt();
    const auto i = static_cast<Index>(std::llround(s));
    if (t < 0 || std::abs(s - static_cast<double>(i)) > 1e-6 || i >= U_fom.cols())
      throw InvalidArgument("write_figure_csv: time " + fmt(t) + " is not a stored time instance");
    cols.push_back(i);
  }
  auto out = open_out(path);
  out << "t,x,u_fom,u_surrogate\n";
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t k = 0; k < rows.size(); ++k)
      out << fmt(tg.time(cols[c])) << "," << fmt(xs[k]) << "," << fmt(U_fom(rows[k], cols[c]))
          << "," << fmt(U_sur(rows[k], cols[c])) << "\n";
  if (!out) throw IoError("write failed for " + path);
}

// ---------------------------------------------------------------- predict

void predict_to_file(const std::string& bundle_dir, const Param& mu, const std::string& out_path) {
  const json m = read_json(bundle_dir + "/manifest.json");
  const ExperimentConfig cfg = parse_config(m.at("provenance").at("config"));
  const TimeGrid tg = cfg.time_grid();
  const std::string format = m.at("format").get<std::string>();
  std::shared_ptr<FomModel> model = build_model(cfg);
  model->check_param(mu);
  if (format == "romlab-hybrid-1") {
    HybridSurrogate s = load_hybrid_bundle(bundle_dir, model);
    save_trajectory(out_path, hybrid_predict(s, mu, tg, cfg.fom.newton).U, mu);
  } else if (format == "romlab-nonintrusive-1") {
    NonIntrusiveSurrogate s = load_nonintrusive_bundle(bundle_dir);
    save_trajectory(out_path, nonintrusive_predict(s, mu, tg).U, mu);
  } else {
    throw IoError(bundle_dir + ": unknown bundle format '" + format + "'");
  }
}

// ----------------------------------------------------------------- report

std::string merge_reports(const std::string& runs_dir) {
  require(fs::is_directory(runs_dir), "report: " + runs_dir + " is not a directory");
  std::vector<fs::path> manifests;
  for (const auto& e : fs::recursive_directory_iterator(runs_dir))
    if (e.is_regular_file() && e.path().filename() == "manifest.json") manifests.push_back(e.path());
  std::sort(manifests.begin(), manifests.end());

  const std::string path = (fs::path(runs_dir) / "summary.csv").string();
  auto out = open_out(path);
  out << "run,stage,config_hash,seed,artifacts,artifact_digest,method,mu_index,rel_error\n";
  for (const auto& p : manifests) {
    const json m = read_json(p.string());
    if (!m.contains("stage")) continue;  // bundle manifests
    const fs::path stage_dir = p.parent_path();
    const std::string run = fs::relative(stage_dir.parent_path(), runs_dir).generic_string();
    std::string digest_src;
    for (const auto& [k, v] : m.at("artifacts").items()) digest_src += k + "=" + v.get<std::string>() + ";";
    const std::string prefix = run + "," + m.at("stage").get<std::string>() + "," +
                               m.at("config_hash").get<std::string>() + "," +
                               std::to_string(m.at("seed").get<std::uint64_t>()) + "," +
                               std::to_string(m.at("artifacts").size()) + "," +
                               hex64(fnv1a(digest_src.data(), digest_src.size()));
    out << prefix << ",,,\n";
    const fs::path errs = stage_dir / "errors.csv";
    if (m.at("stage") == "benchmark" && fs::exists(errs)) {
      std::ifstream in(errs);
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (cells.size() < 4) continue;
        out << prefix << "," << cells[0] << "," << cells[2] << "," << cells.back() << "\n";
      }
    }
  }
  if (!out) throw IoError("write failed for " + path);
  return path;
}

}  // namespace romlab
