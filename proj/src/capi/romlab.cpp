#include "romlab/romlab.h"

#include "common/error.hpp"
#include "fom/trajectory_io.hpp"
#include "harness/config.hpp"
#include "harness/pipeline.hpp"
#include "reduction/eim.hpp"
#include "reduction/pod.hpp"
#include "surrogates/bundle.hpp"
#include "surrogates/metrics.hpp"

#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

using namespace romlab;

struct romlab_config {
  ExperimentConfig cfg;
};
struct romlab_model {
  std::shared_ptr<FomModel> model;
  TimeGrid tg;
  NewtonOptions newton;
};
struct romlab_trajectory {
  Matrix states;
  Param mu;
};
struct romlab_basis {
  ReducedBasis basis;
};
struct romlab_eim {
  EimData eim;
};
struct romlab_surrogate {
  std::shared_ptr<FomModel> model;
  TimeGrid tg;
  NewtonOptions newton;
  std::optional<HybridSurrogate> hybrid;
  std::optional<NonIntrusiveSurrogate> nonintrusive;
};

namespace {

thread_local std::string g_last_error;

romlab_status fail(romlab_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
romlab_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ROMLAB_OK;
  } catch (const Error& e) {
    return fail(static_cast<romlab_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ROMLAB_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ROMLAB_INTERNAL, e.what());
  } catch (...) {
    return fail(ROMLAB_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  if (!p) throw InvalidArgument(std::string(what) + " is NULL");
}

void copy_out(const std::string& s, char* buf, std::size_t len) {
  need(buf, "buf");
  if (s.size() + 1 > len)
    throw InvalidArgument("buffer too small (" + std::to_string(s.size() + 1) + " bytes needed)");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

Param to_param(const double* mu, std::size_t p) {
  need(mu, "mu");
  return Param(mu, mu + p);
}

Matrix to_matrix(const double* X, std::size_t rows, std::size_t cols) {
  need(X, "matrix data");
  if (rows == 0 || cols == 0) throw InvalidArgument("empty matrix");
  return Eigen::Map<const Matrix>(X, static_cast<Index>(rows), static_cast<Index>(cols));
}

}  // namespace

extern "C" {

const char* romlab_version(void) { return "1.0.0"; }

const char* romlab_last_error(void) { return g_last_error.c_str(); }

const char* romlab_status_string(romlab_status s) {
  switch (s) {
    case ROMLAB_OK: return "ok";
    case ROMLAB_INVALID_ARGUMENT: return "invalid argument";
    case ROMLAB_DIMENSION_MISMATCH: return "dimension mismatch";
    case ROMLAB_NON_CONVERGENCE: return "non-convergence";
    case ROMLAB_SINGULAR_MATRIX: return "singular matrix";
    case ROMLAB_IO: return "i/o error";
    case ROMLAB_NUMERIC: return "numeric error";
    case ROMLAB_INTERNAL: return "internal error";
  }
  return "unknown status";
}

romlab_status romlab_config_load(const char* path, romlab_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new romlab_config{load_config(path)};
  });
}

romlab_status romlab_config_parse(const char* json_text, romlab_config** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("config: ") + e.what());
    }
    *out = new romlab_config{parse_config(j)};
  });
}

void romlab_config_free(romlab_config* cfg) { delete cfg; }

romlab_status romlab_config_set_output(romlab_config* cfg, const char* dir) {
  return guarded([&] {
    need(cfg, "cfg");
    need(dir, "dir");
    if (!*dir) throw InvalidArgument("empty output directory");
    cfg->cfg.output = dir;
  });
}

romlab_status romlab_config_set_seed(romlab_config* cfg, uint64_t seed) {
  return guarded([&] {
    need(cfg, "cfg");
    cfg->cfg.seed = seed;
  });
}

romlab_status romlab_config_set_threads(romlab_config* cfg, int threads) {
  return guarded([&] {
    need(cfg, "cfg");
    if (threads < 1) throw InvalidArgument("threads must be >= 1");
    cfg->cfg.threads = threads;
  });
}

romlab_status romlab_config_set_deterministic(romlab_config* cfg, int on) {
  return guarded([&] {
    need(cfg, "cfg");
    cfg->cfg.deterministic = on != 0;
  });
}

romlab_status romlab_config_output(const romlab_config* cfg, char* buf, size_t len) {
  return guarded([&] {
    need(cfg, "cfg");
    copy_out(cfg->cfg.output, buf, len);
  });
}

romlab_status romlab_config_hash(const romlab_config* cfg, char* buf, size_t len) {
  return guarded([&] {
    need(cfg, "cfg");
    copy_out(config_hash(cfg->cfg), buf, len);
  });
}

romlab_status romlab_run_stage(const romlab_config* cfg, const char* stage) {
  return guarded([&] {
    need(cfg, "cfg");
    need(stage, "stage");
    Pipeline(cfg->cfg).run(stage);
  });
}

romlab_status romlab_predict(const char* bundle_dir, const double* mu, size_t p,
                             const char* out_path) {
  return guarded([&] {
    need(bundle_dir, "bundle_dir");
    need(out_path, "out_path");
    predict_to_file(bundle_dir, to_param(mu, p), out_path);
  });
}

romlab_status romlab_report(const char* runs_dir, char* buf, size_t len) {
  return guarded([&] {
    need(runs_dir, "runs_dir");
    const std::string path = merge_reports(runs_dir);
    if (buf) copy_out(path, buf, len);
  });
}

romlab_status romlab_model_create(const romlab_config* cfg, romlab_model** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new romlab_model{build_model(cfg->cfg), cfg->cfg.time_grid(), cfg->cfg.fom.newton};
  });
}

void romlab_model_free(romlab_model* model) { delete model; }

romlab_status romlab_model_dim(const romlab_model* model, size_t* n) {
  return guarded([&] {
    need(model, "model");
    need(n, "n");
    *n = static_cast<size_t>(model->model->dim());
  });
}

romlab_status romlab_model_param_dim(const romlab_model* model, size_t* p) {
  return guarded([&] {
    need(model, "model");
    need(p, "p");
    *p = static_cast<size_t>(model->model->param_dim());
  });
}

romlab_status romlab_fom_simulate(const romlab_model* model, const double* mu, size_t p,
                                  romlab_trajectory** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    const Param m = to_param(mu, p);
    if (static_cast<Index>(p) != model->model->param_dim())
      throw DimensionMismatch("expected " + std::to_string(model->model->param_dim()) +
                              " parameters, got " + std::to_string(p));
    SnapshotTrajectory t = simulate_fom(*model->model, m, model->tg, model->newton);
    *out = new romlab_trajectory{std::move(t.states), m};
  });
}

romlab_status romlab_trajectory_load(const char* path, romlab_trajectory** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    LoadedTrajectory t = load_trajectory(path);
    *out = new romlab_trajectory{std::move(t.states), std::move(t.mu)};
  });
}

romlab_status romlab_trajectory_save(const romlab_trajectory* traj, const char* path) {
  return guarded([&] {
    need(traj, "traj");
    need(path, "path");
    save_trajectory(path, traj->states, traj->mu);
  });
}

romlab_status romlab_trajectory_shape(const romlab_trajectory* traj, size_t* rows, size_t* cols) {
  return guarded([&] {
    need(traj, "traj");
    if (rows) *rows = static_cast<size_t>(traj->states.rows());
    if (cols) *cols = static_cast<size_t>(traj->states.cols());
  });
}

romlab_status romlab_trajectory_data(const romlab_trajectory* traj, const double** data) {
  return guarded([&] {
    need(traj, "traj");
    need(data, "data");
    *data = traj->states.data();
  });
}

void romlab_trajectory_free(romlab_trajectory* traj) { delete traj; }

romlab_status romlab_pod_basis(const double* X, size_t rows, size_t cols, size_t rank, double tol,
                               romlab_basis** out) {
  return guarded([&] {
    need(out, "out");
    const Matrix M = to_matrix(X, rows, cols);
    const Truncation t = rank > 0 ? Truncation::fixed(static_cast<Index>(rank))
                                  : Truncation::tolerance(tol);
    *out = new romlab_basis{pod_basis(M, t)};
  });
}

romlab_status romlab_basis_load(const char* path, romlab_basis** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new romlab_basis{load_basis(path)};
  });
}

romlab_status romlab_basis_save(const romlab_basis* basis, const char* path) {
  return guarded([&] {
    need(basis, "basis");
    need(path, "path");
    save_basis(path, basis->basis);
  });
}

romlab_status romlab_basis_shape(const romlab_basis* basis, size_t* rows, size_t* cols) {
  return guarded([&] {
    need(basis, "basis");
    if (rows) *rows = static_cast<size_t>(basis->basis.V.rows());
    if (cols) *cols = static_cast<size_t>(basis->basis.V.cols());
  });
}

romlab_status romlab_basis_data(const romlab_basis* basis, const double** data) {
  return guarded([&] {
    need(basis, "basis");
    need(data, "data");
    *data = basis->basis.V.data();
  });
}

romlab_status romlab_basis_singular_values(const romlab_basis* basis, const double** data,
                                           size_t* len) {
  return guarded([&] {
    need(basis, "basis");
    need(data, "data");
    need(len, "len");
    *data = basis->basis.singular_values.data();
    *len = static_cast<size_t>(basis->basis.singular_values.size());
  });
}

void romlab_basis_free(romlab_basis* basis) { delete basis; }

romlab_status romlab_eim_build(const double* F, size_t rows, size_t cols, double tol,
                               size_t max_size, romlab_eim** out) {
  return guarded([&] {
    need(out, "out");
    EimOptions o;
    o.tol = tol;
    o.max_size = max_size > 0 ? static_cast<Index>(max_size) : -1;
    *out = new romlab_eim{eim_build(to_matrix(F, rows, cols), o)};
  });
}

romlab_status romlab_eim_size(const romlab_eim* eim, size_t* m) {
  return guarded([&] {
    need(eim, "eim");
    need(m, "m");
    *m = static_cast<size_t>(eim->eim.size());
  });
}

romlab_status romlab_eim_indices(const romlab_eim* eim, size_t* out, size_t len) {
  return guarded([&] {
    need(eim, "eim");
    need(out, "out");
    if (len < eim->eim.indices.size()) throw InvalidArgument("index buffer too small");
    for (std::size_t k = 0; k < eim->eim.indices.size(); ++k)
      out[k] = static_cast<size_t>(eim->eim.indices[k]);
  });
}

romlab_status romlab_eim_interpolate(const romlab_eim* eim, const double* f, size_t n,
                                     double* out) {
  return guarded([&] {
    need(eim, "eim");
    need(out, "out");
    if (static_cast<Index>(n) != eim->eim.dim())
      throw DimensionMismatch("eim_interpolate: vector length " + std::to_string(n) +
                              " != " + std::to_string(eim->eim.dim()));
    const Vector v = eim_interpolate(eim->eim, to_matrix(f, n, 1).col(0));
    std::memcpy(out, v.data(), n * sizeof(double));
  });
}

void romlab_eim_free(romlab_eim* eim) { delete eim; }

romlab_status romlab_surrogate_load(const char* bundle_dir, romlab_surrogate** out) {
  return guarded([&] {
    need(bundle_dir, "bundle_dir");
    need(out, "out");
    const std::string dir = bundle_dir;
    const nlohmann::json m = read_json(dir + "/manifest.json");
    const ExperimentConfig cfg = parse_config(m.at("provenance").at("config"));
    auto s = std::make_unique<romlab_surrogate>();
    s->model = build_model(cfg);
    s->tg = cfg.time_grid();
    s->newton = cfg.fom.newton;
    const std::string format = m.at("format").get<std::string>();
    if (format == "romlab-hybrid-1") {
      s->hybrid.emplace(load_hybrid_bundle(dir, s->model));
    } else if (format == "romlab-nonintrusive-1") {
      s->nonintrusive.emplace(load_nonintrusive_bundle(dir));
    } else {
      throw IoError(dir + ": unknown bundle format '" + format + "'");
    }
    *out = s.release();
  });
}

romlab_status romlab_surrogate_predict(const romlab_surrogate* s, const double* mu, size_t p,
                                       romlab_trajectory** out) {
  return guarded([&] {
    need(s, "surrogate");
    need(out, "out");
    const Param m = to_param(mu, p);
    s->model->check_param(m);
    Matrix U = s->hybrid ? hybrid_predict(*s->hybrid, m, s->tg, s->newton).U
                         : nonintrusive_predict(*s->nonintrusive, m, s->tg).U;
    *out = new romlab_trajectory{std::move(U), m};
  });
}

void romlab_surrogate_free(romlab_surrogate* s) { delete s; }

romlab_status romlab_relative_error(const double* ref, const double* pred, size_t rows,
                                    size_t cols, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = relative_error(to_matrix(ref, rows, cols), to_matrix(pred, rows, cols));
  });
}

}  // extern "C"
