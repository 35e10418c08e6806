#include "romlab/romlab.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace {

const char* kTiny = R"({
  "name": "capi", "seed": 1, "deterministic": true,
  "fom": {"benchmark": "burgers1d", "elements": 30, "T": 0.5, "n_t": 10},
  "train": [0.9, 1.1], "test": [1.0]
})";

std::string scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("romlab_capi_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

TEST(CApi, VersionAndStatusStrings) {
  EXPECT_GT(std::strlen(romlab_version()), 0u);
  EXPECT_STREQ(romlab_status_string(ROMLAB_OK), "ok");
  EXPECT_GT(std::strlen(romlab_status_string(ROMLAB_IO)), 0u);
}

TEST(CApi, ErrorsMapToCodesAndMessages) {
  romlab_config* cfg = nullptr;
  std::string bad = kTiny;
  bad.insert(1, "\"nonsense_key\": 1,");
  EXPECT_EQ(romlab_config_parse(bad.c_str(), &cfg), ROMLAB_INVALID_ARGUMENT);
  EXPECT_EQ(cfg, nullptr);
  EXPECT_NE(std::string(romlab_last_error()).find("nonsense_key"), std::string::npos);
  EXPECT_EQ(romlab_config_load("/nonexistent/dir/cfg.json", &cfg), ROMLAB_IO);
  EXPECT_EQ(romlab_config_parse(nullptr, &cfg), ROMLAB_INVALID_ARGUMENT);
  EXPECT_EQ(romlab_config_parse(kTiny, nullptr), ROMLAB_INVALID_ARGUMENT);
  ASSERT_EQ(romlab_config_parse(kTiny, &cfg), ROMLAB_OK);
  EXPECT_STREQ(romlab_last_error(), "");
  EXPECT_EQ(romlab_run_stage(cfg, "no-such-stage"), ROMLAB_INVALID_ARGUMENT);
  romlab_config_free(cfg);
  romlab_config_free(nullptr);
}

TEST(CApi, ConfigSettersAndHash) {
  romlab_config* cfg = nullptr;
  ASSERT_EQ(romlab_config_parse(kTiny, &cfg), ROMLAB_OK);
  char h1[17], h2[17], out[256];
  ASSERT_EQ(romlab_config_hash(cfg, h1, sizeof h1), ROMLAB_OK);
  EXPECT_EQ(std::strlen(h1), 16u);
  ASSERT_EQ(romlab_config_set_output(cfg, "/tmp/elsewhere"), ROMLAB_OK);
  ASSERT_EQ(romlab_config_set_threads(cfg, 3), ROMLAB_OK);
  ASSERT_EQ(romlab_config_hash(cfg, h2, sizeof h2), ROMLAB_OK);
  EXPECT_STREQ(h1, h2);
  ASSERT_EQ(romlab_config_output(cfg, out, sizeof out), ROMLAB_OK);
  EXPECT_STREQ(out, "/tmp/elsewhere");
  char tiny_buf[4];
  EXPECT_EQ(romlab_config_output(cfg, tiny_buf, sizeof tiny_buf), ROMLAB_INVALID_ARGUMENT);
  ASSERT_EQ(romlab_config_set_seed(cfg, 77), ROMLAB_OK);
  ASSERT_EQ(romlab_config_hash(cfg, h2, sizeof h2), ROMLAB_OK);
  EXPECT_STRNE(h1, h2);
  romlab_config_free(cfg);
}

TEST(CApi, FomSimulateAndTrajectoryRoundTrip) {
  romlab_config* cfg = nullptr;
  ASSERT_EQ(romlab_config_parse(kTiny, &cfg), ROMLAB_OK);
  romlab_model* model = nullptr;
  ASSERT_EQ(romlab_model_create(cfg, &model), ROMLAB_OK);
  size_t n = 0, p = 0;
  romlab_model_dim(model, &n);
  romlab_model_param_dim(model, &p);
  EXPECT_EQ(n, 30u);
  EXPECT_EQ(p, 1u);

  const double mu = 1.0;
  romlab_trajectory* traj = nullptr;
  ASSERT_EQ(romlab_fom_simulate(model, &mu, 1, &traj), ROMLAB_OK);
  size_t rows = 0, cols = 0;
  romlab_trajectory_shape(traj, &rows, &cols);
  EXPECT_EQ(rows, 30u);
  EXPECT_EQ(cols, 10u);
  const double two[2] = {1.0, 2.0};
  romlab_trajectory* bad = nullptr;
  EXPECT_EQ(romlab_fom_simulate(model, two, 2, &bad), ROMLAB_DIMENSION_MISMATCH);

  const auto path = scratch("traj") + "/t.romsnap";
  ASSERT_EQ(romlab_trajectory_save(traj, path.c_str()), ROMLAB_OK);
  romlab_trajectory* back = nullptr;
  ASSERT_EQ(romlab_trajectory_load(path.c_str(), &back), ROMLAB_OK);
  const double *a = nullptr, *b = nullptr;
  romlab_trajectory_data(traj, &a);
  romlab_trajectory_data(back, &b);
  EXPECT_EQ(std::memcmp(a, b, rows * cols * sizeof(double)), 0);
  double err = -1;
  ASSERT_EQ(romlab_relative_error(a, b, rows, cols, &err), ROMLAB_OK);
  EXPECT_EQ(err, 0.0);

  romlab_trajectory_free(back);
  romlab_trajectory_free(traj);
  romlab_model_free(model);
  romlab_config_free(cfg);
}

TEST(CApi, PodBasisAndEim) {
  const size_t rows = 12, cols = 5;
  std::vector<double> X(rows * cols);
  for (size_t j = 0; j < cols; ++j)
    for (size_t i = 0; i < rows; ++i) X[j * rows + i] = std::sin(0.3 * (i + 1) * (j + 1));
  romlab_basis* basis = nullptr;
  ASSERT_EQ(romlab_pod_basis(X.data(), rows, cols, 3, 0.0, &basis), ROMLAB_OK);
  size_t r = 0, c = 0;
  romlab_basis_shape(basis, &r, &c);
  EXPECT_EQ(r, rows);
  EXPECT_EQ(c, 3u);
  const double* sv = nullptr;
  size_t len = 0;
  romlab_basis_singular_values(basis, &sv, &len);
  ASSERT_GE(len, 3u);
  EXPECT_GE(sv[0], sv[1]);
  const double* V = nullptr;
  romlab_basis_data(basis, &V);
  double dot = 0, nrm = 0;
  for (size_t i = 0; i < rows; ++i) {
    dot += V[i] * V[rows + i];
    nrm += V[i] * V[i];
  }
  EXPECT_NEAR(dot, 0.0, 1e-12);
  EXPECT_NEAR(nrm, 1.0, 1e-12);
  romlab_basis_free(basis);

  romlab_eim* eim = nullptr;
  ASSERT_EQ(romlab_eim_build(X.data(), rows, cols, 1e-10, 0, &eim), ROMLAB_OK);
  size_t m = 0;
  romlab_eim_size(eim, &m);
  EXPECT_GE(m, 1u);
  EXPECT_LE(m, cols);
  std::vector<size_t> idx(m);
  ASSERT_EQ(romlab_eim_indices(eim, idx.data(), idx.size()), ROMLAB_OK);
  std::vector<double> out(rows);
  ASSERT_EQ(romlab_eim_interpolate(eim, X.data() + rows, rows, out.data()), ROMLAB_OK);
  for (size_t k : idx) EXPECT_NEAR(out[k], X[rows + k], 1e-12);
  EXPECT_EQ(romlab_eim_interpolate(eim, X.data(), rows - 1, out.data()), ROMLAB_DIMENSION_MISMATCH);
  romlab_eim_free(eim);

  EXPECT_EQ(romlab_pod_basis(X.data(), rows, cols, 99, 0.0, &basis), ROMLAB_INVALID_ARGUMENT);
}

}  // namespace
