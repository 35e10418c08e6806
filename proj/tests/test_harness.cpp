#include "harness/config.hpp"
#include "harness/pipeline.hpp"
#include "harness/timing.hpp"
#include "fom/trajectory_io.hpp"
#include "surrogates/bundle.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

namespace romlab {
namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json tiny(const std::string& out) {
  json j = json::parse(R"({
    "name": "tiny", "seed": 2, "deterministic": true,
    "fom": {"benchmark": "burgers1d", "elements": 40, "T": 0.5, "n_t": 20},
    "train": [0.9, 1.0, 1.1], "test": [0.95],
    "reduction": {"tol_rb": 0.05, "tol_eim": 1e-6, "r_max": 20, "r": 3},
    "hybrid": {"net": {"kind": "1dcnnresi", "cnn1d": {"c0": 3, "l0": 4, "channels": [2, 2, 2, 2]}},
               "train": {"epochs": 2, "batch_size": 16}},
    "nonintrusive": {"r": 3, "hidden": [8],
                     "decoder": {"kind": "1dcnnresi", "cnn1d": {"c0": 3, "l0": 4, "channels": [2, 2, 2, 2]}},
                     "train": {"epochs": 2, "batch_size": 16}},
    "figures": {"times": [0.0, 0.25]}
  })");
  j["output"] = out;
  return j;
}

TEST(Config, ShippedConfigsParseAndRoundTrip) {
  for (const char* name : {"burgers1d", "smoke1d", "burgers2d_small"}) {
    const auto cfg = load_config(std::string(ROMLAB_CONFIG_DIR) + "/" + name + ".json");
    const json canon = config_to_json(cfg);
    EXPECT_EQ(config_to_json(parse_config(canon)), canon) << name;
    EXPECT_FALSE(cfg.test.empty()) << name;
  }
}

TEST(Config, BenchmarkTestSets) {
  const auto c1 = load_config(std::string(ROMLAB_CONFIG_DIR) + "/burgers1d.json");
  EXPECT_EQ(c1.test, (std::vector<Param>{{0.92}, {0.98}, {1.02}, {1.08}}));
  EXPECT_EQ(c1.fom.elements, 1000);
  EXPECT_EQ(c1.fom.steps, 500);
  const auto c2 = load_config(std::string(ROMLAB_CONFIG_DIR) + "/burgers2d_small.json");
  EXPECT_EQ(c2.test, (std::vector<Param>{{5.19, 0.026}, {4.75, 0.02}, {4.56, 0.019}}));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  json j = tiny("x");
  j["reduction"]["tol_rbb"] = 1.0;
  EXPECT_THROW(parse_config(j), InvalidArgument);
  j = tiny("x");
  j["bogus"] = 1;
  EXPECT_THROW(parse_config(j), InvalidArgument);
  j = tiny("x");
  j["fom"]["benchmark"] = "heat";
  EXPECT_THROW(parse_config(j), InvalidArgument);
  j = tiny("x");
  j["fom"]["ic_formula"] = "other";
  EXPECT_THROW(parse_config(j), InvalidArgument);
}

TEST(Config, HashIgnoresOutputAndThreads) {
  auto a = parse_config(tiny("a"));
  auto b = parse_config(tiny("b"));
  b.threads = 4;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 99;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(fom_hash(a), fom_hash(b));
  EXPECT_EQ(hex64(0x1234).size(), 16u);
}

TEST(Timing, NoOpIsBelowOneMillisecond) {
  EXPECT_LT(measure_timing([] {}), 1e-3);
  int calls = 0;
  measure_timing([&] { ++calls; }, 3);
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0}), 2.5);
}

TEST(Figure, HeaderOnlyAndSliceChecks) {
  TimeGrid tg(0.5, 10);
  Burgers1dConfig c;
  c.elements = 20;
  auto model = build_burgers1d(c, tg);
  const Matrix U = simulate_fom(*model, Param{1.0}, tg).states;
  const auto dir = test::scratch_dir("figure");
  write_figure_csv(dir + "/empty.csv", *model, tg, U, U, {});
  std::ifstream in(dir + "/empty.csv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 1);

  write_figure_csv(dir + "/two.csv", *model, tg, U, U, {0.0, 0.2});
  std::ifstream in2(dir + "/two.csv");
  lines = 0;
  while (std::getline(in2, line)) ++lines;
  EXPECT_EQ(lines, 1 + 2 * model->dim());

  EXPECT_THROW(write_figure_csv(dir + "/bad.csv", *model, tg, U, U, {0.5}), InvalidArgument);
  EXPECT_THROW(write_figure_csv(dir + "/bad.csv", *model, tg, U, U, {0.07}), InvalidArgument);
}

TEST(Figure, TwoDimensionalRowOutOfRange) {
  TimeGrid tg(1.0, 4);
  Burgers2dConfig c;
  c.elements = 7;
  auto model = build_burgers2d(c, tg);
  const Matrix U = Matrix::Zero(model->dim(), tg.size());
  const auto dir = test::scratch_dir("figure2d");
  write_figure_csv(dir + "/ok.csv", *model, tg, U, U, {0.0}, 2);
  EXPECT_THROW(write_figure_csv(dir + "/bad.csv", *model, tg, U, U, {0.0}, 6), InvalidArgument);
}

TEST(Pipeline, TinyRunReportIsIdempotentAndReproducible) {
  const auto root = test::scratch_dir("pipeline");
  for (const char* run : {"a", "b"}) {
    Pipeline p(parse_config(tiny(root + "/" + run)));
    p.run("benchmark");
  }
  for (const char* stage : {"snapshots", "eim", "greedy", "train-hybrid", "train-nonintrusive"}) {
    const json ma = read_json(root + "/a/" + stage + "/manifest.json");
    const json mb = read_json(root + "/b/" + stage + "/manifest.json");
    EXPECT_EQ(ma["artifacts"], mb["artifacts"]) << stage;
    EXPECT_EQ(ma["config_hash"], mb["config_hash"]) << stage;
  }
  EXPECT_EQ(slurp(root + "/a/benchmark/errors.csv"), slurp(root + "/b/benchmark/errors.csv"));

  const auto path = merge_reports(root);
  const std::string first = slurp(path);
  EXPECT_FALSE(first.empty());
  merge_reports(root);
  EXPECT_EQ(slurp(path), first);

  // Predicting from a saved bundle writes a trajectory container.
  const auto out = root + "/pred.romsnap";
  predict_to_file(root + "/a/train-hybrid/bundle", Param{1.02}, out);
  EXPECT_EQ(load_trajectory(out).states.cols(), 20);
}

}  // namespace
}  // namespace romlab
