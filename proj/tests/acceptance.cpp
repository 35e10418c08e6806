// Acceptance run: one PASS/FAIL line per criterion 1-11.
//
// Exit status is 0 when every criterion passes except those listed with
// --expect-red (criteria known to be unattainable; their lines still print
// FAIL and are analyzed in the README).

#include "fom/burgers.hpp"
#include "gradcheck.hpp"
#include "harness/config.hpp"
#include "harness/pipeline.hpp"
#include "harness/timing.hpp"
#include "neural/train.hpp"
#include "reduction/eim.hpp"
#include "reduction/pod.hpp"
#include "roms/grom.hpp"
#include "roms/lspg.hpp"
#include "surrogates/bundle.hpp"
#include "surrogates/hybrid.hpp"
#include "surrogates/metrics.hpp"
#include "test_util.hpp"

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace romlab;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

// report.csv as method -> column -> value
using Table = std::map<std::string, std::map<std::string, double>>;

Table read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) head.push_back(c);
  }
  Table t;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string c, method;
    std::getline(ss, method, ',');
    for (std::size_t k = 1; k < head.size() && std::getline(ss, c, ','); ++k) t[method][head[k]] = std::stod(c);
  }
  return t;
}

std::vector<double> errors_of(const Table& t, const std::string& method, std::size_t n_mu) {
  std::vector<double> e;
  for (std::size_t k = 0; k < n_mu; ++k) e.push_back(t.at(method).at("err_mu" + std::to_string(k)));
  return e;
}

const std::string* find_method(const Table& t, const std::string& prefix) {
  for (const auto& [name, row] : t)
    if (name.rfind(prefix, 0) == 0) return &name;
  return nullptr;
}

double timing(const std::string& stage_dir, const std::string& key) {
  return read_json(stage_dir + "/timings.json").at(key).get<double>();
}

class Acceptance {
 public:
  std::string work, configs, cli;
  bool reuse = false;

  // Full-scale 1D run (criteria 2-6a); stages are timed here.
  Pipeline& run1d() {
    if (!p1d_) {
      auto cfg = load_config(configs + "/burgers1d.json");
      cfg.output = work + "/burgers1d";
      if (!reuse) fs::remove_all(cfg.output);
      p1d_ = std::make_unique<Pipeline>(cfg);
      const auto t0 = std::chrono::steady_clock::now();
      p1d_->snapshots();
      p1d_->eim();
      p1d_->greedy();
      offline1d_ = seconds_since(t0);
    }
    return *p1d_;
  }
  double offline1d() { return run1d(), offline1d_; }

  Table& report1d() {
    if (report1d_.empty()) {
      run1d().run("benchmark");
      report1d_ = read_report(p1d_->stage_dir("benchmark") + "/report.csv");
    }
    return report1d_;
  }

  Pipeline& run2d_small() {
    if (!p2d_) {
      auto cfg = load_config(configs + "/burgers2d_small.json");
      cfg.output = work + "/burgers2d_small";
      if (!reuse) fs::remove_all(cfg.output);
      p2d_ = std::make_unique<Pipeline>(cfg);
      const auto t0 = std::chrono::steady_clock::now();
      p2d_->run("benchmark");
      total2d_ = seconds_since(t0);
      report2d_ = read_report(p2d_->stage_dir("benchmark") + "/report.csv");
    }
    return *p2d_;
  }

  Verdict c1();
  Verdict c2();
  Verdict c3();
  Verdict c4();
  Verdict c5();
  Verdict c6();
  Verdict c7();
  Verdict c8();
  Verdict c9();
  Verdict c10();
  Verdict c11();

 private:
  std::unique_ptr<Pipeline> p1d_, p2d_;
  double offline1d_ = 0, total2d_ = 0;
  Table report1d_, report2d_;
};

Verdict Acceptance::c1() {
  const auto t0 = std::chrono::steady_clock::now();
  const TimeGrid tg(0.5, 500);
  Burgers1dConfig c;
  c.elements = 64;
  auto model = build_burgers1d(c, tg);
  const Index n = model->dim();
  auto id = std::make_shared<EimData>(eim_identity(n, model.get()));
  GRom g(*model, Matrix::Identity(n, n), id);
  std::vector<Index> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
  LspgRom l(*model, Matrix::Identity(n, n), rows);
  double worst_g = 0, worst_l = 0;
  for (double mu : {0.92, 0.98, 1.02, 1.08}) {
    const Matrix U = simulate_fom(*model, Param{mu}, tg).states;
    worst_g = std::max(worst_g, (lift(g.basis(), g.simulate(Param{mu}, tg).Z) - U).cwiseAbs().maxCoeff());
    worst_l = std::max(worst_l, (lift(l.basis(), l.simulate(Param{mu}, tg).Z) - U).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  return {worst_g < 1e-8 && worst_l < 1e-8 && secs < 5.0,
          "max|G-ROM - FOM| = " + num(worst_g) + ", max|LSPG - FOM| = " + num(worst_l) +
              " over 4 mu (< 1e-8); runtime " + num(secs) + " s (< 5 s)"};
}

Verdict Acceptance::c2() {
  auto& p = run1d();
  const auto& g = p.greedy_result();
  const Index rt = g.basis.rank();
  const auto& train = p.config().train;
  std::set<double> chosen;
  for (Index i : g.selected_indices) chosen.insert(train[static_cast<std::size_t>(i)][0]);
  std::size_t extra = 0;
  for (double m : chosen)
    if (std::abs(m - 0.9) > 1e-12 && std::abs(m - 1.1) > 1e-12) ++extra;
  const double secs = offline1d();
  std::string sel;
  for (double m : chosen) sel += (sel.empty() ? "" : ", ") + num(m);
  return {rt >= 35 && rt <= 55 && extra <= 1 && secs < 300.0,
          "r~ = " + std::to_string(rt) + " (want 35..55), selected {" + sel + "} (" + std::to_string(extra) +
              " outside {0.9, 1.1}, want <= 1), stop: " + g.report.stopping_reason + "; snapshots+EIM+greedy " +
              num(secs) + " s (< 300 s)"};
}

Verdict Acceptance::c3() {
  auto& t = report1d();
  const auto e = errors_of(t, "RBM G-ROM", 4);
  bool ok = true;
  for (double v : e) ok = ok && v >= 7.2e-4 / 3 && v <= 7.2e-4 * 3;
  const double secs = t.at("RBM G-ROM").at("predict_s");
  return {ok && secs < 10.0, "size " + num(t.at("RBM G-ROM").at("size")) + ", errors " + list(e) +
                                 " (want within 3x of 7.2e-4); prediction " + num(secs) + " s"};
}

Verdict Acceptance::c4() {
  auto& t = report1d();
  const std::string* m = find_method(t, "G-ROM+");
  if (!m) return {false, "hybrid row missing"};
  const auto e = errors_of(t, *m, 4);
  const auto g = errors_of(t, "G-ROM", 4);
  bool ok = true, better = true;
  for (std::size_t k = 0; k < 4; ++k) {
    ok = ok && e[k] <= 5e-3;
    better = better && 5 * e[k] <= g[k];
  }
  const std::string dir = run1d().stage_dir("train-hybrid");
  const double train_s = timing(dir, "dataset_seconds") + timing(dir, "nn_seconds");
  return {ok && train_s < 3600.0, *m + " errors " + list(e) + " (<= 5e-3); training " + num(train_s / 60) +
                                      " min (< 60); G-ROM(5) errors " + list(g) +
                                      (better ? ", hybrid >= 5x better" : ", hybrid NOT 5x better")};
}

Verdict Acceptance::c5() {
  auto& t = report1d();
  const auto e = errors_of(t, "POD-FFNN-e-decoder", 4);
  bool ok = true;
  for (double v : e) ok = ok && v <= 2e-2;
  const std::string dir = run1d().stage_dir("train-nonintrusive");
  const double train_s = timing(dir, "pod_seconds") + timing(dir, "nn_seconds");
  return {ok, "errors " + list(e) + " (<= 2e-2); training " + num(train_s / 60) + " min"};
}

// 1D ordering from the benchmark table; full-scale 2D timings measured here:
// FOM, G-ROM(227) and a POD-head hybrid (r=10, r0=1024) at one test parameter.
// Network weights and V0 are untrained placeholders: only cost is measured.
Verdict Acceptance::c6() {
  auto& t = report1d();
  const std::string* m = find_method(t, "G-ROM+");
  const double fom1 = t.at("FOM").at("fom_s");
  const double hyb1 = m ? t.at(*m).at("predict_s") : 1e300;

  const TimeGrid tg(25.0, 500);
  Burgers2dConfig c;
  auto model = std::shared_ptr<FomModel>(build_burgers2d(c, tg));
  const Param mu{5.19, 0.026};
  const Index n = model->dim();

  SnapshotTrajectory fom;
  const double t_fom = measure_timing([&] { return simulate_fom(*model, mu, tg); }, 1, &fom);
  std::cerr << "  [6] full 2D FOM: n = " << n << ", " << t_fom << " s\n";

  std::shared_ptr<const EimData> eim;
  {
    Matrix F(n, fom.states.cols());
    for (Index i = 0; i < F.cols(); ++i) F.col(i) = model->eval_f(fom.states.col(i), mu);
    eim = std::make_shared<EimData>(eim_build(F, EimOptions{1e-8, 0, 300}, model.get()));
  }
  const ReducedBasis pod = pod_basis(fom.states, Truncation::fixed(227));
  fom.states.resize(0, 0);
  std::cerr << "  [6] EIM m = " << eim->size() << "\n";

  double t_g227 = 0;
  {
    GRom g(*model, pod.V, eim);
    t_g227 = measure_timing([&] { return lift(g.basis(), g.simulate(mu, tg).Z); }, 3);
  }
  std::cerr << "  [6] G-ROM(227): " << t_g227 << " s\n";

  HybridSurrogate h;
  h.model = model;
  h.eim = eim;
  h.grom = std::make_unique<GRom>(*model, pod.V.leftCols(10), eim);
  h.spec.kind = ErrorNetKind::kPodCnn2d;
  h.spec.r0 = 1024;
  h.net = build_error_net(h.spec, 10, n / 2);
  Rng rng(1);
  for (auto* p : h.net->parameters())
    for (double& v : p->value.data) v = 0.01 * rng.uniform(-1, 1);
  h.input_scaler = nn::Scaler::fit(Matrix::Random(10, 4), nn::ScaleKind::kStandardize);
  h.target_scaler = nn::Scaler::fit(Matrix::Random(1024, 4), nn::ScaleKind::kMaxAbs);
  h.rows = RowBlock{0, n / 2};
  h.V0 = test::random_matrix(n / 2, 1024, 2) / std::sqrt(static_cast<double>(n / 2));
  const double t_hyb = measure_timing([&] { return hybrid_predict(h, mu, tg).U; }, 3);
  std::cerr << "  [6] POD-head hybrid: " << t_hyb << " s\n";

  const bool ok = fom1 > hyb1 && 10 * t_hyb <= t_g227 && t_fom / t_hyb > 100;
  return {ok, "1D: FOM " + num(fom1) + " s vs hybrid " + num(hyb1) + " s; 2D full (n = " + std::to_string(n) +
                  "): FOM " + num(t_fom) + " s, G-ROM(227) " + num(t_g227) + " s, POD-head hybrid " + num(t_hyb) +
                  " s; G-ROM(227)/hybrid = " + num(t_g227 / t_hyb) + " (>= 10), FOM/hybrid = " +
                  num(t_fom / t_hyb) + " (> 100)"};
}

Verdict Acceptance::c7() {
  auto& p = run2d_small();
  const std::size_t nmu = p.config().test.size();
  const std::string* hm = find_method(report2d_, "G-ROM+");
  const auto g = errors_of(report2d_, "G-ROM", nmu);
  const auto l = errors_of(report2d_, "LSPG-ROM", nmu);
  const auto h = hm ? errors_of(report2d_, *hm, nmu) : std::vector<double>(nmu, 1e300);
  bool a = hm != nullptr, b = true;
  for (std::size_t k = 0; k < nmu; ++k) {
    a = a && 5 * h[k] <= g[k];
    b = b && l[k] < g[k];
  }

  // Invariants on the reduced-scale artifacts.
  const Matrix& Vg = p.greedy_result().basis.V;
  const double orth = orthonormality_error(Vg);
  auto eim = p.eim_data();
  double exact = 0;
  {
    const Matrix& X = p.train_snapshots()[0];
    for (Index i = 0; i < X.cols(); i += 10) {
      const Vector f = p.model().eval_f(X.col(i), p.config().train[0]);
      const Vector fi = eim_interpolate(*eim, f);
      for (Index k : eim->indices) exact = std::max(exact, std::abs(fi(k) - f(k)) / (f.cwiseAbs().maxCoeff() + 1e-300));
    }
  }
  double ident = 0;
  {
    auto s = load_hybrid_bundle(p.stage_dir("train-hybrid") + "/bundle", p.model_ptr());
    const auto d = build_hybrid_dataset(*s.grom, {p.config().train[0]}, {p.train_snapshots()[0]}, p.time_grid(), s.rows);
    const Matrix& X = p.train_snapshots()[0];
    for (Index cidx = 0; cidx < d.inputs.cols(); ++cidx) {
      const Index ti = d.index[static_cast<std::size_t>(cidx)].first;
      const Vector u = X.col(ti).segment(s.rows.begin, s.rows.resolve(X.rows()));
      const Vector vz = (s.V() * d.inputs.col(cidx)).segment(s.rows.begin, u.size());
      ident = std::max(ident, (vz + d.targets.col(cidx) - u).norm() / u.norm());
    }
  }
  const bool c = orth < 1e-10 && exact < 1e-12 && ident < 1e-12;
  return {a && b && c && total2d_ < 7200.0,
          "(a) hybrid " + list(h) + " vs G-ROM(10) " + list(g) + (a ? " >= 5x better" : " NOT 5x better") +
              "; (b) LSPG(" + num(report2d_.at("LSPG-ROM").at("size")) + ") " + list(l) + (b ? " < G-ROM" : " NOT < G-ROM") +
              "; (c) ||V'V-I|| " + num(orth) + ", EIM exactness " + num(exact) + ", u=Vz+e " + num(ident) +
              "; runtime " + num(total2d_ / 60) + " min (< 120)"};
}

Verdict Acceptance::c8() {
  const auto cases = test::grad_cases();
  double worst = 0;
  std::string worst_name;
  std::size_t shapes = 0;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    auto m = cases[k].make();
    for (std::uint64_t seed : {11u, 12u}) {
      const auto r = test::grad_check(*m, cases[k].sample, cases[k].batch + static_cast<Index>(seed % 2), 100 * k + seed);
      ++shapes;
      if (r.worst() > worst) {
        worst = r.worst();
        worst_name = cases[k].name;
      }
    }
  }
  nn::Network net = nn::build_ffnn(2, 3, {16, 16});
  net.init(7);
  Matrix X(2, 1), Y(3, 1);
  X << 0.3, -0.6;
  Y << 0.2, -0.5, 0.9;
  nn::TrainConfig cfg;
  cfg.epochs = 3000;
  cfg.batch_size = 1;
  cfg.validation_fraction = 0.0;
  const double loss = nn::train_regression(net, X, Y, cfg).total.back();
  return {worst < 1e-5 && shapes >= 20 && loss < 1e-6,
          std::to_string(cases.size()) + " modules, " + std::to_string(shapes) + " random checks, worst rel. error " +
              num(worst) + " (" + worst_name + ", < 1e-5); 1-sample overfit loss " + num(loss) + " (< 1e-6)"};
}

Verdict Acceptance::c9() {
  double resid = 0, exact = 0;
  for (Index k : {1, 3, 6, 10, 20}) {
    const Matrix F = test::random_matrix(400, k, 10 + static_cast<std::uint64_t>(k)) *
                     test::random_matrix(k, 60, 20 + static_cast<std::uint64_t>(k));
    const EimData e = eim_build(F, EimOptions{0.0, 0, k});
    for (Index j = 0; j < F.cols(); ++j) {
      const Vector fi = eim_interpolate(e, F.col(j));
      resid = std::max(resid, (fi - F.col(j)).cwiseAbs().maxCoeff() / F.cwiseAbs().maxCoeff());
    }
    const Matrix G = test::random_matrix(400, 5, 99);
    for (Index j = 0; j < G.cols(); ++j) {
      const Vector gi = eim_interpolate(e, G.col(j));
      for (Index i : e.indices) exact = std::max(exact, std::abs(gi(i) - G(i, j)));
    }
  }
  return {resid < 1e-10 && exact < 1e-12, "exact-rank k in {1,3,6,10,20}: residual after k picks " + num(resid) +
                                               " (< 1e-10); exactness at indices " + num(exact) + " (< 1e-12)"};
}

// Oracle: tail = ||X||_F^2 - sum of the r largest eigenvalues of the small Gram matrix.
Verdict Acceptance::c10() {
  double worst = 0;
  std::string where;
  for (auto [m, n, r] : {std::tuple<Index, Index, Index>{200, 300, 20}, {1000, 400, 60}, {2000, 3000, 150}}) {
    const Matrix X = test::random_matrix(m, n, static_cast<std::uint64_t>(m + n));
    const ReducedBasis b = pod_basis(X, Truncation::fixed(r));
    const double lhs = (X - b.V * (b.V.transpose() * X)).squaredNorm();
    const Matrix G = m <= n ? Matrix(X * X.transpose()) : Matrix(X.transpose() * X);
    const Vector lam = Eigen::SelfAdjointEigenSolver<Matrix>(G, Eigen::EigenvaluesOnly).eigenvalues();
    const double rhs = X.squaredNorm() - lam.tail(r).sum();
    const double rel = std::abs(lhs - rhs) / rhs;
    if (rel >= worst) {
      worst = rel;
      where = std::to_string(m) + "x" + std::to_string(n);
    }
  }
  return {worst < 1e-8, "worst relative mismatch " + num(worst) + " (" + where + ", < 1e-8)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two CLI runs of the same config and seed in deterministic mode.
Verdict Acceptance::c11() {
  const std::string a = work + "/determinism/a", b = work + "/determinism/b";
  fs::remove_all(work + "/determinism");
  for (const auto& out : {a, b}) {
    const std::string cmd = "\"" + cli + "\" --config \"" + configs + "/smoke1d.json\" --out \"" + out +
                            "\" --deterministic benchmark > \"" + out + ".log\" 2>&1";
    fs::create_directories(fs::path(out).parent_path());
    if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed: " + cmd};
  }
  std::size_t files = 0, differ = 0;
  std::string first;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    const std::string name = rel.filename().string();
    if (name == "timings.json" || name == "report.csv") continue;  // wall-clock content
    ++files;
    if (!fs::exists(fs::path(b) / rel) || slurp(e.path()) != slurp(fs::path(b) / rel)) {
      ++differ;
      if (first.empty()) first = rel.string();
    }
  }
  return {files > 0 && differ == 0, std::to_string(files) + " artifact files compared (timing files excluded), " +
                                        std::to_string(differ) + " differ" + (first.empty() ? "" : " (" + first + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  Acceptance acc;
  std::string only, expect_red;
  app.add_option("--work", acc.work, "work directory")->required();
  app.add_option("--configs", acc.configs, "directory of experiment configs")->required();
  app.add_option("--cli", acc.cli, "path of the romlab executable")->required();
  app.add_option("--only", only, "comma-separated criteria to run (default: all)");
  app.add_option("--expect-red", expect_red, "comma-separated criteria known to be unattainable");
  app.add_flag("--reuse", acc.reuse, "keep up-to-date pipeline stages from a previous run");
  CLI11_PARSE(app, argc, argv);

  auto parse_set = [](const std::string& s) {
    std::set<int> out;
    std::stringstream ss(s);
    std::string t;
    while (std::getline(ss, t, ','))
      if (!t.empty()) out.insert(std::stoi(t));
    return out;
  };
  const std::set<int> sel = parse_set(only), red = parse_set(expect_red);
  acc.work = fs::absolute(acc.work).string();
  fs::create_directories(acc.work);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"oracle equivalence (n=64, V=I)", [&] { return acc.c1(); }},
      {"POD-greedy reproduction (1D full scale)", [&] { return acc.c2(); }},
      {"RBM G-ROM accuracy (1D)", [&] { return acc.c3(); }},
      {"hybrid 1D accuracy", [&] { return acc.c4(); }},
      {"non-intrusive 1D accuracy", [&] { return acc.c5(); }},
      {"speedup ordering", [&] { return acc.c6(); }},
      {"reduced-scale 2D properties", [&] { return acc.c7(); }},
      {"neural engine gradients and overfit", [&] { return acc.c8(); }},
      {"EIM exactness", [&] { return acc.c9(); }},
      {"SVD/POD tail identity", [&] { return acc.c10(); }},
      {"determinism", [&] { return acc.c11(); }},
  };
  int unexpected = 0, passed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!sel.empty() && !sel.count(id)) continue;
    ++ran;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    if (v.pass) ++passed;
    if (!v.pass && !red.count(id)) ++unexpected;
    std::printf("%s %2d %s: %s [%.1f s]%s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                v.detail.c_str(), secs, !v.pass && red.count(id) ? " (expected red)" : "");
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed, %d unexpected failures\n", passed, ran, unexpected);
  return unexpected == 0 ? 0 : 1;
}
