// Acceptance suite: every release criterion as one pass/fail line.
// Run with no arguments for all criteria, or pass criterion numbers.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include <Eigen/Dense>

#include "fgpc/cg.hpp"
#include "fgpc/data.hpp"
#include "fgpc/fourier.hpp"
#include "fgpc/model.hpp"
#include "fgpc/rng.hpp"
#include "fgpc/trainer.hpp"
#include "fgpc/variational.hpp"
#include "test_helpers.hpp"

using namespace fgpc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

bool trace_monotone(const TrainTrace& trace) {
  for (std::size_t i = 1; i < trace.iterations.size(); ++i) {
    const double prev = trace.iterations[i - 1].log_f;
    if (trace.iterations[i].log_f < prev - 1e-8 * std::abs(prev)) return false;
  }
  return true;
}

double held_out_oa(const TrainedModel& model, const Dataset& test) {
  return overall_accuracy(predict_label(model, test.X), test.y);
}

// ---------------------------------------------------------------------------
// 1. kernel approximation converges in D
// ---------------------------------------------------------------------------

Outcome criterion_kernel_convergence() {
  Rng rng(2024);
  std::vector<Eigen::VectorXd> xs, x2s;
  for (int p = 0; p < 20; ++p) {
    Eigen::VectorXd x(2), x2(2);
    x << rng.normal(), rng.normal();
    x2 << rng.normal(), rng.normal();
    xs.push_back(x);
    x2s.push_back(x2);
  }
  const auto mae = [&](Eigen::Index D) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const FrequencyBasis basis = sample_frequencies(D, 2, seed);
      for (std::size_t p = 0; p < xs.size(); ++p) {
        total += std::abs(approx_kernel(xs[p], x2s[p], basis, 1.0, 1.0) -
                          se_kernel(xs[p], x2s[p], 1.0, 1.0));
      }
    }
    return total / (50.0 * 20.0);
  };
  const double mae10 = mae(10);
  const double mae1000 = mae(1000);
  Outcome out;
  out.pass = mae1000 < 0.05 && mae1000 < mae10;
  out.detail = "mae(D=10)=" + fmt(mae10) + " mae(D=1000)=" + fmt(mae1000) +
               " (limit 0.05, must shrink)";
  return out;
}

// ---------------------------------------------------------------------------
// 2. the evidence bound never exceeds the quadrature marginal likelihood
// ---------------------------------------------------------------------------

Outcome criterion_bound_validity() {
  double worst_slack = std::numeric_limits<double>::infinity();
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng(500 + trial);
    Eigen::MatrixXd X(20, 1);
    for (Eigen::Index i = 0; i < 20; ++i) X(i, 0) = rng.normal();
    const FrequencyBasis basis = sample_frequencies(1, 1, 900 + trial);
    const Eigen::MatrixXd Z = project(X, basis, 1.0);
    Eigen::VectorXd y(20);
    for (Eigen::Index i = 0; i < 20; ++i) y(i) = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const double gamma = std::exp(2.0 * rng.uniform() - 1.0);
    Eigen::VectorXd xi = Eigen::VectorXd::Ones(20);
    for (int k = 0; k < 3; ++k) {
      xi = update_xi(Z, compute_posterior(Z, y, gamma, xi));
    }
    const double log_f = log_bound(Z, y, gamma, xi).log_f;
    const double exact = testutil::exact_log_marginal(Z, y, gamma);
    worst_slack = std::min(worst_slack, exact - log_f);
    if (log_f > exact + 1e-6) {
      return {false, "bound exceeded the marginal by " + fmt(log_f - exact) +
                         " on trial " + std::to_string(trial)};
    }
  }
  return {true, "20 instances, min slack " + fmt(worst_slack) +
                    " (allowed >= -1e-6)"};
}

// ---------------------------------------------------------------------------
// 3. posterior matches hand-computed 2x2 closed forms
// ---------------------------------------------------------------------------

Outcome criterion_posterior_oracle() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(1 + rng.bounded(3));  // 1..3
    Eigen::MatrixXd X(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) X(i, 0) = rng.normal();
    const Eigen::MatrixXd Z = project(X, sample_frequencies(1, 1, seed + 31), 1.0);
    Eigen::VectorXd y(n), xi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i) = rng.uniform() < 0.5 ? 0.0 : 1.0;
      xi(i) = 0.2 + rng.uniform();
    }
    const double gamma = std::exp(2.0 * rng.uniform() - 1.0);
    const WeightPosterior post = compute_posterior(Z, y, gamma, xi);

    // closed-form 2x2 inverse through the adjugate
    double a = 1.0 / gamma, b = 0.0, c = 1.0 / gamma;
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lam = lambda_of_xi(xi(i));
      a += 2.0 * lam * Z(i, 0) * Z(i, 0);
      b += 2.0 * lam * Z(i, 0) * Z(i, 1);
      c += 2.0 * lam * Z(i, 1) * Z(i, 1);
      rhs(0) += Z(i, 0) * (y(i) - 0.5);
      rhs(1) += Z(i, 1) * (y(i) - 0.5);
    }
    const double det = a * c - b * b;
    Eigen::Matrix2d sigma;
    sigma << c / det, -b / det, -b / det, a / det;
    const Eigen::Vector2d mu = sigma * rhs;
    worst = std::max(worst, (post.Sigma - sigma).cwiseAbs().maxCoeff());
    worst = std::max(worst, (post.mu - mu).cwiseAbs().maxCoeff());
  }
  // the documented single-instance case
  Eigen::MatrixXd Z1(1, 2);
  Z1 << 1.0, 0.0;
  Eigen::VectorXd y1(1), xi1(1);
  y1 << 1.0;
  xi1 << 1.0;
  const WeightPosterior post = compute_posterior(Z1, y1, 1.0, xi1);
  const double denom = 1.0 + 2.0 * lambda_of_xi(1.0);
  worst = std::max(worst, std::abs(post.mu(0) - 0.5 / denom));
  worst = std::max(worst, std::abs(post.Sigma(0, 0) - 1.0 / denom));
  worst = std::max(worst, std::abs(post.Sigma(1, 1) - 1.0));
  return {worst <= 1e-10,
          "30 random instances + documented case, max deviation " + fmt(worst) +
              " (limit 1e-10)"};
}

// ---------------------------------------------------------------------------
// 4. xi update lands on a stationary point of log F
// ---------------------------------------------------------------------------

Outcome criterion_xi_stationarity() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(700 + seed);
    const auto n = static_cast<Eigen::Index>(4 + rng.bounded(7));   // 4..10
    const auto D = static_cast<Eigen::Index>(1 + rng.bounded(3));   // 1..3
    Eigen::MatrixXd X(n, 2);
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = rng.normal();
    const Eigen::MatrixXd Z = project(X, sample_frequencies(D, 2, seed), 1.0);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const double gamma = std::exp(rng.normal() * 0.4);
    const Eigen::VectorXd xi =
        testutil::xi_fixed_point(Z, y, gamma, Eigen::VectorXd::Ones(n));
    const Eigen::VectorXd grad = testutil::fd_logf_xi(Z, y, gamma, xi);
    worst = std::max(worst, grad.cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-6, "10 instances, max |dlogF/dxi| " + fmt(worst) +
                             " at the update's fixed point (limit 1e-6)"};
}

// ---------------------------------------------------------------------------
// 5. analytic gradients match central finite differences
// ---------------------------------------------------------------------------

Outcome criterion_gradients() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(40 + seed);
    Eigen::MatrixXd X(30, 2);
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = rng.normal();
    Eigen::VectorXd y(30), xi(30);
    for (Eigen::Index i = 0; i < 30; ++i) {
      y(i) = rng.uniform() < 0.5 ? 0.0 : 1.0;
      xi(i) = 0.5 + rng.uniform();
    }
    const FrequencyBasis basis = sample_frequencies(3, 2, 60 + seed);

    VariationalObjective rff(X, y, basis, ObjectiveMode::Rff);
    rff.set_xi(xi);
    const ObjectiveFn rff_fn = [&rff](const Eigen::VectorXd& t,
                                      Eigen::VectorXd& g) {
      return rff.value_and_gradient(t, g);
    };
    worst = std::max(worst,
                     check_gradient(rff_fn, rff.pack_rff(1.2, 0.7), 1e-5));

    VariationalObjective vff(X, y, basis, ObjectiveMode::Vff);
    vff.set_xi(xi);
    Eigen::MatrixXd V(3, 2);
    for (Eigen::Index i = 0; i < V.size(); ++i) V(i) = rng.normal();
    const ObjectiveFn vff_fn = [&vff](const Eigen::VectorXd& t,
                                      Eigen::VectorXd& g) {
      return vff.value_and_gradient(t, g);
    };
    worst = std::max(worst, check_gradient(vff_fn, vff.pack_vff(V, 1.1), 1e-5));
  }
  return {worst <= 1e-5, "both modes, max relative error " + fmt(worst) +
                             " (limit 1e-5)"};
}

// ---------------------------------------------------------------------------
// 6. training keeps the bound monotone on every test dataset
// ---------------------------------------------------------------------------

Outcome criterion_monotonicity() {
  struct Case {
    const char* name;
    Dataset data;
    TrainMode mode;
    Eigen::Index D;
  };
  std::vector<Case> cases;
  cases.push_back({"blobs/rff", testutil::make_blobs(800, 5), TrainMode::Rff, 20});
  cases.push_back({"annulus/rff", testutil::make_annulus(800, 6), TrainMode::Rff, 30});
  cases.push_back(
      {"aniso/rff", testutil::make_anisotropic(400, 7), TrainMode::Rff, 4});
  cases.push_back(
      {"aniso/vff", testutil::make_anisotropic(400, 8), TrainMode::Vff, 4});
  for (auto& c : cases) {
    TrainConfig cfg;
    cfg.mode = c.mode;
    cfg.num_frequencies = c.D;
    cfg.seed = 1;
    cfg.max_outer_iters = 12;
    const auto [model, trace] = fit(c.data, cfg);
    if (!trace_monotone(trace)) {
      return {false, std::string("log F decreased on ") + c.name};
    }
  }
  return {true, "4 datasets x 12 outer iterations, log F non-decreasing"};
}

// ---------------------------------------------------------------------------
// 7. linear-structure accuracy with a Bayes-oracle sanity check
// ---------------------------------------------------------------------------

Outcome criterion_blobs() {
  const Dataset train = testutil::make_blobs(2000, 1);
  const Dataset test = testutil::make_blobs(1000, 2);

  // Bayes rule for equal spherical Gaussians at +/- (2,2): sign(x1 + x2)
  Eigen::VectorXi bayes(test.n());
  for (Eigen::Index i = 0; i < test.n(); ++i) {
    bayes(i) = test.X(i, 0) + test.X(i, 1) >= 0.0 ? 1 : 0;
  }
  const double bayes_oa = overall_accuracy(bayes, test.y);

  TrainConfig cfg;
  cfg.num_frequencies = 50;
  cfg.seed = 1;
  cfg.max_outer_iters = 15;
  const auto [model, trace] = fit(train, cfg);
  const double oa = held_out_oa(model, test);
  return {oa >= 0.95 && bayes_oa >= 0.99 && trace_monotone(trace),
          "held-out OA " + fmt(oa) + " (limit 0.95), Bayes oracle " +
              fmt(bayes_oa)};
}

// ---------------------------------------------------------------------------
// 8. nonlinear structure: annuli defeat linear classifiers, not this one
// ---------------------------------------------------------------------------

Outcome criterion_annulus() {
  const Dataset train = testutil::make_annulus(2000, 1);
  const Dataset test = testutil::make_annulus(1000, 2);

  // least-squares linear probe as the reference linear classifier
  Eigen::MatrixXd A(train.n(), 3);
  A.leftCols(2) = train.X;
  A.col(2).setOnes();
  const Eigen::VectorXd w =
      (A.transpose() * A).ldlt().solve(A.transpose() * train.y.cast<double>());
  Eigen::VectorXi linear_pred(test.n());
  for (Eigen::Index i = 0; i < test.n(); ++i) {
    const double score = test.X(i, 0) * w(0) + test.X(i, 1) * w(1) + w(2);
    linear_pred(i) = score >= 0.5 ? 1 : 0;
  }
  const double linear_oa = overall_accuracy(linear_pred, test.y);

  TrainConfig cfg;
  cfg.num_frequencies = 50;
  cfg.seed = 1;
  cfg.max_outer_iters = 15;
  const auto [model, trace] = fit(train, cfg);
  const double oa = held_out_oa(model, test);
  return {oa >= 0.90 && linear_oa <= 0.6,
          "held-out OA " + fmt(oa) + " (limit 0.90), linear probe " +
              fmt(linear_oa)};
}

// ---------------------------------------------------------------------------
// 9. learned frequencies beat random ones at tiny D
// ---------------------------------------------------------------------------

Outcome criterion_vff_advantage() {
  double rff_total = 0.0;
  double vff_total = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Dataset train = testutil::make_anisotropic(1000, 10 + s);
    const Dataset test = testutil::make_anisotropic(1000, 100 + s);
    TrainConfig cfg;
    cfg.num_frequencies = 2;
    cfg.seed = s;
    cfg.max_outer_iters = 12;
    cfg.optimizer.max_evals = 60;

    cfg.mode = TrainMode::Rff;
    rff_total += held_out_oa(fit(train, cfg).first, test);
    cfg.mode = TrainMode::Vff;
    vff_total += held_out_oa(fit(train, cfg).first, test);
  }
  const double gap = (vff_total - rff_total) / 5.0;
  return {gap >= 0.03, "mean OA gap over 5 seeds: vff " + fmt(vff_total / 5.0) +
                           " - rff " + fmt(rff_total / 5.0) + " = " + fmt(gap) +
                           " (limit 0.03)"};
}

// ---------------------------------------------------------------------------
// 10. capacity: many learned frequencies overfit a small training set
// ---------------------------------------------------------------------------

Outcome criterion_overfitting() {
  const Dataset train = testutil::make_anisotropic(500, 7);
  const Dataset test = testutil::make_anisotropic(1000, 77);
  TrainConfig cfg;
  cfg.mode = TrainMode::Vff;
  cfg.seed = 3;
  cfg.max_outer_iters = 10;
  cfg.optimizer.max_evals = 60;

  cfg.num_frequencies = 2;
  const auto [small, trace_small] = fit(train, cfg);
  cfg.num_frequencies = 150;
  const auto [big, trace_big] = fit(train, cfg);

  const double train_small = overall_accuracy(predict_label(small, train.X), train.y);
  const double train_big = overall_accuracy(predict_label(big, train.X), train.y);
  const double test_big = held_out_oa(big, test);
  const double test_small = held_out_oa(small, test);
  return {train_big >= test_big && train_big > train_small,
          "D=150 train " + fmt(train_big) + " / test " + fmt(test_big) +
              "; D=2 train " + fmt(train_small) + " / test " + fmt(test_small) +
              "; margins: train-test " + fmt(train_big - test_big) +
              ", trainD150-trainD2 " + fmt(train_big - train_small)};
}

// ---------------------------------------------------------------------------
// 11. cost scales linearly in n; prediction cost is n-free
// ---------------------------------------------------------------------------

Outcome criterion_scaling() {
  TrainConfig cfg;
  cfg.num_frequencies = 50;
  cfg.seed = 1;
  cfg.max_outer_iters = 4;
  cfg.rel_tol = 1e-300;  // same iteration count at both sizes
  cfg.optimizer.max_evals = 20;
  cfg.optimizer.grad_tol = 0.0;
  cfg.optimizer.step_tol = 0.0;

  const auto timed_fit = [&cfg](const Dataset& data) {
    const auto t0 = std::chrono::steady_clock::now();
    (void)fit(data, cfg);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  const double t10k = timed_fit(testutil::make_blobs(10000, 20));
  const double t40k = timed_fit(testutil::make_blobs(40000, 21));
  const double ratio = t40k / t10k;

  // prediction cost per row must not depend on the training-set size
  TrainConfig quick = cfg;
  quick.max_outer_iters = 2;
  quick.optimizer.max_evals = 5;
  const auto [m_small, tr1] = fit(testutil::make_blobs(1000, 30), quick);
  const auto [m_large, tr2] = fit(testutil::make_blobs(100000, 31), quick);
  const Dataset probe = testutil::make_blobs(30000, 32);
  const auto time_once = [&probe](const TrainedModel& m) {
    const auto t0 = std::chrono::steady_clock::now();
    (void)predict_proba(m, probe.X);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  // interleaved min-of-7 after a warmup, so load drift hits both equally
  (void)time_once(m_small);
  (void)time_once(m_large);
  double p_small = std::numeric_limits<double>::infinity();
  double p_large = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 7; ++rep) {
    p_small = std::min(p_small, time_once(m_small));
    p_large = std::min(p_large, time_once(m_large));
  }
  const double p_ratio = std::max(p_small, p_large) / std::min(p_small, p_large);

  return {ratio <= 5.0 && p_ratio < 1.5,
          "fit(n=40k)/fit(n=10k) = " + fmt(t40k) + "/" + fmt(t10k) + " = " +
              fmt(ratio) + " (limit 5); predict per-row ratio " + fmt(p_ratio) +
              " (limit 1.5)"};
}

// ---------------------------------------------------------------------------
// 12. CLI golden checks on the bundled fixture
// ---------------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& dir) {
  const std::string cmd = std::string(FGPC_CLI_PATH) + " " + args + " > " +
                          (dir / "out.txt").string() + " 2> " +
                          (dir / "err.txt").string();
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::string> file_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

Outcome criterion_cli() {
  const fs::path dir =
      fs::temp_directory_path() / ("fgpc_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string fixture = std::string(FGPC_FIXTURE_DIR) + "/blobs.csv";
  const std::string model = (dir / "model.json").string();

  if (run_cli("train --data " + fixture +
                  " --label-col label --mode rff --num-freqs 40 --seed 1 "
                  "--max-iters 10 --out " + model,
              dir) != 0) {
    return {false, "train exited nonzero"};
  }
  if (!fs::exists(model)) return {false, "train left no model file"};

  const auto trace = file_lines(model + ".trace.csv");
  if (trace.size() < 2) return {false, "trace file missing rows"};
  double prev = -1e300;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    std::stringstream ss(trace[i]);
    std::string iter, logf;
    std::getline(ss, iter, ',');
    std::getline(ss, logf, ',');
    const double v = std::stod(logf);
    if (v < prev - 1e-8 * std::abs(prev)) return {false, "trace log_f decreased"};
    prev = v;
  }

  if (run_cli("train --data " + fixture + " --label-col label --num-freqs 0 "
                  "--out " + (dir / "zero.json").string(),
              dir) != 2) {
    return {false, "--num-freqs 0 should exit 2"};
  }
  if (run_cli("train --data " + fixture + " --out " + (dir / "nolab.json").string(),
              dir) != 2) {
    return {false, "missing --label-col should exit 2"};
  }
  if (run_cli("kernel-check --grid-d 10 --pairs 0", dir) != 2) {
    return {false, "kernel-check --pairs 0 should exit 2"};
  }

  // bit-exact round trip through load/save
  const TrainedModel loaded = load_model(model);
  const std::string copy = (dir / "copy.json").string();
  save_model(loaded, copy);
  std::ifstream f1(model), f2(copy);
  const std::string s1((std::istreambuf_iterator<char>(f1)),
                       std::istreambuf_iterator<char>());
  const std::string s2((std::istreambuf_iterator<char>(f2)),
                       std::istreambuf_iterator<char>());
  if (s1 != s2) return {false, "model save/load round trip not byte-identical"};

  // benchmark row count, ordering, and rerun stability
  const std::string bench = (dir / "bench.csv").string();
  const std::string bench_args =
      "benchmark --data " + fixture +
      " --label-col label --grid-n 100,200 --grid-d 5,10 --modes rff "
      "--repeats 2 --seed 3 --max-iters 3 --out ";
  if (run_cli(bench_args + bench, dir) != 0) return {false, "benchmark failed"};
  const auto rows = file_lines(bench);
  if (rows.size() != 9) {
    return {false, "benchmark expected 8 data rows + header, got " +
                       std::to_string(rows.size())};
  }
  if (rows[0] != "mode,n,D,seed,train_seconds,test_seconds,train_oa,test_oa,status") {
    return {false, "benchmark header mismatch"};
  }
  const std::vector<std::string> expected_keys = {
      "rff,100,5,3", "rff,100,5,4", "rff,100,10,3", "rff,100,10,4",
      "rff,200,5,3", "rff,200,5,4", "rff,200,10,3", "rff,200,10,4"};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].rfind(expected_keys[i - 1] + ",", 0) != 0) {
      return {false, "benchmark rows not sorted by (mode, n, D, seed)"};
    }
  }
  const std::string bench2 = (dir / "bench2.csv").string();
  if (run_cli(bench_args + bench2, dir) != 0) return {false, "benchmark rerun failed"};
  const auto rows2 = file_lines(bench2);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::stringstream a(rows[i]), b(rows2[i]);
    std::string fa, fb;
    for (int field = 0; field < 9; ++field) {
      std::getline(a, fa, ',');
      std::getline(b, fb, ',');
      if (field == 4 || field == 5) continue;
      if (fa != fb) return {false, "benchmark rerun changed a non-timing column"};
    }
  }
  fs::remove_all(dir);
  return {true, "exit codes, trace monotonicity, round trip, benchmark grid all good"};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;  // 0 = no runtime requirement
  };
  const std::vector<Criterion> criteria = {
      {1, "kernel approximation convergence", criterion_kernel_convergence, 10},
      {2, "variational bound below exact marginal", criterion_bound_validity, 30},
      {3, "posterior closed-form oracle", criterion_posterior_oracle, 0},
      {4, "xi update stationarity", criterion_xi_stationarity, 0},
      {5, "analytic gradient correctness", criterion_gradients, 0},
      {6, "training monotonicity", criterion_monotonicity, 0},
      {7, "blobs accuracy vs Bayes oracle", criterion_blobs, 60},
      {8, "annulus accuracy vs linear probe", criterion_annulus, 60},
      {9, "vff advantage at small D", criterion_vff_advantage, 300},
      {10, "vff overfitting pattern", criterion_overfitting, 0},
      {11, "linear-in-n training, n-free prediction", criterion_scaling, 600},
      {12, "CLI golden checks", criterion_cli, 0},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  int ran = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && selected.count(c.id) == 0) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (out.pass && c.budget_seconds > 0.0 && secs > c.budget_seconds) {
      out.pass = false;
      out.detail += " -- exceeded the " + fmt(c.budget_seconds) + "s budget";
    }
    std::printf("[%2d] %s %s: %s [%.1fs]\n", c.id, out.pass ? "PASS" : "FAIL",
                c.name, out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  std::printf("acceptance: %d/%d criteria passed\n", ran - failures, ran);
  return failures;
}
