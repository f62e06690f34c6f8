#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "cli_support.hpp"
#include "fgpc/data.hpp"
#include "fgpc/fourier.hpp"
#include "fgpc/model.hpp"
#include "fgpc/rng.hpp"
#include "fgpc/trainer.hpp"

namespace {

using namespace fgpc;
using cli::format_double;

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---------------------------------------------------------------------------
// shared flag bundles
// ---------------------------------------------------------------------------

struct DataArgs {
  std::string path;
  std::string label_col;
  bool no_header = false;
};

void add_data_flags(CLI::App* cmd, DataArgs& args, bool label_required) {
  cmd->add_option("--data", args.path, "input CSV file")->required();
  auto* label = cmd->add_option("--label-col", args.label_col,
                                "label column (name, or zero-based index)");
  if (label_required) label->required();
  cmd->add_flag("--no-header", args.no_header, "file has no header row");
}

bool all_digits(const std::string& s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

Dataset load_labeled(const DataArgs& args) {
  if (args.no_header) {
    if (!all_digits(args.label_col)) {
      throw std::invalid_argument(
          "--label-col must be a zero-based index when the file has no header");
    }
    return load_csv(args.path, static_cast<Eigen::Index>(std::stol(args.label_col)),
                    /*has_header=*/false);
  }
  // name takes precedence; fall back to an index for numeric strings
  try {
    return load_csv(args.path, args.label_col);
  } catch (const std::invalid_argument&) {
    if (all_digits(args.label_col)) {
      return load_csv(args.path,
                      static_cast<Eigen::Index>(std::stol(args.label_col)),
                      /*has_header=*/true);
    }
    throw;
  }
}

struct PreprocessArgs {
  std::string spec = "none";
};

TransformSpec fit_preprocess(const PreprocessArgs& args,
                             const Eigen::MatrixXd& X) {
  if (args.spec == "none") return {};
  if (args.spec == "standardize") return fit_standardize(X);
  const std::string prefix = "standardize-pca:";
  if (args.spec.rfind(prefix, 0) == 0) {
    const std::string k_text = args.spec.substr(prefix.size());
    if (!all_digits(k_text)) {
      throw std::invalid_argument("--preprocess: bad component count '" +
                                  k_text + "'");
    }
    return fit_standardize_pca(X, static_cast<Eigen::Index>(std::stol(k_text)));
  }
  throw std::invalid_argument(
      "--preprocess must be none, standardize, or standardize-pca:K");
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  DataArgs data;
  PreprocessArgs preprocess;
  std::string mode = "rff";
  long num_freqs = 100;
  std::uint64_t seed = 0;
  std::string out;
  int max_iters = 50;
  double tol = 1e-5;
  long balanced = 0;
  int max_evals = 100;
  long median_subset = 1000;
  bool ridge_on_v = false;
};

void write_trace_csv(const std::string& path, const TrainTrace& trace) {
  std::ofstream out(path);
  if (!out) {
    throw std::invalid_argument("cannot write trace file '" + path + "'");
  }
  out << "iteration,log_f,gamma,elapsed_seconds\n";
  for (const auto& it : trace.iterations) {
    out << it.iter << ',' << format_double(it.log_f) << ','
        << format_double(it.gamma) << ',' << format_double(it.elapsed_seconds)
        << '\n';
  }
}

int cmd_train(const TrainArgs& args) {
  Dataset ds = load_labeled(args.data);
  if (args.balanced > 0) {
    ds = balanced_sample(ds, args.balanced, args.seed).first;
  }
  const TransformSpec pre = fit_preprocess(args.preprocess, ds.X);

  TrainConfig cfg;
  cfg.mode = args.mode == "vff" ? TrainMode::Vff : TrainMode::Rff;
  cfg.num_frequencies = args.num_freqs;
  cfg.seed = args.seed;
  cfg.max_outer_iters = args.max_iters;
  cfg.rel_tol = args.tol;
  cfg.median_subset = args.median_subset;
  cfg.optimizer.max_evals = args.max_evals;
  cfg.ridge_on_v = args.ridge_on_v;

  const auto t0 = std::chrono::steady_clock::now();
  auto [model, trace] = fit(ds, cfg, pre.kind == TransformKind::None ? nullptr : &pre);
  const double train_seconds = seconds_since(t0);

  save_model(model, args.out);
  write_trace_csv(args.out + ".trace.csv", trace);

  std::cout << "model=" << args.out << '\n'
            << "n=" << ds.n() << '\n'
            << "d=" << ds.dim() << '\n'
            << "mode=" << args.mode << '\n'
            << "num_freqs=" << model.num_frequencies() << '\n'
            << "outer_iters=" << model.train_meta.outer_iters << '\n'
            << "final_log_f=" << format_double(model.train_meta.final_log_f) << '\n'
            << "status="
            << (trace.status == TrainStatus::Converged ? "converged"
                                                       : "budget_exhausted")
            << '\n'
            << "train_seconds=" << format_double(train_seconds) << '\n';
  for (const auto& w : trace.warnings) std::cerr << "warning: " << w << '\n';
  return cli::kExitOk;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string label_col;  // optional: drop this column before predicting
  bool no_header = false;
  bool proba = false;
  double threshold = 0.5;
};

Eigen::MatrixXd load_predict_features(const PredictArgs& args) {
  if (args.label_col.empty()) {
    return load_features_csv(args.data, !args.no_header);
  }
  DataArgs d;
  d.path = args.data;
  d.label_col = args.label_col;
  d.no_header = args.no_header;
  return load_labeled(d).X;
}

int cmd_predict(const PredictArgs& args) {
  const TrainedModel model = load_model(args.model);
  const Eigen::MatrixXd X = load_predict_features(args);
  std::ofstream out(args.out);
  if (!out) {
    throw std::invalid_argument("cannot write '" + args.out + "'");
  }
  if (args.proba) {
    const Eigen::VectorXd p = predict_proba(model, X);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      out << format_double(p(i)) << '\n';
    }
  } else {
    const Eigen::VectorXi labels = predict_label(model, X, args.threshold);
    for (Eigen::Index i = 0; i < labels.size(); ++i) out << labels(i) << '\n';
  }
  return cli::kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string model;
  DataArgs data;
  double threshold = 0.5;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const TrainedModel model = load_model(args.model);
  const Dataset ds = load_labeled(args.data);

  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::VectorXi pred = predict_label(model, ds.X, args.threshold);
  const double predict_seconds = seconds_since(t0);

  long counts[2][2] = {{0, 0}, {0, 0}};  // [truth][pred]
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    ++counts[ds.y(i)][pred(i)];
  }
  const long n0 = counts[0][0] + counts[0][1];
  const long n1 = counts[1][0] + counts[1][1];
  std::cout << "n=" << ds.n() << '\n'
            << "oa=" << format_double(overall_accuracy(pred, ds.y)) << '\n'
            << "class0_accuracy="
            << format_double(n0 > 0 ? static_cast<double>(counts[0][0]) / n0
                                    : std::nan(""))
            << '\n'
            << "class1_accuracy="
            << format_double(n1 > 0 ? static_cast<double>(counts[1][1]) / n1
                                    : std::nan(""))
            << '\n'
            << "tn=" << counts[0][0] << '\n'
            << "fp=" << counts[0][1] << '\n'
            << "fn=" << counts[1][0] << '\n'
            << "tp=" << counts[1][1] << '\n'
            << "predict_seconds=" << format_double(predict_seconds) << '\n';
  return cli::kExitOk;
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct BenchmarkArgs {
  DataArgs data;
  PreprocessArgs preprocess;
  std::string grid_n;
  std::string grid_d;
  std::string modes = "rff,vff";
  long repeats = 5;
  std::uint64_t seed = 0;
  std::string out;
  int max_iters = 50;
  double tol = 1e-5;
  int max_evals = 100;
  int threads = 1;
};

std::string sanitize_status(std::string msg) {
  for (auto& c : msg) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return msg;
}

int cmd_benchmark(const BenchmarkArgs& args) {
  const Dataset full = load_labeled(args.data);
  auto ns = cli::parse_int_list(args.grid_n, "--grid-n");
  auto ds_grid = cli::parse_int_list(args.grid_d, "--grid-d");
  std::sort(ns.begin(), ns.end());
  std::sort(ds_grid.begin(), ds_grid.end());

  std::vector<std::string> modes;
  std::size_t start = 0;
  while (start <= args.modes.size()) {
    const auto pos = args.modes.find(',', start);
    modes.push_back(args.modes.substr(
        start, pos == std::string::npos ? pos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  std::sort(modes.begin(), modes.end());
  for (const auto& m : modes) {
    if (m != "rff" && m != "vff") {
      throw std::invalid_argument("--modes: unknown mode '" + m + "'");
    }
  }
  if (args.repeats < 1) {
    throw std::invalid_argument("--repeats must be >= 1");
  }

  std::ofstream out(args.out);
  if (!out) {
    throw std::invalid_argument("cannot write '" + args.out + "'");
  }
  out << "mode,n,D,seed,train_seconds,test_seconds,train_oa,test_oa,status\n";

  for (const auto& mode : modes) {
    for (const long n : ns) {
      for (const long D : ds_grid) {
        for (long r = 0; r < args.repeats; ++r) {
          const std::uint64_t seed = args.seed + static_cast<std::uint64_t>(r);
          out << mode << ',' << n << ',' << D << ',' << seed << ',';
          try {
            auto [train, rest] = balanced_sample(full, n, seed);
            if (rest.n() == 0) {
              throw std::invalid_argument("no rows left for the test split");
            }
            const TransformSpec pre = fit_preprocess(args.preprocess, train.X);

            TrainConfig cfg;
            cfg.mode = mode == "vff" ? TrainMode::Vff : TrainMode::Rff;
            cfg.num_frequencies = D;
            cfg.seed = seed;
            cfg.max_outer_iters = args.max_iters;
            cfg.rel_tol = args.tol;
            cfg.optimizer.max_evals = args.max_evals;

            const auto t0 = std::chrono::steady_clock::now();
            auto [model, trace] =
                fit(train, cfg, pre.kind == TransformKind::None ? nullptr : &pre);
            const double train_seconds = seconds_since(t0);

            const double train_oa =
                overall_accuracy(predict_label(model, train.X), train.y);
            const auto t1 = std::chrono::steady_clock::now();
            const Eigen::VectorXi pred = predict_label(model, rest.X);
            const double test_seconds = seconds_since(t1);
            const double test_oa = overall_accuracy(pred, rest.y);

            out << format_double(train_seconds) << ','
                << format_double(test_seconds) << ',' << format_double(train_oa)
                << ',' << format_double(test_oa) << ",ok\n";
          } catch (const std::exception& e) {
            out << "nan,nan,nan,nan,error:" << sanitize_status(e.what()) << '\n';
          }
          out.flush();
        }
      }
    }
  }

  std::ofstream meta(args.out + ".meta");
  meta << "data=" << args.data.path << '\n'
       << "grid_n=" << args.grid_n << '\n'
       << "grid_d=" << args.grid_d << '\n'
       << "modes=" << args.modes << '\n'
       << "repeats=" << args.repeats << '\n'
       << "seed=" << args.seed << '\n'
       << "threads=" << args.threads << '\n'
       << "preprocess=" << args.preprocess.spec << '\n';
  return cli::kExitOk;
}

// ---------------------------------------------------------------------------
// kernel-check
// ---------------------------------------------------------------------------

struct KernelCheckArgs {
  long dims = 2;
  double sigma = 1.0;
  double gamma = 1.0;
  std::string grid_d;
  long pairs = 20;
  long seeds = 50;
  std::uint64_t seed = 0;
};

int cmd_kernel_check(const KernelCheckArgs& args) {
  if (args.pairs < 1) throw std::invalid_argument("--pairs must be >= 1");
  if (args.seeds < 1) throw std::invalid_argument("--seeds must be >= 1");
  if (args.dims < 1) throw std::invalid_argument("--dims must be >= 1");
  if (!(args.sigma > 0.0)) throw std::invalid_argument("--sigma must be positive");
  const auto grid = cli::parse_int_list(args.grid_d, "--grid-d");

  // pairs are fixed across bases so columns are comparable
  Rng rng(derive_seed(args.seed, 2));
  std::vector<Eigen::VectorXd> xs, x2s;
  for (long p = 0; p < args.pairs; ++p) {
    Eigen::VectorXd x(args.dims), x2(args.dims);
    for (Eigen::Index j = 0; j < args.dims; ++j) x(j) = rng.normal();
    for (Eigen::Index j = 0; j < args.dims; ++j) x2(j) = rng.normal();
    xs.push_back(std::move(x));
    x2s.push_back(std::move(x2));
  }

  std::cout << "D,mean_abs_error,self_error\n";
  for (const long D : grid) {
    if (D < 1) throw std::invalid_argument("--grid-d entries must be >= 1");
    double total = 0.0;
    double self_worst = 0.0;
    for (long s = 0; s < args.seeds; ++s) {
      const FrequencyBasis basis =
          sample_frequencies(D, args.dims, args.seed + static_cast<std::uint64_t>(s));
      for (long p = 0; p < args.pairs; ++p) {
        const double approx =
            approx_kernel(xs[p], x2s[p], basis, args.sigma, args.gamma) /
            args.gamma;
        const double exact =
            se_kernel(xs[p], x2s[p], args.sigma, 1.0);
        total += std::abs(approx - exact);
        const double self =
            approx_kernel(xs[p], xs[p], basis, args.sigma, args.gamma) /
            args.gamma;
        self_worst = std::max(self_worst, std::abs(self - 1.0));
      }
    }
    const double mae = total / static_cast<double>(args.seeds * args.pairs);
    std::cout << D << ',' << format_double(mae) << ','
              << format_double(self_worst) << '\n';
  }
  return cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scalable Gaussian-process binary classification with random "
               "or learned Fourier features"};
  app.require_subcommand(1);

  int threads = 1;
  if (const char* env = std::getenv("FGPC_THREADS")) {
    threads = std::max(1, std::atoi(env));
  }
  app.add_option("--threads", threads,
                 "linear-algebra threads (default $FGPC_THREADS or 1)");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "fit a model and write it to disk");
  add_data_flags(train, train_args.data, /*label_required=*/true);
  train->add_option("--mode", train_args.mode, "rff or vff")
      ->check(CLI::IsMember({"rff", "vff"}));
  train->add_option("--num-freqs", train_args.num_freqs, "Fourier frequencies D")
      ->check(CLI::PositiveNumber);
  train->add_option("--seed", train_args.seed, "random seed");
  train->add_option("--out", train_args.out, "model output path")->required();
  train->add_option("--preprocess", train_args.preprocess.spec,
                    "none | standardize | standardize-pca:K");
  train->add_option("--max-iters", train_args.max_iters, "outer iteration cap")
      ->check(CLI::PositiveNumber);
  train->add_option("--tol", train_args.tol, "relative log-F stop tolerance")
      ->check(CLI::PositiveNumber);
  train->add_option("--balanced", train_args.balanced,
                    "balanced-subsample this many training rows first")
      ->check(CLI::PositiveNumber);
  train->add_option("--max-evals", train_args.max_evals,
                    "objective evaluations per outer iteration")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--median-subset", train_args.median_subset,
                    "subset size for the length-scale init")
      ->check(CLI::PositiveNumber);
  train->add_flag("--ridge-on-v", train_args.ridge_on_v,
                  "penalize |V|^2/2 in vff mode");

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "write per-row predictions");
  predict->add_option("--model", predict_args.model, "model file")->required();
  predict->add_option("--data", predict_args.data, "input CSV")->required();
  predict->add_option("--out", predict_args.out, "output path")->required();
  predict->add_option("--label-col", predict_args.label_col,
                      "drop this column before predicting");
  predict->add_flag("--no-header", predict_args.no_header);
  predict->add_flag("--proba", predict_args.proba,
                    "write class-1 probabilities instead of labels");
  predict->add_option("--threshold", predict_args.threshold,
                      "decision threshold in (0,1)");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "accuracy report on labeled data");
  evaluate->add_option("--model", eval_args.model, "model file")->required();
  add_data_flags(evaluate, eval_args.data, /*label_required=*/true);
  evaluate->add_option("--threshold", eval_args.threshold,
                       "decision threshold in (0,1)");

  BenchmarkArgs bench_args;
  auto* bench = app.add_subcommand(
      "benchmark", "grid of (mode, n, D) timing/accuracy runs");
  add_data_flags(bench, bench_args.data, /*label_required=*/true);
  bench->add_option("--grid-n", bench_args.grid_n, "training sizes, e.g. 500,1000")
      ->required();
  bench->add_option("--grid-d", bench_args.grid_d, "frequency counts, e.g. 10,50")
      ->required();
  bench->add_option("--modes", bench_args.modes, "subset of rff,vff");
  bench->add_option("--repeats", bench_args.repeats, "runs per cell (seeds S,S+1,...)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_args.seed, "base seed S");
  bench->add_option("--out", bench_args.out, "output CSV path")->required();
  bench->add_option("--preprocess", bench_args.preprocess.spec,
                    "none | standardize | standardize-pca:K");
  bench->add_option("--max-iters", bench_args.max_iters)->check(CLI::PositiveNumber);
  bench->add_option("--tol", bench_args.tol)->check(CLI::PositiveNumber);
  bench->add_option("--max-evals", bench_args.max_evals)
      ->check(CLI::NonNegativeNumber);

  KernelCheckArgs kernel_args;
  auto* kernel = app.add_subcommand(
      "kernel-check", "approximation error of the linearized kernel per D");
  kernel->add_option("--dims", kernel_args.dims, "input dimension");
  kernel->add_option("--sigma", kernel_args.sigma, "length-scale");
  kernel->add_option("--gamma", kernel_args.gamma, "kernel variance");
  kernel->add_option("--grid-d", kernel_args.grid_d, "frequency counts")->required();
  kernel->add_option("--pairs", kernel_args.pairs, "random input pairs");
  kernel->add_option("--seeds", kernel_args.seeds, "bases averaged per D");
  kernel->add_option("--seed", kernel_args.seed, "base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return fgpc::cli::kExitUsage;
  }

  Eigen::setNbThreads(threads);
  bench_args.threads = threads;

  return fgpc::cli::run_guarded([&]() -> int {
    if (train->parsed()) return cmd_train(train_args);
    if (predict->parsed()) return cmd_predict(predict_args);
    if (evaluate->parsed()) return cmd_evaluate(eval_args);
    if (bench->parsed()) return cmd_benchmark(bench_args);
    if (kernel->parsed()) return cmd_kernel_check(kernel_args);
    return fgpc::cli::kExitUsage;
  });
}
