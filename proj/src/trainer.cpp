#include "fgpc/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fgpc/errors.hpp"
#include "fgpc/rng.hpp"
#include "fgpc/variational.hpp"

namespace fgpc {

double init_sigma(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  Eigen::Index subset_size, std::uint64_t seed,
                  bool* degenerate) {
  if (degenerate != nullptr) *degenerate = false;
  if (X.rows() < 2) {
    throw std::invalid_argument("init_sigma: need at least two rows");
  }
  if (subset_size < 2) {
    throw std::invalid_argument("init_sigma: subset_size must be >= 2");
  }
  const Eigen::Index m = std::min(subset_size, X.rows());
  Rng rng(seed);
  const auto idx = rng.sample_without_replacement(X.rows(), m);
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      total += (X.row(idx[static_cast<std::size_t>(i)]) -
                X.row(idx[static_cast<std::size_t>(j)]))
                   .norm();
    }
  }
  const double pairs = 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
  const double mean = total / pairs;
  if (!(mean > 0.0)) {
    if (degenerate != nullptr) *degenerate = true;
    return 1.0;
  }
  return mean;
}

namespace {

constexpr std::uint64_t kSigmaStream = 1;

}  // namespace

std::pair<TrainedModel, TrainTrace> fit(const Dataset& dataset,
                                        const TrainConfig& config,
                                        const TransformSpec* preprocess) {
  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };

  if (dataset.n() < 2) {
    throw std::invalid_argument("fit: need at least two training rows");
  }
  if (config.num_frequencies < 1) {
    throw std::invalid_argument("fit: num_frequencies must be >= 1");
  }
  if (config.max_outer_iters < 1) {
    throw std::invalid_argument("fit: max_outer_iters must be >= 1");
  }
  if (!(config.rel_tol > 0.0)) {
    throw std::invalid_argument("fit: rel_tol must be positive");
  }
  for (Eigen::Index i = 0; i < dataset.n(); ++i) {
    if (dataset.y(i) != 0 && dataset.y(i) != 1) {
      throw std::invalid_argument("fit: labels must be 0 or 1");
    }
  }

  TrainTrace trace;
  Eigen::MatrixXd X;
  if (preprocess != nullptr && preprocess->kind != TransformKind::None) {
    X = apply_transform(*preprocess, dataset.X);
  } else {
    X = dataset.X;
  }
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const Eigen::VectorXd y = dataset.y.cast<double>();
  if (dataset.y.minCoeff() == dataset.y.maxCoeff()) {
    trace.warnings.push_back("training labels contain a single class");
  }

  FrequencyBasis basis =
      sample_frequencies(config.num_frequencies, d, config.seed);
  bool sigma_degenerate = false;
  const double sigma0 =
      init_sigma(X, std::max<Eigen::Index>(2, config.median_subset),
                 derive_seed(config.seed, kSigmaStream), &sigma_degenerate);
  if (sigma_degenerate) {
    trace.warnings.push_back(
        "sigma initialization degenerate (all subset rows coincide); using 1.0");
  }

  const ObjectiveMode obj_mode =
      config.mode == TrainMode::Rff ? ObjectiveMode::Rff : ObjectiveMode::Vff;
  VariationalObjective objective(X, y, basis, obj_mode, config.ridge_on_v);
  Eigen::VectorXd theta;
  if (config.mode == TrainMode::Rff) {
    theta = objective.pack_rff(sigma0, 1.0);
  } else {
    theta = objective.pack_vff(basis.W / sigma0, 1.0);
  }

  Eigen::VectorXd xi = Eigen::VectorXd::Ones(n);
  const ObjectiveFn callback = [&objective](const Eigen::VectorXd& t,
                                            Eigen::VectorXd& grad) {
    return objective.value_and_gradient(t, grad);
  };

  double prev_log_f = -std::numeric_limits<double>::infinity();
  trace.status = TrainStatus::BudgetExhausted;
  double gamma = 1.0;
  Eigen::MatrixXd Z;
  for (int iter = 1; iter <= config.max_outer_iters; ++iter) {
    try {
      gamma = objective.unpack_gamma(theta);
      Z = objective.feature_matrix(theta);
      const WeightPosterior post = compute_posterior(Z, y, gamma, xi);
      xi = update_xi(Z, post);
      objective.set_xi(xi);

      const CgResult step = cg_minimize(callback, theta, config.optimizer);
      if (step.status != CgStatus::NoOp) theta = step.x;

      gamma = objective.unpack_gamma(theta);
      Z = objective.feature_matrix(theta);
      const BoundDiagnostics diag = log_bound(Z, y, gamma, xi);

      TrainIteration rec;
      rec.iter = iter;
      rec.log_f = diag.log_f;
      rec.gamma = gamma;
      rec.scale_norm = config.mode == TrainMode::Rff
                           ? objective.unpack_sigma(theta)
                           : objective.unpack_v(theta).norm();
      rec.elapsed_seconds = elapsed();
      trace.iterations.push_back(rec);

      if (iter > 1 &&
          std::abs(diag.log_f - prev_log_f) <=
              config.rel_tol * std::abs(prev_log_f)) {
        trace.status = TrainStatus::Converged;
        prev_log_f = diag.log_f;
        break;
      }
      prev_log_f = diag.log_f;
    } catch (const NumericalError& e) {
      throw NumericalError("fit: outer iteration " + std::to_string(iter) +
                               ": " + e.what(),
                           e.pivot());
    }
  }

  TrainedModel model;
  model.mode = config.mode;
  model.gamma = gamma;
  if (config.mode == TrainMode::Rff) {
    model.basis = std::move(basis);
    model.sigma = objective.unpack_sigma(theta);
  } else {
    model.basis.W = objective.unpack_v(theta);
    model.basis.mode = BasisMode::Learnable;
    model.basis.seed = config.seed;
    model.sigma = 1.0;  // absorbed into V
  }
  Z = objective.feature_matrix(theta);
  WeightPosterior post;
  try {
    post = compute_posterior(Z, y, gamma, xi);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("fit: final posterior: ") + e.what(),
                         e.pivot());
  }
  model.mu = std::move(post.mu);
  model.sigma_matrix = std::move(post.Sigma);
  if (preprocess != nullptr) model.preprocessing = *preprocess;
  model.train_meta.n = n;
  model.train_meta.d = dataset.dim();
  model.train_meta.seed = config.seed;
  model.train_meta.outer_iters = static_cast<int>(trace.iterations.size());
  model.train_meta.final_log_f =
      trace.iterations.empty() ? 0.0 : trace.iterations.back().log_f;
  return {std::move(model), std::move(trace)};
}

}  // namespace fgpc
