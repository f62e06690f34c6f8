#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fgpc/cg.hpp"
#include "fgpc/data.hpp"
#include "fgpc/model.hpp"

namespace fgpc {

struct TrainConfig {
  TrainMode mode = TrainMode::Rff;
  Eigen::Index num_frequencies = 100;  // D
  std::uint64_t seed = 0;
  int max_outer_iters = 50;
  double rel_tol = 1e-5;               // relative change of log F
  Eigen::Index median_subset = 1000;   // rows used for the sigma init
  OptimizerConfig optimizer;
  bool ridge_on_v = false;
};

struct TrainIteration {
  int iter = 0;
  double log_f = 0.0;
  double scale_norm = 0.0;  // sigma (Rff) or Frobenius norm of V (Vff)
  double gamma = 0.0;
  double elapsed_seconds = 0.0;
};

enum class TrainStatus { Converged, BudgetExhausted };

/// Per-outer-iteration training record. The log_f sequence is
/// non-decreasing up to floating-point slack.
struct TrainTrace {
  std::vector<TrainIteration> iterations;
  TrainStatus status = TrainStatus::BudgetExhausted;
  std::vector<std::string> warnings;
};

/// Mean pairwise Euclidean distance over a seeded subset of at most
/// subset_size rows. Falls back to 1.0 (flagging *degenerate) when every
/// selected row coincides.
double init_sigma(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  Eigen::Index subset_size, std::uint64_t seed,
                  bool* degenerate = nullptr);

/// Train by alternating the closed-form xi update with conjugate-gradient
/// ascent on (feature parameters, gamma), warm-started each outer
/// iteration. Initialization: xi = 1, gamma = 1, sigma from init_sigma;
/// both modes draw the same seeded frequency matrix.
///
/// When `preprocess` is given it is applied to the training inputs and
/// stored in the returned model; the dataset itself is taken as-is
/// otherwise. Balancing is the data pipeline's job, not fit's.
std::pair<TrainedModel, TrainTrace> fit(const Dataset& dataset,
                                        const TrainConfig& config,
                                        const TransformSpec* preprocess = nullptr);

}  // namespace fgpc
