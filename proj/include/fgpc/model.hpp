#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "fgpc/data.hpp"
#include "fgpc/fourier.hpp"

namespace fgpc {

enum class TrainMode { Rff, Vff };

constexpr int kModelFormatVersion = 1;

struct TrainMeta {
  Eigen::Index n = 0;  // training rows
  Eigen::Index d = 0;  // raw input dimension (before preprocessing)
  std::uint64_t seed = 0;
  int outer_iters = 0;
  double final_log_f = 0.0;
};

/// Frozen classifier: feature basis, hyperparameters, weight posterior and
/// the preprocessing transform. Immutable once built; safe to share across
/// threads. For Vff the length-scale is absorbed into the basis and sigma
/// is recorded as 1.
struct TrainedModel {
  int format_version = kModelFormatVersion;
  TrainMode mode = TrainMode::Rff;
  FrequencyBasis basis;
  double sigma = 1.0;
  double gamma = 1.0;
  Eigen::VectorXd mu;           // 2D
  Eigen::MatrixXd sigma_matrix; // 2D x 2D posterior covariance
  TransformSpec preprocessing;
  TrainMeta train_meta;

  Eigen::Index feature_dim() const { return basis.input_dim(); }
  Eigen::Index num_frequencies() const { return basis.num_frequencies(); }
  /// Raw input dimension expected by predict (before preprocessing).
  Eigen::Index input_dim() const {
    return preprocessing.kind == TransformKind::None ? basis.input_dim()
                                                     : preprocessing.input_dim();
  }
};

/// Class-1 probabilities: sigmoid(z.mu / sqrt(1 + (pi/8) z' Sigma z)) per
/// row, after applying the stored preprocessing. O(D^2) per row, independent
/// of the training set size. Outputs are clamped to the open interval (0,1).
Eigen::VectorXd predict_proba(const TrainedModel& model,
                              const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Hard labels: 1 iff probability >= threshold (boundary maps to 1).
Eigen::VectorXi predict_label(const TrainedModel& model,
                              const Eigen::Ref<const Eigen::MatrixXd>& X,
                              double threshold = 0.5);

/// Versioned UTF-8 JSON document; numeric arrays round-trip bit-exactly
/// through shortest-round-trip decimal serialization.
void save_model(const TrainedModel& model, const std::string& path);

/// Validates format_version and every model invariant before returning.
TrainedModel load_model(const std::string& path);

}  // namespace fgpc
