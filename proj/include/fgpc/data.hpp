#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace fgpc {

/// Feature matrix with binary labels in {0,1}. Ingestion guarantees all
/// entries finite and labels binary, or fails with a located error.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXi y;
  std::vector<std::string> feature_names;  // empty when no header

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }
};

enum class TransformKind { None, Standardize, StandardizePca };

/// Fitted preprocessing transform, frozen from training statistics.
/// Constant columns get std 1 so they map to zeros instead of failing.
struct TransformSpec {
  TransformKind kind = TransformKind::None;
  Eigen::VectorXd means;
  Eigen::VectorXd stds;
  Eigen::MatrixXd pca_components;  // k x d, orthonormal rows

  Eigen::Index input_dim() const {
    return kind == TransformKind::None ? -1 : means.size();
  }
  Eigen::Index output_dim() const {
    switch (kind) {
      case TransformKind::None: return -1;
      case TransformKind::Standardize: return means.size();
      case TransformKind::StandardizePca: return pca_components.rows();
    }
    return -1;
  }
};

/// Load a CSV file ('.' decimal separator, comma delimited, UTF-8).
/// Labels accept {0,1} and {-1,1}; -1 maps to 0. The label column is
/// named (header required) or given as a zero-based index.
Dataset load_csv(const std::string& path, const std::string& label_column);
Dataset load_csv(const std::string& path, Eigen::Index label_column,
                 bool has_header);

/// Feature-only CSV (no label column), same dialect and finiteness checks.
Eigen::MatrixXd load_features_csv(const std::string& path, bool has_header,
                                  std::vector<std::string>* names = nullptr);

/// Column-wise z-scoring statistics from training data (population std).
TransformSpec fit_standardize(const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Top-k principal directions of already-standardized data. The returned
/// spec expects standardized input (means 0, stds 1). Sign convention:
/// the largest-magnitude entry of each component is positive.
TransformSpec fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& X_standardized,
                      Eigen::Index k);

/// Standardize then PCA, composed into a single spec for raw inputs.
TransformSpec fit_standardize_pca(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  Eigen::Index k);

Eigen::MatrixXd apply_transform(const TransformSpec& spec,
                                const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Draw n_train/2 instances per class without replacement (seeded).
/// Both outputs keep rows in their original relative order.
std::pair<Dataset, Dataset> balanced_sample(const Dataset& dataset,
                                            Eigen::Index n_train,
                                            std::uint64_t seed);

double overall_accuracy(const Eigen::Ref<const Eigen::VectorXi>& pred,
                        const Eigen::Ref<const Eigen::VectorXi>& truth);

}  // namespace fgpc
