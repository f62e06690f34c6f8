#include "fgpc/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "fgpc/errors.hpp"
#include "fgpc/variational.hpp"

namespace fgpc {

namespace {

constexpr double kPi = 3.14159265358979323846;

const Eigen::MatrixXd& transformed_input(const TrainedModel& model,
                                         const Eigen::Ref<const Eigen::MatrixXd>& X,
                                         Eigen::MatrixXd& storage) {
  if (model.preprocessing.kind == TransformKind::None) {
    if (X.cols() != model.feature_dim()) {
      throw std::invalid_argument(
          "predict: input has " + std::to_string(X.cols()) +
          " columns, model expects " + std::to_string(model.feature_dim()));
    }
    storage = X;
    return storage;
  }
  storage = apply_transform(model.preprocessing, X);
  if (storage.cols() != model.feature_dim()) {
    throw std::invalid_argument(
        "predict: preprocessing yields " + std::to_string(storage.cols()) +
        " columns, basis expects " + std::to_string(model.feature_dim()));
  }
  return storage;
}

}  // namespace

Eigen::VectorXd predict_proba(const TrainedModel& model,
                              const Eigen::Ref<const Eigen::MatrixXd>& X) {
  Eigen::MatrixXd storage;
  const Eigen::MatrixXd& Xp = transformed_input(model, X, storage);
  const Eigen::MatrixXd Z = project(Xp, model.basis, model.sigma);
  const Eigen::VectorXd mean = Z * model.mu;
  const Eigen::VectorXd var =
      (Z * model.sigma_matrix).cwiseProduct(Z).rowwise().sum();
  Eigen::VectorXd p(Z.rows());
  const double lo = std::nextafter(0.0, 1.0);
  const double hi = std::nextafter(1.0, 0.0);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double arg = mean(i) / std::sqrt(1.0 + (kPi / 8.0) * var(i));
    p(i) = std::min(std::max(sigmoid(arg), lo), hi);
  }
  return p;
}

Eigen::VectorXi predict_label(const TrainedModel& model,
                              const Eigen::Ref<const Eigen::MatrixXd>& X,
                              double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("predict_label: threshold must be in (0,1)");
  }
  const Eigen::VectorXd p = predict_proba(model, X);
  Eigen::VectorXi labels(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    labels(i) = p(i) >= threshold ? 1 : 0;
  }
  return labels;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& M) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) arr.push_back(M(i, j));
  }
  return arr;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::MatrixXd matrix_from_json(const json& arr, Eigen::Index rows,
                                 Eigen::Index cols, const char* name) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols) {
    throw CorruptModelError(std::string("model: field '") + name +
                            "' has wrong length");
  }
  Eigen::MatrixXd M(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const json& cell = arr[static_cast<std::size_t>(k++)];
      if (!cell.is_number()) {
        throw CorruptModelError(std::string("model: field '") + name +
                                "' holds a non-numeric entry");
      }
      M(i, j) = cell.get<double>();
    }
  }
  if (!M.allFinite()) {
    throw CorruptModelError(std::string("model: field '") + name +
                            "' holds non-finite values");
  }
  return M;
}

Eigen::VectorXd vector_from_json(const json& arr, Eigen::Index size,
                                 const char* name) {
  return matrix_from_json(arr, size, 1, name).col(0);
}

const char* kind_name(TransformKind kind) {
  switch (kind) {
    case TransformKind::None: return "none";
    case TransformKind::Standardize: return "standardize";
    case TransformKind::StandardizePca: return "standardize_pca";
  }
  return "none";
}

}  // namespace

void save_model(const TrainedModel& model, const std::string& path) {
  json doc;
  doc["format_version"] = model.format_version;
  doc["mode"] = model.mode == TrainMode::Rff ? "rff" : "vff";
  doc["dims"] = {{"n_train", model.train_meta.n},
                 {"d", model.feature_dim()},
                 {"D", model.num_frequencies()}};
  doc["basis"] = matrix_to_json(model.basis.W);
  doc["sigma"] = model.sigma;
  doc["gamma"] = model.gamma;
  doc["mu"] = vector_to_json(model.mu);
  doc["sigma_matrix"] = matrix_to_json(model.sigma_matrix);
  json pre;
  pre["kind"] = kind_name(model.preprocessing.kind);
  if (model.preprocessing.kind != TransformKind::None) {
    pre["means"] = vector_to_json(model.preprocessing.means);
    pre["stds"] = vector_to_json(model.preprocessing.stds);
    if (model.preprocessing.kind == TransformKind::StandardizePca) {
      pre["k"] = model.preprocessing.pca_components.rows();
      pre["components"] = matrix_to_json(model.preprocessing.pca_components);
    }
  }
  doc["preprocessing"] = pre;
  doc["train_meta"] = {{"n", model.train_meta.n},
                       {"d", model.train_meta.d},
                       {"seed", model.train_meta.seed},
                       {"outer_iters", model.train_meta.outer_iters},
                       {"final_log_f", model.train_meta.final_log_f}};

  std::ofstream out(path);
  if (!out) {
    throw std::invalid_argument("save_model: cannot write '" + path + "'");
  }
  out << doc.dump(2) << '\n';
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("load_model: cannot open '" + path + "'");
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw CorruptModelError(std::string("model: not valid JSON: ") + e.what());
  }

  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
    throw CorruptModelError("model: missing format_version");
  }
  const int version = doc["format_version"].get<int>();
  if (version != kModelFormatVersion) {
    throw UnsupportedVersionError("model: format_version " +
                                  std::to_string(version) +
                                  " is not supported (expected " +
                                  std::to_string(kModelFormatVersion) + ")");
  }

  TrainedModel model;
  try {
    model.format_version = version;
    const std::string mode = doc.at("mode").get<std::string>();
    if (mode == "rff") {
      model.mode = TrainMode::Rff;
    } else if (mode == "vff") {
      model.mode = TrainMode::Vff;
    } else {
      throw CorruptModelError("model: unknown mode '" + mode + "'");
    }
    const json& dims = doc.at("dims");
    const auto n_train = dims.at("n_train").get<Eigen::Index>();
    const auto d = dims.at("d").get<Eigen::Index>();
    const auto D = dims.at("D").get<Eigen::Index>();
    if (D < 1 || d < 1) {
      throw CorruptModelError("model: dims must be positive");
    }
    model.basis.W = matrix_from_json(doc.at("basis"), D, d, "basis");
    model.basis.mode =
        model.mode == TrainMode::Rff ? BasisMode::FixedRandom : BasisMode::Learnable;
    model.sigma = doc.at("sigma").get<double>();
    model.gamma = doc.at("gamma").get<double>();
    if (!(model.sigma > 0.0) || !std::isfinite(model.sigma) ||
        !(model.gamma > 0.0) || !std::isfinite(model.gamma)) {
      throw CorruptModelError("model: sigma and gamma must be positive finite");
    }
    model.mu = vector_from_json(doc.at("mu"), 2 * D, "mu");
    model.sigma_matrix =
        matrix_from_json(doc.at("sigma_matrix"), 2 * D, 2 * D, "sigma_matrix");

    const json& pre = doc.at("preprocessing");
    const std::string kind = pre.at("kind").get<std::string>();
    if (kind == "none") {
      model.preprocessing.kind = TransformKind::None;
    } else if (kind == "standardize" || kind == "standardize_pca") {
      model.preprocessing.kind = kind == "standardize"
                                     ? TransformKind::Standardize
                                     : TransformKind::StandardizePca;
      const json& means = pre.at("means");
      const auto dim_in = static_cast<Eigen::Index>(means.size());
      model.preprocessing.means = vector_from_json(means, dim_in, "means");
      model.preprocessing.stds = vector_from_json(pre.at("stds"), dim_in, "stds");
      if ((model.preprocessing.stds.array() <= 0.0).any()) {
        throw CorruptModelError("model: preprocessing stds must be positive");
      }
      if (kind == "standardize_pca") {
        const auto k = pre.at("k").get<Eigen::Index>();
        model.preprocessing.pca_components =
            matrix_from_json(pre.at("components"), k, dim_in, "components");
      }
    } else {
      throw CorruptModelError("model: unknown preprocessing kind '" + kind + "'");
    }

    const json& meta = doc.at("train_meta");
    model.train_meta.n = meta.at("n").get<Eigen::Index>();
    model.train_meta.d = meta.at("d").get<Eigen::Index>();
    model.train_meta.seed = meta.at("seed").get<std::uint64_t>();
    model.train_meta.outer_iters = meta.at("outer_iters").get<int>();
    model.train_meta.final_log_f = meta.at("final_log_f").get<double>();
  } catch (const json::exception& e) {
    throw CorruptModelError(std::string("model: malformed document: ") + e.what());
  }

  // structural invariants
  const Eigen::Index m = model.mu.size();
  if (model.sigma_matrix.rows() != m || model.sigma_matrix.cols() != m) {
    throw CorruptModelError("model: mu and sigma_matrix dimensions disagree");
  }
  if (model.preprocessing.kind != TransformKind::None &&
      model.preprocessing.output_dim() != model.feature_dim()) {
    throw CorruptModelError(
        "model: preprocessing output does not match basis dimension");
  }
  const double scale = model.sigma_matrix.cwiseAbs().maxCoeff();
  if ((model.sigma_matrix - model.sigma_matrix.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, scale)) {
    throw CorruptModelError("model: sigma_matrix is not symmetric");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(model.sigma_matrix);
  if (llt.info() != Eigen::Success) {
    throw CorruptModelError("model: sigma_matrix is not positive definite");
  }
  if (model.preprocessing.kind == TransformKind::StandardizePca) {
    const Eigen::MatrixXd& C = model.preprocessing.pca_components;
    const Eigen::MatrixXd gram = C * C.transpose();
    if ((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols()))
            .cwiseAbs()
            .maxCoeff() > 1e-8) {
      throw CorruptModelError("model: PCA components are not orthonormal");
    }
  }
  return model;
}

}  // namespace fgpc
