#include "fgpc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "fgpc/rng.hpp"

namespace fgpc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

double parse_cell(std::string_view cell, std::size_t line_no, std::size_t col) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    throw std::invalid_argument("CSV: unparseable cell '" + std::string(cell) +
                                "' at line " + std::to_string(line_no) +
                                ", column " + std::to_string(col));
  }
  if (!std::isfinite(value)) {
    throw std::invalid_argument("CSV: non-finite value '" + std::string(cell) +
                                "' at line " + std::to_string(line_no) +
                                ", column " + std::to_string(col));
  }
  return value;
}

Dataset load_csv_impl(const std::string& path, const std::string& label_name,
                      Eigen::Index label_index, bool by_name, bool has_header) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("CSV: cannot open '" + path + "'");
  }
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  if (has_header) {
    if (!std::getline(in, line)) {
      throw std::invalid_argument("CSV: '" + path + "' is empty");
    }
    ++line_no;
    for (const auto cell : split_csv_line(line)) header.emplace_back(cell);
  }

  Eigen::Index label_col = label_index;
  if (by_name) {
    const auto it = std::find(header.begin(), header.end(), label_name);
    if (it == header.end()) {
      throw std::invalid_argument("CSV: label column '" + label_name +
                                  "' not found in header of '" + path + "'");
    }
    label_col = static_cast<Eigen::Index>(it - header.begin());
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> labels_raw;
  Eigen::Index ncols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    const auto width = static_cast<Eigen::Index>(cells.size());
    if (ncols < 0) {
      ncols = width;
      if (label_col < 0 || label_col >= ncols) {
        throw std::invalid_argument(
            "CSV: label column index " + std::to_string(label_col) +
            " out of range for " + std::to_string(ncols) + " columns");
      }
    } else if (width != ncols) {
      throw std::invalid_argument("CSV: line " + std::to_string(line_no) +
                                  " has " + std::to_string(width) +
                                  " cells, expected " + std::to_string(ncols));
    }
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(ncols - 1));
    for (Eigen::Index c = 0; c < ncols; ++c) {
      const double v = parse_cell(cells[static_cast<std::size_t>(c)], line_no,
                                  static_cast<std::size_t>(c) + 1);
      if (c == label_col) {
        labels_raw.push_back(v);
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::invalid_argument("CSV: '" + path + "' contains no data rows");
  }

  std::set<double> bad_labels;
  for (const double v : labels_raw) {
    if (v != 0.0 && v != 1.0 && v != -1.0) bad_labels.insert(v);
  }
  if (!bad_labels.empty()) {
    std::ostringstream msg;
    msg << "CSV: labels must be in {0,1} or {-1,1}; found";
    for (const double v : bad_labels) msg << ' ' << v;
    throw std::invalid_argument(msg.str());
  }

  Dataset ds;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = ncols - 1;
  ds.X.resize(n, d);
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      ds.X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    ds.y(i) = labels_raw[static_cast<std::size_t>(i)] == 1.0 ? 1 : 0;
  }
  if (!header.empty()) {
    for (Eigen::Index c = 0; c < ncols; ++c) {
      if (c != label_col) {
        ds.feature_names.push_back(header[static_cast<std::size_t>(c)]);
      }
    }
  }
  return ds;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
  return load_csv_impl(path, label_column, -1, /*by_name=*/true,
                       /*has_header=*/true);
}

Dataset load_csv(const std::string& path, Eigen::Index label_column,
                 bool has_header) {
  return load_csv_impl(path, {}, label_column, /*by_name=*/false, has_header);
}

Eigen::MatrixXd load_features_csv(const std::string& path, bool has_header,
                                  std::vector<std::string>* names) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("CSV: cannot open '" + path + "'");
  }
  std::string line;
  std::size_t line_no = 0;
  if (has_header) {
    if (!std::getline(in, line)) {
      throw std::invalid_argument("CSV: '" + path + "' is empty");
    }
    ++line_no;
    if (names != nullptr) {
      names->clear();
      for (const auto cell : split_csv_line(line)) names->emplace_back(cell);
    }
  }
  std::vector<std::vector<double>> rows;
  Eigen::Index ncols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    const auto width = static_cast<Eigen::Index>(cells.size());
    if (ncols < 0) {
      ncols = width;
    } else if (width != ncols) {
      throw std::invalid_argument("CSV: line " + std::to_string(line_no) +
                                  " has " + std::to_string(width) +
                                  " cells, expected " + std::to_string(ncols));
    }
    std::vector<double> row(static_cast<std::size_t>(ncols));
    for (Eigen::Index c = 0; c < ncols; ++c) {
      row[static_cast<std::size_t>(c)] =
          parse_cell(cells[static_cast<std::size_t>(c)], line_no,
                     static_cast<std::size_t>(c) + 1);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::invalid_argument("CSV: '" + path + "' contains no data rows");
  }
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), ncols);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < ncols; ++j) {
      X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return X;
}

TransformSpec fit_standardize(const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (X.rows() < 1) {
    throw std::invalid_argument("fit_standardize: need at least one row");
  }
  TransformSpec spec;
  spec.kind = TransformKind::Standardize;
  const auto n = static_cast<double>(X.rows());
  spec.means = X.colwise().mean();
  spec.stds.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var = (X.col(j).array() - spec.means(j)).square().sum() / n;
    double sd = std::sqrt(var);
    // near-constant columns map to ~zeros instead of exploding
    if (sd <= 1e-12 * (1.0 + std::abs(spec.means(j)))) sd = 1.0;
    spec.stds(j) = sd;
  }
  return spec;
}

namespace {

void fix_component_signs(Eigen::MatrixXd& components) {
  for (Eigen::Index i = 0; i < components.rows(); ++i) {
    Eigen::Index arg = 0;
    components.row(i).cwiseAbs().maxCoeff(&arg);
    if (components(i, arg) < 0.0) components.row(i) = -components.row(i);
  }
}

// Replace near-zero rows (rank-deficient data) with canonical directions
// orthogonal to everything above, keeping the result deterministic.
void complete_orthonormal(Eigen::MatrixXd& components,
                          const std::vector<Eigen::Index>& degenerate) {
  const Eigen::Index d = components.cols();
  for (const Eigen::Index row : degenerate) {
    for (Eigen::Index e = 0; e < d; ++e) {
      Eigen::VectorXd cand = Eigen::VectorXd::Unit(d, e);
      for (Eigen::Index r = 0; r < components.rows(); ++r) {
        if (r == row) continue;
        cand -= components.row(r).dot(cand) * components.row(r).transpose();
      }
      const double nrm = cand.norm();
      if (nrm > 1e-6) {
        components.row(row) = cand.transpose() / nrm;
        break;
      }
    }
  }
}

}  // namespace

TransformSpec fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& X_standardized,
                      Eigen::Index k) {
  const Eigen::Index n = X_standardized.rows();
  const Eigen::Index d = X_standardized.cols();
  if (k < 1 || k > std::min(n, d)) {
    throw std::invalid_argument("fit_pca: k must be in [1, min(n, d)]");
  }
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  Eigen::MatrixXd components(k, d);
  std::vector<Eigen::Index> degenerate;
  if (d <= n) {
    Eigen::MatrixXd cov = (X_standardized.transpose() * X_standardized) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) {
      throw std::invalid_argument("fit_pca: eigen-decomposition failed");
    }
    // eigenvalues come ascending; take the top k
    for (Eigen::Index i = 0; i < k; ++i) {
      components.row(i) = es.eigenvectors().col(d - 1 - i).transpose();
    }
  } else {
    Eigen::MatrixXd gram = (X_standardized * X_standardized.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.info() != Eigen::Success) {
      throw std::invalid_argument("fit_pca: eigen-decomposition failed");
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::VectorXd u =
          X_standardized.transpose() * es.eigenvectors().col(n - 1 - i);
      const double nrm = u.norm();
      if (nrm > 1e-10) {
        components.row(i) = u.transpose() / nrm;
      } else {
        components.row(i).setZero();
        degenerate.push_back(i);
      }
    }
    complete_orthonormal(components, degenerate);
  }
  fix_component_signs(components);

  TransformSpec spec;
  spec.kind = TransformKind::StandardizePca;
  spec.means = Eigen::VectorXd::Zero(d);
  spec.stds = Eigen::VectorXd::Ones(d);
  spec.pca_components = std::move(components);
  return spec;
}

TransformSpec fit_standardize_pca(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  Eigen::Index k) {
  TransformSpec std_spec = fit_standardize(X);
  const Eigen::MatrixXd Xs = apply_transform(std_spec, X);
  TransformSpec pca = fit_pca(Xs, k);
  pca.means = std::move(std_spec.means);
  pca.stds = std::move(std_spec.stds);
  return pca;
}

Eigen::MatrixXd apply_transform(const TransformSpec& spec,
                                const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (spec.kind == TransformKind::None) return X;
  if (X.cols() != spec.means.size()) {
    throw std::invalid_argument("apply_transform: input has " +
                                std::to_string(X.cols()) +
                                " columns, transform expects " +
                                std::to_string(spec.means.size()));
  }
  Eigen::MatrixXd Xs =
      (X.rowwise() - spec.means.transpose()).array().rowwise() /
      spec.stds.transpose().array();
  if (spec.kind == TransformKind::Standardize) return Xs;
  return Xs * spec.pca_components.transpose();
}

std::pair<Dataset, Dataset> balanced_sample(const Dataset& dataset,
                                            Eigen::Index n_train,
                                            std::uint64_t seed) {
  if (n_train < 2 || n_train % 2 != 0) {
    throw std::invalid_argument(
        "balanced_sample: n_train must be an even number >= 2");
  }
  const Eigen::Index per_class = n_train / 2;
  std::vector<Eigen::Index> class_idx[2];
  for (Eigen::Index i = 0; i < dataset.n(); ++i) {
    class_idx[dataset.y(i) == 1 ? 1 : 0].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    const auto have = static_cast<Eigen::Index>(class_idx[c].size());
    if (have < per_class) {
      throw std::invalid_argument(
          "balanced_sample: class " + std::to_string(c) + " has " +
          std::to_string(have) + " instances, need " +
          std::to_string(per_class) + " (short by " +
          std::to_string(per_class - have) + ")");
    }
  }

  Rng rng(seed);
  std::vector<bool> picked(static_cast<std::size_t>(dataset.n()), false);
  for (int c = 0; c < 2; ++c) {
    const auto local = rng.sample_without_replacement(
        static_cast<Eigen::Index>(class_idx[c].size()), per_class);
    for (const Eigen::Index li : local) {
      picked[static_cast<std::size_t>(class_idx[c][static_cast<std::size_t>(li)])] = true;
    }
  }

  Dataset train, rest;
  train.X.resize(n_train, dataset.dim());
  train.y.resize(n_train);
  rest.X.resize(dataset.n() - n_train, dataset.dim());
  rest.y.resize(dataset.n() - n_train);
  train.feature_names = dataset.feature_names;
  rest.feature_names = dataset.feature_names;
  Eigen::Index ti = 0, ri = 0;
  for (Eigen::Index i = 0; i < dataset.n(); ++i) {
    if (picked[static_cast<std::size_t>(i)]) {
      train.X.row(ti) = dataset.X.row(i);
      train.y(ti++) = dataset.y(i);
    } else {
      rest.X.row(ri) = dataset.X.row(i);
      rest.y(ri++) = dataset.y(i);
    }
  }
  return {std::move(train), std::move(rest)};
}

double overall_accuracy(const Eigen::Ref<const Eigen::VectorXi>& pred,
                        const Eigen::Ref<const Eigen::VectorXi>& truth) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("overall_accuracy: length mismatch");
  }
  if (pred.size() == 0) {
    throw std::invalid_argument("overall_accuracy: empty inputs");
  }
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (pred(i) == truth(i)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace fgpc
