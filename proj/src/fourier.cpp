#include "fgpc/fourier.hpp"

#include <cmath>
#include <stdexcept>

#include "fgpc/rng.hpp"

namespace fgpc {

FrequencyBasis sample_frequencies(Eigen::Index num_frequencies,
                                  Eigen::Index input_dim, std::uint64_t seed) {
  if (num_frequencies < 1) {
    throw std::invalid_argument("sample_frequencies: need at least one frequency");
  }
  if (input_dim < 1) {
    throw std::invalid_argument("sample_frequencies: input_dim must be >= 1");
  }
  FrequencyBasis basis;
  basis.W.resize(num_frequencies, input_dim);
  basis.mode = BasisMode::FixedRandom;
  basis.seed = seed;
  Rng rng(seed);
  // row-major fill order, frozen as part of the reproducibility contract
  for (Eigen::Index i = 0; i < num_frequencies; ++i) {
    for (Eigen::Index j = 0; j < input_dim; ++j) {
      basis.W(i, j) = rng.normal();
    }
  }
  return basis;
}

void project_into(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::MatrixXd>& W, double sigma,
                  Eigen::MatrixXd& Z) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("project: sigma must be positive");
  }
  if (X.cols() != W.cols()) {
    throw std::invalid_argument("project: input dimension " +
                                std::to_string(X.cols()) +
                                " does not match basis dimension " +
                                std::to_string(W.cols()));
  }
  const Eigen::Index n = X.rows();
  const Eigen::Index D = W.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(D));
  Z.resize(n, 2 * D);
  // angles first, then cos/sin pairs; block by rows to bound scratch
  constexpr Eigen::Index kBlock = 4096;
  Eigen::MatrixXd T;
  for (Eigen::Index r0 = 0; r0 < n; r0 += kBlock) {
    const Eigen::Index b = std::min(kBlock, n - r0);
    T.noalias() = X.middleRows(r0, b) * W.transpose();
    T *= (1.0 / sigma);
    for (Eigen::Index j = 0; j < D; ++j) {
      Z.block(r0, 2 * j, b, 1) = T.col(j).array().cos() * scale;
      Z.block(r0, 2 * j + 1, b, 1) = T.col(j).array().sin() * scale;
    }
  }
}

Eigen::MatrixXd project(const Eigen::Ref<const Eigen::MatrixXd>& X,
                        const FrequencyBasis& basis, double sigma) {
  Eigen::MatrixXd Z;
  project_into(X, basis.W, sigma, Z);
  return Z;
}

double se_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                 const Eigen::Ref<const Eigen::VectorXd>& x2, double sigma,
                 double gamma) {
  if (x.size() != x2.size()) {
    throw std::invalid_argument("se_kernel: dimension mismatch");
  }
  if (!(sigma > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("se_kernel: sigma and gamma must be positive");
  }
  return gamma * std::exp(-(x - x2).squaredNorm() / (2.0 * sigma * sigma));
}

double approx_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& x2,
                     const FrequencyBasis& basis, double sigma, double gamma) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("approx_kernel: gamma must be positive");
  }
  const Eigen::MatrixXd zx = project(x.transpose(), basis, sigma);
  const Eigen::MatrixXd zx2 = project(x2.transpose(), basis, sigma);
  return gamma * zx.row(0).dot(zx2.row(0));
}

}  // namespace fgpc
