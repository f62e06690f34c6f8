#include "fgpc/variational.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fgpc/errors.hpp"

namespace fgpc {

double lambda_of_xi(double xi) {
  if (std::abs(xi) < 1e-8) return 0.125;
  return std::tanh(0.5 * xi) / (4.0 * xi);
}

double sigmoid_bound_rhs(double x, double xi) {
  return lambda_of_xi(xi) * (x * x - xi * xi) + 0.5 * (x - xi) + softplus(xi);
}

namespace {

constexpr Eigen::Index kRowBlock = 4096;

Eigen::VectorXd lambda_vector(const Eigen::Ref<const Eigen::VectorXd>& xi) {
  Eigen::VectorXd lam(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) lam(i) = lambda_of_xi(xi(i));
  return lam;
}

// A = I + 2*gamma * Z' Lambda Z, accumulated in row blocks so scratch stays
// bounded. Fixed block size keeps the summation order deterministic.
void build_scaled_precision(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                            const Eigen::VectorXd& lam, double gamma,
                            Eigen::MatrixXd& A, Eigen::MatrixXd& scratch) {
  const Eigen::Index n = Z.rows();
  const Eigen::Index m = Z.cols();
  A.setZero(m, m);
  for (Eigen::Index r0 = 0; r0 < n; r0 += kRowBlock) {
    const Eigen::Index b = std::min(kRowBlock, n - r0);
    scratch = lam.segment(r0, b).array().sqrt().matrix().asDiagonal() *
              Z.middleRows(r0, b);
    A.selfadjointView<Eigen::Lower>().rankUpdate(scratch.transpose(),
                                                 2.0 * gamma);
  }
  A.triangularView<Eigen::StrictlyUpper>() =
      A.triangularView<Eigen::StrictlyLower>().transpose();
  A.diagonal().array() += 1.0;
}

// First non-positive pivot of an (attempted) Cholesky factorization.
// Cold path, used only to annotate errors.
Eigen::Index failing_pivot(Eigen::MatrixXd A) {
  const Eigen::Index m = A.rows();
  for (Eigen::Index j = 0; j < m; ++j) {
    double piv = A(j, j);
    for (Eigen::Index k = 0; k < j; ++k) piv -= A(j, k) * A(j, k);
    if (!(piv > 0.0) || !std::isfinite(piv)) return j;
    piv = std::sqrt(piv);
    A(j, j) = piv;
    for (Eigen::Index i = j + 1; i < m; ++i) {
      double s = A(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= A(i, k) * A(j, k);
      A(i, j) = s / piv;
    }
  }
  return -1;
}

// Factor SPD matrix A, retrying with escalating trace-scaled diagonal
// jitter (1e-10 up to 1e-4 of the mean diagonal) before giving up.
// Eigen's LLT does not flag NaN inputs, so finiteness is checked up front.
void cholesky_with_jitter(Eigen::LLT<Eigen::MatrixXd>& llt, Eigen::MatrixXd& A,
                          const char* context) {
  if (!A.allFinite()) {
    const Eigen::Index pivot = failing_pivot(A);
    throw NumericalError(std::string(context) +
                             ": non-finite precision matrix (pivot " +
                             std::to_string(pivot) + ")",
                         pivot);
  }
  llt.compute(A);
  if (llt.info() == Eigen::Success) return;
  const double scale = A.trace() / static_cast<double>(A.rows());
  for (double level = 1e-10; level <= 1.0001e-4; level *= 10.0) {
    A.diagonal().array() += level * scale;
    llt.compute(A);
    if (llt.info() == Eigen::Success) return;
  }
  throw NumericalError(std::string(context) +
                           ": Cholesky factorization failed at pivot " +
                           std::to_string(failing_pivot(A)),
                       failing_pivot(A));
}

void check_posterior_inputs(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                            const Eigen::Ref<const Eigen::VectorXd>& y,
                            double gamma,
                            const Eigen::Ref<const Eigen::VectorXd>& xi) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("compute_posterior: gamma must be positive");
  }
  if (Z.rows() != y.size() || Z.rows() != xi.size()) {
    throw std::invalid_argument("compute_posterior: Z, y, xi row counts differ");
  }
  if (Z.cols() % 2 != 0) {
    throw std::invalid_argument("compute_posterior: Z must have 2*D columns");
  }
}

}  // namespace

WeightPosterior compute_posterior(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                                  const Eigen::Ref<const Eigen::VectorXd>& y,
                                  double gamma,
                                  const Eigen::Ref<const Eigen::VectorXd>& xi) {
  check_posterior_inputs(Z, y, gamma, xi);
  const Eigen::Index m = Z.cols();
  const Eigen::VectorXd lam = lambda_vector(xi);
  Eigen::MatrixXd A, scratch;
  build_scaled_precision(Z, lam, gamma, A, scratch);
  Eigen::LLT<Eigen::MatrixXd> llt;
  cholesky_with_jitter(llt, A, "compute_posterior");

  WeightPosterior post;
  post.gamma = gamma;
  post.chol = llt.matrixL();
  const Eigen::VectorXd ztv = Z.transpose() * (y.array() - 0.5).matrix();
  post.mu = gamma * llt.solve(ztv);
  post.Sigma = gamma * llt.solve(Eigen::MatrixXd::Identity(m, m));
  // symmetrize away solve round-off
  post.Sigma = 0.5 * (post.Sigma + post.Sigma.transpose()).eval();
  return post;
}

Eigen::VectorXd update_xi(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                          const WeightPosterior& posterior) {
  if (Z.cols() != posterior.mu.size()) {
    throw std::invalid_argument("update_xi: Z and posterior dimensions differ");
  }
  const Eigen::Index n = Z.rows();
  Eigen::VectorXd xi(n);
  Eigen::MatrixXd solved;
  for (Eigen::Index r0 = 0; r0 < n; r0 += kRowBlock) {
    const Eigen::Index b = std::min(kRowBlock, n - r0);
    // z_i' Sigma z_i = gamma |L^{-1} z_i|^2 without forming Z Sigma Z'
    solved = posterior.chol.triangularView<Eigen::Lower>().solve(
        Z.middleRows(r0, b).transpose());
    xi.segment(r0, b) =
        (posterior.gamma * solved.colwise().squaredNorm().transpose().array() +
         (Z.middleRows(r0, b) * posterior.mu).array().square())
            .sqrt();
  }
  return xi;
}

BoundDiagnostics log_bound(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                           const Eigen::Ref<const Eigen::VectorXd>& y,
                           double gamma,
                           const Eigen::Ref<const Eigen::VectorXd>& xi) {
  check_posterior_inputs(Z, y, gamma, xi);
  const Eigen::VectorXd lam = lambda_vector(xi);
  Eigen::MatrixXd A, scratch;
  build_scaled_precision(Z, lam, gamma, A, scratch);
  Eigen::LLT<Eigen::MatrixXd> llt;
  cholesky_with_jitter(llt, A, "log_bound");

  const double logdet_a =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const Eigen::VectorXd ztv = Z.transpose() * (y.array() - 0.5).matrix();
  const double quad = gamma * ztv.dot(llt.solve(ztv));

  BoundDiagnostics out;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    out.log_c += lam(i) * xi(i) * xi(i) + 0.5 * xi(i) - softplus(xi(i));
  }
  out.objective = -logdet_a + quad;
  out.log_f = out.log_c + 0.5 * out.objective;
  return out;
}

VariationalObjective::VariationalObjective(
    const Eigen::Ref<const Eigen::MatrixXd>& X,
    const Eigen::Ref<const Eigen::VectorXd>& y, FrequencyBasis basis,
    ObjectiveMode mode, bool ridge_on_v)
    : X_(X),
      v_((y.array() - 0.5).matrix()),
      basis_(std::move(basis)),
      mode_(mode),
      ridge_on_v_(ridge_on_v) {
  if (X_.rows() != v_.size()) {
    throw std::invalid_argument("VariationalObjective: X and y row counts differ");
  }
  if (X_.cols() != basis_.input_dim()) {
    throw std::invalid_argument(
        "VariationalObjective: X and basis dimensions differ");
  }
  if (mode_ == ObjectiveMode::Rff) {
    xw_.noalias() = X_ * basis_.W.transpose();
  }
}

Eigen::Index VariationalObjective::dim() const {
  if (mode_ == ObjectiveMode::Rff) return 2;
  return basis_.num_frequencies() * basis_.input_dim() + 1;
}

void VariationalObjective::set_xi(const Eigen::Ref<const Eigen::VectorXd>& xi) {
  if (xi.size() != X_.rows()) {
    throw std::invalid_argument("set_xi: expected one xi per training row");
  }
  lam_ = lambda_vector(xi);
}

Eigen::VectorXd VariationalObjective::pack_rff(double sigma,
                                               double gamma) const {
  Eigen::VectorXd theta(2);
  theta << std::log(sigma), std::log(gamma);
  return theta;
}

Eigen::VectorXd VariationalObjective::pack_vff(
    const Eigen::Ref<const Eigen::MatrixXd>& V, double gamma) const {
  const Eigen::Index D = basis_.num_frequencies();
  const Eigen::Index d = basis_.input_dim();
  Eigen::VectorXd theta(D * d + 1);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>>(theta.data(), D, d) = V;
  theta(D * d) = std::log(gamma);
  return theta;
}

double VariationalObjective::unpack_gamma(
    const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  return std::exp(theta(theta.size() - 1));
}

double VariationalObjective::unpack_sigma(
    const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  return std::exp(theta(0));
}

Eigen::MatrixXd VariationalObjective::unpack_v(
    const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  const Eigen::Index D = basis_.num_frequencies();
  const Eigen::Index d = basis_.input_dim();
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(theta.data(), D, d);
}

Eigen::MatrixXd VariationalObjective::feature_matrix(
    const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  Eigen::MatrixXd Z;
  if (mode_ == ObjectiveMode::Rff) {
    project_into(X_, basis_.W, unpack_sigma(theta), Z);
  } else {
    project_into(X_, unpack_v(theta), 1.0, Z);
  }
  return Z;
}

double VariationalObjective::value_and_gradient(
    const Eigen::Ref<const Eigen::VectorXd>& theta, Eigen::VectorXd& grad) {
  if (theta.size() != dim()) {
    throw std::invalid_argument("value_and_gradient: theta has wrong length");
  }
  if (!theta.allFinite()) {
    throw std::invalid_argument("value_and_gradient: non-finite theta");
  }
  if (lam_.size() != X_.rows()) {
    throw std::logic_error("value_and_gradient: call set_xi first");
  }

  const Eigen::Index n = X_.rows();
  const Eigen::Index D = basis_.num_frequencies();
  const Eigen::Index d = basis_.input_dim();
  const Eigen::Index m = 2 * D;
  grad.setZero(dim());

  const double gamma = unpack_gamma(theta);
  const double inf = std::numeric_limits<double>::infinity();
  // exp overflow/underflow: reject the point so the line search backs off
  // and accepted hyperparameters stay strictly positive finite
  if (!std::isfinite(gamma) || gamma == 0.0) return inf;

  // angles T (n x D), features Z (n x 2D)
  double sigma = 1.0;
  if (mode_ == ObjectiveMode::Rff) {
    sigma = unpack_sigma(theta);
    if (!std::isfinite(sigma) || sigma <= 0.0 || !std::isfinite(1.0 / sigma)) {
      return inf;
    }
    T_ = xw_ * (1.0 / sigma);
  } else {
    T_.noalias() = X_ * unpack_v(theta).transpose();
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(D));
  Z_.resize(n, m);
  for (Eigen::Index j = 0; j < D; ++j) {
    Z_.col(2 * j) = T_.col(j).array().cos() * scale;
    Z_.col(2 * j + 1) = T_.col(j).array().sin() * scale;
  }

  build_scaled_precision(Z_, lam_, gamma, A_, Gb_);
  Eigen::LLT<Eigen::MatrixXd> llt;
  cholesky_with_jitter(llt, A_, "objective");

  const double logdet_a =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const Eigen::VectorXd ztv = Z_.transpose() * v_;
  const Eigen::VectorXd u = llt.solve(ztv);
  const Eigen::VectorXd mu = gamma * u;
  const double value = -logdet_a + gamma * ztv.dot(u);

  Ainv_ = llt.solve(Eigen::MatrixXd::Identity(m, m));
  const double d_loggamma = -static_cast<double>(m) + Ainv_.trace() +
                            gamma * u.squaredNorm();

  // dJ/dZ = 2 v mu' - 4 Lambda Z (Sigma + mu mu'), chained through the
  // cos/sin pairs in row blocks
  B_ = gamma * Ainv_ + mu * mu.transpose();
  double d_logsigma = 0.0;
  Eigen::MatrixXd dv;
  if (mode_ == ObjectiveMode::Vff) dv.setZero(D, d);
  for (Eigen::Index r0 = 0; r0 < n; r0 += kRowBlock) {
    const Eigen::Index b = std::min(kRowBlock, n - r0);
    Gb_.noalias() = Z_.middleRows(r0, b) * B_;
    Gb_.array().colwise() *= -4.0 * lam_.segment(r0, b).array();
    Gb_.noalias() += 2.0 * v_.segment(r0, b) * mu.transpose();
    Sb_.resize(b, D);
    for (Eigen::Index j = 0; j < D; ++j) {
      Sb_.col(j) =
          Gb_.col(2 * j + 1).cwiseProduct(Z_.block(r0, 2 * j, b, 1)) -
          Gb_.col(2 * j).cwiseProduct(Z_.block(r0, 2 * j + 1, b, 1));
    }
    if (mode_ == ObjectiveMode::Rff) {
      d_logsigma -= Sb_.cwiseProduct(T_.middleRows(r0, b)).sum();
    } else {
      dv.noalias() += Sb_.transpose() * X_.middleRows(r0, b);
    }
  }

  double f = -value;
  if (mode_ == ObjectiveMode::Rff) {
    grad(0) = -d_logsigma;
    grad(1) = -d_loggamma;
  } else {
    auto grad_v = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic,
                                           Eigen::Dynamic, Eigen::RowMajor>>(
        grad.data(), D, d);
    grad_v = -dv;
    if (ridge_on_v_) {
      const Eigen::MatrixXd V = unpack_v(theta);
      f += 0.5 * V.squaredNorm();
      grad_v += V;
    }
    grad(D * d) = -d_loggamma;
  }
  return f;
}

std::pair<double, Eigen::VectorXd> objective_gradient(
    const Eigen::Ref<const Eigen::VectorXd>& theta,
    const Eigen::Ref<const Eigen::MatrixXd>& X,
    const Eigen::Ref<const Eigen::VectorXd>& y,
    const Eigen::Ref<const Eigen::VectorXd>& xi, const FrequencyBasis& basis,
    ObjectiveMode mode) {
  VariationalObjective obj(X, y, basis, mode);
  obj.set_xi(xi);
  Eigen::VectorXd grad;
  const double f = obj.value_and_gradient(theta, grad);
  return {f, std::move(grad)};
}

}  // namespace fgpc
