#pragma once

#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "fgpc/fourier.hpp"

namespace fgpc {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// log(1 + e^x), stable for large |x|.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

/// Curvature coefficient of the quadratic sigmoid bound,
/// lambda(xi) = tanh(xi/2) / (4 xi). Even in xi, in (0, 1/8]; the removable
/// singularity at 0 takes its limit value 1/8.
double lambda_of_xi(double xi);

/// Right-hand side of the bound log(1+e^x) <= lambda(xi)(x^2 - xi^2)
/// + (x - xi)/2 + log(1+e^xi). Tight exactly at x = xi.
double sigmoid_bound_rhs(double x, double xi);

/// Gaussian posterior over the 2D-dimensional weight vector.
///
/// chol is the lower Cholesky factor of A = gamma * Sigma^{-1}
/// = 2*gamma*Z' Lambda Z + I, the scaled precision actually factorized
/// (its pivots are >= 1, so the factorization is well conditioned for
/// every gamma). Solves against Sigma go through chol and gamma.
struct WeightPosterior {
  Eigen::VectorXd mu;
  Eigen::MatrixXd Sigma;
  Eigen::MatrixXd chol;
  double gamma = 1.0;
};

/// Posterior of the bounded model: Sigma = (Z'(2 Lambda)Z + I/gamma)^{-1},
/// mu = Sigma Z' (y - 1/2). One SPD factorization of a 2D x 2D matrix;
/// never forms anything n x n. Cost O(n D^2 + D^3).
WeightPosterior compute_posterior(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                                  const Eigen::Ref<const Eigen::VectorXd>& y,
                                  double gamma,
                                  const Eigen::Ref<const Eigen::VectorXd>& xi);

/// Optimal variational parameters xi_i = sqrt(z_i' Sigma z_i + (z_i' mu)^2),
/// computed row-wise. Strictly positive for a valid posterior.
Eigen::VectorXd update_xi(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                          const WeightPosterior& posterior);

/// Evidence-bound diagnostics at fixed (Z, y, gamma, xi):
///   log_f     = log C(xi) + (1/2) log|Sigma/gamma| + (1/2) mu' Sigma^{-1} mu
///   log_c     = sum_i lambda(xi_i) xi_i^2 + xi_i/2 - log(1+e^{xi_i})
///   objective = -log|2 gamma Z'Lambda Z + I| + v'Z Sigma Z'v,  v = y - 1/2
/// The identity objective == 2 (log_f - log_c) holds algebraically.
struct BoundDiagnostics {
  double log_f = 0.0;
  double log_c = 0.0;
  double objective = 0.0;
};

BoundDiagnostics log_bound(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                           const Eigen::Ref<const Eigen::VectorXd>& y,
                           double gamma,
                           const Eigen::Ref<const Eigen::VectorXd>& xi);

enum class ObjectiveMode { Rff, Vff };

/// Negated evidence objective with analytic gradients, for a minimizer.
///
/// Parameter vector theta:
///   Rff: (log sigma, log gamma); the frequency matrix W stays fixed.
///   Vff: (V flattened row-major, log gamma) with V the collapsed D x d
///        frequency matrix (length-scale absorbed, no prior on V).
///
/// The feature matrix is recomputed into a reused scratch buffer whenever
/// theta changes the feature map; each evaluation costs O(n D^2 + D^3)
/// plus O(n D d) for the V gradient in Vff mode.
class VariationalObjective {
 public:
  VariationalObjective(const Eigen::Ref<const Eigen::MatrixXd>& X,
                       const Eigen::Ref<const Eigen::VectorXd>& y,
                       FrequencyBasis basis, ObjectiveMode mode,
                       bool ridge_on_v = false);

  Eigen::Index dim() const;

  void set_xi(const Eigen::Ref<const Eigen::VectorXd>& xi);

  /// Value and gradient of the negated objective (plus the optional ridge
  /// (1/2)|V|^2 in Vff mode). Returns +inf outside the representable
  /// hyperparameter range instead of failing, so line searches can back off.
  double value_and_gradient(const Eigen::Ref<const Eigen::VectorXd>& theta,
                            Eigen::VectorXd& grad);

  Eigen::VectorXd pack_rff(double sigma, double gamma) const;
  Eigen::VectorXd pack_vff(const Eigen::Ref<const Eigen::MatrixXd>& V,
                           double gamma) const;
  double unpack_gamma(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
  double unpack_sigma(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
  Eigen::MatrixXd unpack_v(const Eigen::Ref<const Eigen::VectorXd>& theta) const;

  /// Feature matrix at theta (fresh copy; scratch stays untouched).
  Eigen::MatrixXd feature_matrix(
      const Eigen::Ref<const Eigen::VectorXd>& theta) const;

  ObjectiveMode mode() const { return mode_; }
  const FrequencyBasis& basis() const { return basis_; }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd v_;  // y - 1/2
  Eigen::VectorXd lam_;
  FrequencyBasis basis_;
  ObjectiveMode mode_;
  bool ridge_on_v_;
  Eigen::MatrixXd xw_;  // cached X W' for Rff mode
  // scratch reused across evaluations
  Eigen::MatrixXd Z_, T_, A_, Ainv_, B_, Gb_, Sb_;
};

/// One-shot wrapper around VariationalObjective for the given xi.
std::pair<double, Eigen::VectorXd> objective_gradient(
    const Eigen::Ref<const Eigen::VectorXd>& theta,
    const Eigen::Ref<const Eigen::MatrixXd>& X,
    const Eigen::Ref<const Eigen::VectorXd>& y,
    const Eigen::Ref<const Eigen::VectorXd>& xi, const FrequencyBasis& basis,
    ObjectiveMode mode);

}  // namespace fgpc
