#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace fgpc {

enum class BasisMode { FixedRandom, Learnable };

/// Matrix of Fourier frequencies, one frequency vector per row.
///
/// Frequencies are unitless: the length-scale enters at projection time, so
/// the same basis serves any sigma. FixedRandom bases are bit-identical for
/// the same (D, d, seed); Learnable bases hold frequencies that a trainer
/// has optimized (with the length-scale absorbed).
struct FrequencyBasis {
  Eigen::MatrixXd W;  // D x d
  BasisMode mode = BasisMode::FixedRandom;
  std::uint64_t seed = 0;

  Eigen::Index num_frequencies() const { return W.rows(); }
  Eigen::Index input_dim() const { return W.cols(); }
};

/// Draw a D x d matrix of i.i.d. standard normals from the seeded generator.
FrequencyBasis sample_frequencies(Eigen::Index num_frequencies,
                                  Eigen::Index input_dim, std::uint64_t seed);

/// Map inputs to the n x 2D trigonometric feature matrix.
///
/// Row i holds D^{-1/2} * (cos(t_i1), sin(t_i1), ..., cos(t_iD), sin(t_iD))
/// with t_ij = w_j . x_i / sigma. The interleaved cos/sin layout is part of
/// the serialized model format. Every row has unit Euclidean norm.
///
/// Pure function: rows are independent, and a shared immutable basis may be
/// projected from any number of threads.
Eigen::MatrixXd project(const Eigen::Ref<const Eigen::MatrixXd>& X,
                        const FrequencyBasis& basis, double sigma);

/// In-place variant reusing the caller's buffer (resized as needed).
void project_into(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::MatrixXd>& W, double sigma,
                  Eigen::MatrixXd& Z);

/// Squared-exponential kernel gamma * exp(-|x - x2|^2 / (2 sigma^2)).
double se_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                 const Eigen::Ref<const Eigen::VectorXd>& x2, double sigma,
                 double gamma);

/// Linearized kernel gamma * z(x).z(x2). Diagnostic only; training works on
/// the feature matrix directly and never materializes kernel matrices.
double approx_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& x2,
                     const FrequencyBasis& basis, double sigma, double gamma);

}  // namespace fgpc
