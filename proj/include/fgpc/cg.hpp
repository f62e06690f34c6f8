#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace fgpc {

/// Stopping and line-search knobs for cg_minimize. Requires
/// 0 < wolfe_c1 < wolfe_c2 < 1; c2 = 0.1 suits conjugate gradients.
struct OptimizerConfig {
  int max_evals = 100;
  double grad_tol = 1e-5;
  double step_tol = 1e-9;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.1;
};

enum class CgStatus {
  GradTol,         // sup-norm of gradient below grad_tol
  StepTol,         // relative parameter change below step_tol
  Budget,          // evaluation budget exhausted; best iterate returned
  LineSearchFail,  // no acceptable step even after steepest-descent restart
  NoOp,            // max_evals == 0, x0 returned untouched
};

/// Line-search record for one accepted step. `wolfe` is false only for the
/// last-resort plain-decrease acceptance (kinked objective or budget out).
struct CgStep {
  double alpha = 0.0;
  double f_before = 0.0;
  double f_after = 0.0;
  double slope_before = 0.0;  // g(x).d
  double slope_after = 0.0;   // g(x + alpha d).d
  bool wolfe = true;
};

struct CgResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evals = 0;
  CgStatus status = CgStatus::Budget;
  std::vector<double> accepted_f;  // f(x0) then f after each accepted step
  std::vector<CgStep> steps;
};

/// Value-and-gradient callback: fills grad, returns f. May return +inf to
/// mark an unacceptable region; must be finite at x0.
using ObjectiveFn =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Minimize with Polak-Ribiere+ directions and a strong-Wolfe line search.
/// Falls back to steepest descent whenever the conjugate direction fails
/// to descend, and never returns an iterate worse than x0.
CgResult cg_minimize(const ObjectiveFn& objective, const Eigen::VectorXd& x0,
                     const OptimizerConfig& config);

/// Max relative disagreement between the callback's gradient and central
/// finite differences, with relative error |a - n| / max(1e-8, |a| + |n|).
double check_gradient(const ObjectiveFn& objective, const Eigen::VectorXd& x,
                      double step);

}  // namespace fgpc
