#include "fgpc/cg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fgpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Budget {
  int remaining;
  bool spent() const { return remaining <= 0; }
};

// One probe along x + alpha*d, carrying its own point and gradient so a
// probe accepted later cannot pick up state from a newer evaluation.
// Non-finite objective values map to +inf so the search backs off.
struct Probe {
  double alpha = 0.0;
  double f = kInf;
  double slope = kInf;  // g(x + alpha d) . d
  Eigen::VectorXd x, g;
};

class LineObjective {
 public:
  LineObjective(const ObjectiveFn& fn, const Eigen::VectorXd& x,
                const Eigen::VectorXd& d, Budget& budget)
      : fn_(fn), x_(x), d_(d), budget_(budget) {}

  Probe eval(double alpha) {
    --budget_.remaining;
    Probe p;
    p.alpha = alpha;
    p.x = x_ + alpha * d_;
    p.g.resize(x_.size());
    const double f = fn_(p.x, p.g);
    if (std::isfinite(f)) {
      p.f = f;
      p.slope = p.g.dot(d_);
    }
    return p;
  }

 private:
  const ObjectiveFn& fn_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& d_;
  Budget& budget_;
};

// Quadratic interpolation through (lo.f, lo.slope) and hi.f, safeguarded
// to the inner 80% of the bracket; bisection when the fit is unusable.
double interpolate(const Probe& lo, const Probe& hi) {
  const double span = hi.alpha - lo.alpha;
  double alpha = lo.alpha + 0.5 * span;
  if (std::isfinite(hi.f)) {
    const double denom = 2.0 * (hi.f - lo.f - lo.slope * span);
    if (denom != 0.0) {
      const double cand = lo.alpha - lo.slope * span * span / denom;
      if (std::isfinite(cand)) alpha = cand;
    }
  }
  const double a = lo.alpha + 0.1 * span;
  const double b = hi.alpha - 0.1 * span;
  return std::min(std::max(alpha, std::min(a, b)), std::max(a, b));
}

struct SearchOutcome {
  Probe accepted;
  bool ok = false;
  bool wolfe = false;
};

// Strong-Wolfe line search (bracket then zoom). `start` describes the
// objective at alpha = 0.
SearchOutcome wolfe_search(LineObjective& line, const Probe& start,
                           double alpha_init, const OptimizerConfig& cfg,
                           Budget& budget) {
  const double phi0 = start.f;
  const double slope0 = start.slope;
  const auto armijo = [&](const Probe& p) {
    return p.f <= phi0 + cfg.wolfe_c1 * p.alpha * slope0;
  };
  const auto curvature = [&](const Probe& p) {
    return std::abs(p.slope) <= -cfg.wolfe_c2 * slope0;
  };

  Probe lo = start;
  Probe hi;
  Probe prev = start;
  bool bracketed = false;
  double alpha = alpha_init;
  constexpr int kMaxBracket = 20;
  for (int i = 0; i < kMaxBracket && !budget.spent(); ++i) {
    Probe p = line.eval(alpha);
    if (!armijo(p) || (i > 0 && p.f >= prev.f)) {
      lo = prev;
      hi = std::move(p);
      bracketed = true;
      break;
    }
    if (curvature(p)) return {std::move(p), true, true};
    if (p.slope >= 0.0) {
      hi = prev;
      lo = std::move(p);
      bracketed = true;
      break;
    }
    prev = std::move(p);
    alpha *= 2.0;
  }

  if (bracketed) {
    constexpr int kMaxZoom = 40;
    for (int i = 0; i < kMaxZoom && !budget.spent(); ++i) {
      const double span = std::abs(hi.alpha - lo.alpha);
      if (span <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
      Probe p = line.eval(interpolate(lo, hi));
      if (!armijo(p) || p.f >= lo.f) {
        hi = std::move(p);
        continue;
      }
      if (curvature(p)) return {std::move(p), true, true};
      if (p.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(p);
    }
  }
  // Wolfe pair unreachable (kinked objective, or budget out); a plain
  // decrease is still usable as a last resort.
  if (lo.alpha > 0.0 && lo.f < phi0) return {std::move(lo), true, false};
  return {};
}

}  // namespace

CgResult cg_minimize(const ObjectiveFn& objective, const Eigen::VectorXd& x0,
                     const OptimizerConfig& config) {
  if (!(config.wolfe_c1 > 0.0 && config.wolfe_c1 < config.wolfe_c2 &&
        config.wolfe_c2 < 1.0)) {
    throw std::invalid_argument("cg_minimize: need 0 < c1 < c2 < 1");
  }
  CgResult result;
  result.x = x0;
  if (config.max_evals <= 0) {
    result.f = std::numeric_limits<double>::quiet_NaN();
    result.status = CgStatus::NoOp;
    return result;
  }

  Budget budget{config.max_evals};
  Eigen::VectorXd g(x0.size());
  --budget.remaining;
  const double f0 = objective(x0, g);
  if (!std::isfinite(f0) || !g.allFinite()) {
    throw std::invalid_argument("cg_minimize: objective not finite at x0");
  }
  result.f = f0;
  result.accepted_f.push_back(f0);

  Eigen::VectorXd x = x0;
  double f = f0;
  Eigen::VectorXd d = -g;
  bool steepest = true;
  double alpha_prev = 0.0;
  double slope_prev = 0.0;
  result.status = CgStatus::Budget;

  while (true) {
    if (g.lpNorm<Eigen::Infinity>() <= config.grad_tol) {
      result.status = CgStatus::GradTol;
      break;
    }
    if (budget.spent()) break;

    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      steepest = true;
      slope = g.dot(d);
    }

    double alpha_init = 1.0;
    if (!steepest && alpha_prev > 0.0 && slope != 0.0) {
      alpha_init = alpha_prev * slope_prev / slope;
      if (!std::isfinite(alpha_init) || alpha_init <= 0.0) alpha_init = 1.0;
      alpha_init = std::min(alpha_init, 1e8);
    }

    Probe start;
    start.alpha = 0.0;
    start.f = f;
    start.slope = slope;
    LineObjective line(objective, x, d, budget);
    SearchOutcome out = wolfe_search(line, start, alpha_init, config, budget);
    if (!out.ok) {
      if (!steepest && !budget.spent()) {
        d = -g;  // one restart before giving up
        steepest = true;
        continue;
      }
      if (!budget.spent()) result.status = CgStatus::LineSearchFail;
      break;
    }

    result.steps.push_back({out.accepted.alpha, f, out.accepted.f, slope,
                            out.accepted.slope, out.wolfe});
    const Eigen::VectorXd g_old = std::move(g);
    const double step =
        (out.accepted.x - x).lpNorm<Eigen::Infinity>();
    x = std::move(out.accepted.x);
    f = out.accepted.f;
    g = std::move(out.accepted.g);
    result.accepted_f.push_back(f);
    if (f < result.f) {
      result.f = f;
      result.x = x;
    }

    if (step <= config.step_tol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
      result.status = CgStatus::StepTol;
      break;
    }

    // Polak-Ribiere+ with automatic restart through max(beta, 0)
    const double denom = g_old.squaredNorm();
    double beta = denom > 0.0 ? g.dot(g - g_old) / denom : 0.0;
    beta = std::max(beta, 0.0);
    alpha_prev = out.accepted.alpha;
    slope_prev = slope;
    d = -g + beta * d;
    steepest = false;
  }
  return result;
}

double check_gradient(const ObjectiveFn& objective, const Eigen::VectorXd& x,
                      double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("check_gradient: step must be positive");
  }
  Eigen::VectorXd g(x.size());
  objective(x, g);
  Eigen::VectorXd gdummy(x.size());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(i) += step;
    xm(i) -= step;
    const double numeric =
        (objective(xp, gdummy) - objective(xm, gdummy)) / (2.0 * step);
    const double err = std::abs(g(i) - numeric) /
                       std::max(1e-8, std::abs(g(i)) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace fgpc
