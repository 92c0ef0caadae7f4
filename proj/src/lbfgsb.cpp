#include "draftval/lbfgsb.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

#include "draftval/error.hpp"

namespace draftval::lbfgsb {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Memory {
  std::deque<VectorXd> s;
  std::deque<VectorXd> y;
  double theta = 1.0;

  bool empty() const { return s.empty(); }

  void clear() {
    s.clear();
    y.clear();
    theta = 1.0;
  }

  void push(VectorXd step, VectorXd change, std::size_t depth) {
    theta = change.squaredNorm() / step.dot(change);
    s.push_back(std::move(step));
    y.push_back(std::move(change));
    if (s.size() > depth) {
      s.pop_front();
      y.pop_front();
    }
  }

  // theta * I followed by one BFGS update per stored pair, oldest first.
  MatrixXd hessian(Eigen::Index n) const {
    MatrixXd b = theta * MatrixXd::Identity(n, n);
    for (std::size_t k = 0; k < s.size(); ++k) {
      const VectorXd bs = b * s[k];
      b += -(bs * bs.transpose()) / s[k].dot(bs) + (y[k] * y[k].transpose()) / y[k].dot(s[k]);
    }
    return b;
  }
};

// First local minimizer of the quadratic model along the projected
// steepest-descent path x(t) = P(x - t g).
VectorXd cauchy_point(const VectorXd& x, const VectorXd& g, const MatrixXd& b,
                      const VectorXd& lower, const VectorXd& upper) {
  const Eigen::Index n = x.size();
  VectorXd d = -g;
  std::vector<double> breakpoint(n, kInf);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (g[i] < 0.0 && upper[i] < kInf) {
      breakpoint[i] = (x[i] - upper[i]) / g[i];
    } else if (g[i] > 0.0 && lower[i] > -kInf) {
      breakpoint[i] = (x[i] - lower[i]) / g[i];
    }
    if (breakpoint[i] <= 0.0) d[i] = 0.0;
  }

  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (breakpoint[i] > 0.0 && breakpoint[i] < kInf) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index c) {
    return breakpoint[a] < breakpoint[c] || (breakpoint[a] == breakpoint[c] && a < c);
  });

  VectorXd z = VectorXd::Zero(n);  // xc - x
  double t_prev = 0.0;
  double dt_min = 0.0;
  bool stopped = false;
  for (Eigen::Index i : order) {
    const VectorXd bd = b * d;
    const double slope = g.dot(d) + z.dot(bd);
    const double curvature = d.dot(bd);
    if (slope >= 0.0) {
      dt_min = 0.0;
      stopped = true;
      break;
    }
    dt_min = curvature > 0.0 ? -slope / curvature : kInf;
    const double dt = breakpoint[i] - t_prev;
    if (dt_min < dt) {
      stopped = true;
      break;
    }
    z += dt * d;
    z[i] = (d[i] > 0.0 ? upper[i] : lower[i]) - x[i];
    d[i] = 0.0;
    t_prev = breakpoint[i];
  }
  if (!stopped) {
    const VectorXd bd = b * d;
    const double slope = g.dot(d) + z.dot(bd);
    const double curvature = d.dot(bd);
    if (slope >= 0.0 || d.isZero()) {
      dt_min = 0.0;
    } else {
      // A positive definite model always has finite curvature along d; fall
      // back to the box edge if round-off says otherwise.
      dt_min = curvature > 0.0 ? -slope / curvature : 0.0;
    }
  }
  VectorXd xc = x + z + std::max(dt_min, 0.0) * d;
  return xc.cwiseMax(lower).cwiseMin(upper);
}

// Minimizes the quadratic model over the variables that are free at the
// Cauchy point, then truncates the step to stay inside the box.
VectorXd subspace_minimum(const VectorXd& x, const VectorXd& g, const MatrixXd& b,
                          const VectorXd& xc, const VectorXd& lower, const VectorXd& upper) {
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (xc[i] > lower[i] && xc[i] < upper[i]) free.push_back(i);
  }
  if (free.empty()) return xc;

  const auto nf = static_cast<Eigen::Index>(free.size());
  const VectorXd model_grad = g + b * (xc - x);
  MatrixXd bff(nf, nf);
  VectorXd rhs(nf);
  for (Eigen::Index r = 0; r < nf; ++r) {
    rhs[r] = -model_grad[free[r]];
    for (Eigen::Index c = 0; c < nf; ++c) bff(r, c) = b(free[r], free[c]);
  }
  const Eigen::LDLT<MatrixXd> ldlt(bff);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return xc;
  const VectorXd du = ldlt.solve(rhs);
  if (!du.allFinite()) return xc;

  double alpha = 1.0;
  for (Eigen::Index r = 0; r < nf; ++r) {
    const Eigen::Index i = free[r];
    if (du[r] > 0.0) alpha = std::min(alpha, (upper[i] - xc[i]) / du[r]);
    if (du[r] < 0.0) alpha = std::min(alpha, (lower[i] - xc[i]) / du[r]);
  }
  VectorXd xbar = xc;
  for (Eigen::Index r = 0; r < nf; ++r) xbar[free[r]] += alpha * du[r];
  return xbar.cwiseMax(lower).cwiseMin(upper);
}

double max_feasible_step(const VectorXd& x, const VectorXd& d, const VectorXd& lower,
                         const VectorXd& upper) {
  double step = kInf;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (d[i] > 0.0) step = std::min(step, (upper[i] - x[i]) / d[i]);
    if (d[i] < 0.0) step = std::min(step, (lower[i] - x[i]) / d[i]);
  }
  return step;
}

}  // namespace

std::string_view to_string(Status status) noexcept {
  switch (status) {
    case Status::projected_gradient: return "projected_gradient";
    case Status::relative_decrease: return "relative_decrease";
    case Status::no_descent: return "no_descent";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

double projected_gradient_norm(const VectorXd& x, const VectorXd& g, const VectorXd& lower,
                               const VectorXd& upper) {
  return ((x - g).cwiseMax(lower).cwiseMin(upper) - x).lpNorm<Eigen::Infinity>();
}

Result minimize(const Function& f, const Gradient& gradient, VectorXd x0, const VectorXd& lower,
                const VectorXd& upper, const Options& options) {
  const Eigen::Index n = x0.size();
  if (lower.size() != n || upper.size() != n) {
    throw Error(ErrorKind::invalid_argument, "bounds do not match the dimension of x0");
  }
  if ((lower.array() > upper.array()).any()) {
    throw Error(ErrorKind::invalid_argument, "lower bound exceeds upper bound");
  }
  if (options.memory < 1 || options.max_iterations < 1) {
    throw Error(ErrorKind::invalid_argument, "memory and max_iterations must be positive");
  }

  Result result;
  auto evaluate = [&](const VectorXd& at) {
    const double value = f(at);
    ++result.evaluations;
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::numerical, "objective is not finite during minimization");
    }
    return value;
  };
  auto evaluate_gradient = [&](const VectorXd& at, double value) {
    VectorXd grad = gradient(at, value);
    if (!grad.allFinite()) {
      throw Error(ErrorKind::numerical, "gradient is not finite during minimization");
    }
    return grad;
  };

  VectorXd x = x0.cwiseMax(lower).cwiseMin(upper);
  double fx = evaluate(x);
  VectorXd g = evaluate_gradient(x, fx);
  Memory memory;
  Status status = Status::iteration_limit;
  int iterations = 0;

  while (iterations < options.max_iterations) {
    if (projected_gradient_norm(x, g, lower, upper) <= options.projected_gradient_tol) {
      status = Status::projected_gradient;
      break;
    }

    const MatrixXd b = memory.hessian(n);
    const VectorXd xc = cauchy_point(x, g, b, lower, upper);
    const VectorXd d = subspace_minimum(x, g, b, xc, lower, upper) - x;
    const double slope = g.dot(d);
    const bool had_memory = !memory.empty();
    if (!(slope < 0.0)) {
      if (had_memory) {
        memory.clear();
        continue;
      }
      status = Status::no_descent;
      break;
    }

    const double max_step = max_feasible_step(x, d, lower, upper);
    double step = had_memory ? 1.0 : options.initial_step_length / d.norm();
    step = std::min(step, max_step);

    VectorXd x_next;
    double f_next = fx;
    bool accepted = false;
    for (int k = 0; k <= options.max_backtracks; ++k) {
      x_next = (x + step * d).cwiseMax(lower).cwiseMin(upper);
      f_next = evaluate(x_next);
      if (f_next <= fx + options.armijo * step * slope) {
        accepted = true;
        break;
      }
      // Safeguarded quadratic interpolation of f along d.
      double next = 0.5 * step;
      const double denom = 2.0 * (f_next - fx - step * slope);
      if (denom > 0.0) next = std::clamp(-slope * step * step / denom, 0.1 * step, 0.5 * step);
      step = next;
    }
    if (!accepted) {
      if (had_memory) {
        memory.clear();
        continue;
      }
      status = Status::no_descent;
      break;
    }

    VectorXd g_next = evaluate_gradient(x_next, f_next);
    ++iterations;
    const double decrease =
        (fx - f_next) / std::max({std::abs(fx), std::abs(f_next), 1.0});
    VectorXd s = x_next - x;
    VectorXd y = g_next - g;
    x = std::move(x_next);
    fx = f_next;
    g = std::move(g_next);
    if (decrease <= options.relative_decrease_tol) {
      status = Status::relative_decrease;
      break;
    }
    if (s.dot(y) > std::numeric_limits<double>::epsilon() * y.squaredNorm()) {
      memory.push(std::move(s), std::move(y), static_cast<std::size_t>(options.memory));
    }
  }

  result.x = x;
  result.f = fx;
  result.gradient = g;
  result.projected_gradient_norm = projected_gradient_norm(x, g, lower, upper);
  result.iterations = iterations;
  result.status = status;
  return result;
}

}  // namespace draftval::lbfgsb
