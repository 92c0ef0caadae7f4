#pragma once

// Limited-memory BFGS with box constraints.
//
// Each iteration finds the generalized Cauchy point along the projected
// steepest-descent path, minimizes the quasi-Newton model over the variables
// left free at that point, and backtracks along the resulting feasible
// direction until the Armijo condition holds. The Hessian approximation is
// rebuilt from the last `memory` curvature pairs starting at theta * I. It is
// kept as a dense n x n matrix, which suits the low-dimensional problems in
// this library.

#include <functional>
#include <string_view>

#include <Eigen/Dense>

namespace draftval::lbfgsb {

struct Options {
  int memory = 10;
  int max_iterations = 1000;
  double projected_gradient_tol = 1e-8;  // infinity norm
  double relative_decrease_tol = 1e-8;   // (f_k - f_k+1) / max(|f_k|, |f_k+1|, 1)
  int max_backtracks = 30;
  // Length of the first trial step whenever the curvature memory is empty.
  double initial_step_length = 1.0;
  double armijo = 1e-4;
};

enum class Status {
  projected_gradient,   // projected gradient below tolerance
  relative_decrease,    // objective decrease stalled below tolerance
  no_descent,           // no step along projected steepest descent lowers f
  iteration_limit,
};

std::string_view to_string(Status status) noexcept;

/// Status values that count as convergence.
constexpr bool converged(Status s) noexcept { return s != Status::iteration_limit; }

struct Result {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd gradient;
  double projected_gradient_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  Status status = Status::iteration_limit;
};

using Function = std::function<double(const Eigen::VectorXd&)>;
// Receives the point and f at that point.
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;

/// Infinity norm of P(x - g) - x for the box [lower, upper].
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/// Minimizes f over the box. x0 is projected onto the box first. Throws
/// Error(numerical) if f or its gradient is not finite at an accepted point.
Result minimize(const Function& f, const Gradient& gradient, Eigen::VectorXd x0,
                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                const Options& options = {});

}  // namespace draftval::lbfgsb
