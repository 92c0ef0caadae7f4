#include "draftval/fit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "draftval/error.hpp"
#include "draftval/lbfgsb.hpp"

namespace draftval {

std::string_view to_string(LossKind loss) noexcept {
  return loss == LossKind::mae ? "mae" : "mse";
}

std::optional<LossKind> parse_loss(std::string_view text) noexcept {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "mae" || lower == "l1") return LossKind::mae;
  if (lower == "mse" || lower == "l2") return LossKind::mse;
  return std::nullopt;
}

NormOrder paired_norm(LossKind loss) noexcept {
  return loss == LossKind::mae ? NormOrder::l1() : NormOrder::l2();
}

FitConfig FitConfig::for_loss(LossKind loss) {
  FitConfig config;
  config.loss = loss;
  config.p = paired_norm(loss);
  return config;
}

void FitConfig::validate() const {
  const bool finite_box = std::isfinite(bounds.lambda_min) && std::isfinite(bounds.lambda_max) &&
                          std::isfinite(bounds.beta_min) && std::isfinite(bounds.beta_max);
  if (!finite_box || bounds.lambda_min < 0.0 || bounds.beta_min <= 0.0 ||
      bounds.lambda_min > bounds.lambda_max || bounds.beta_min > bounds.beta_max) {
    throw Error(ErrorKind::invalid_argument,
                "bounds must satisfy 0 <= lambda_min <= lambda_max and 0 < beta_min <= beta_max");
  }
  if (!bounds.contains(initial.lambda(), initial.beta())) {
    throw Error(ErrorKind::invalid_argument, "initial parameters lie outside the bounds box");
  }
  if (max_iterations < 1) {
    throw Error(ErrorKind::invalid_argument, "max_iterations must be at least 1");
  }
  if (!(gradient_step > 0.0) || !(convergence_tol > 0.0) || !(first_step_length > 0.0) ||
      memory < 1) {
    throw Error(ErrorKind::invalid_argument,
                "gradient_step, convergence_tol, first_step_length and memory must be positive");
  }
}

CorpusObjective::CorpusObjective(std::span<const Trade> trades, LossKind loss, NormOrder p)
    : CorpusObjective(trades, loss, p, std::vector<double>(trades.size(), 1.0)) {}

CorpusObjective::CorpusObjective(std::span<const Trade> trades, LossKind loss, NormOrder p,
                                 std::vector<double> weights)
    : corpus_(trades), loss_(loss), p_(p), weights_(std::move(weights)) {
  if (trades.empty()) {
    throw Error(ErrorKind::corpus_empty, "no trades to evaluate");
  }
  if (weights_.size() != trades.size()) {
    throw Error(ErrorKind::invalid_argument, "one weight per trade is required");
  }
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorKind::invalid_argument, "trade weights must be finite and >= 0");
    }
  }
  weight_total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (!(weight_total_ > 0.0)) {
    throw Error(ErrorKind::corpus_empty, "all trade weights are zero");
  }
}

double CorpusObjective::operator()(double lambda, double beta) const {
  thread_local std::vector<double> delta;
  delta.resize(corpus_.trade_count());
  corpus_.deltas(lambda, beta, p_.value(), delta);
  double total = 0.0;
  if (loss_ == LossKind::mae) {
    for (std::size_t t = 0; t < delta.size(); ++t) total += weights_[t] * std::abs(delta[t]);
  } else {
    for (std::size_t t = 0; t < delta.size(); ++t) total += weights_[t] * delta[t] * delta[t];
  }
  return total / weight_total_;
}

double objective(std::span<const Trade> trades, const CurveParams& params,
                 const FitConfig& config) {
  return CorpusObjective(trades, config.loss, config.p)(params);
}

Gradient bounded_gradient(const ObjectiveFn& f, double lambda, double beta, double value,
                          const Bounds& bounds, double relative_step) {
  auto partial = [&](double x, double lo, double hi, auto&& at) {
    double h = relative_step * std::max(std::abs(x), 1.0);
    const bool room_below = x - h >= lo;
    const bool room_above = x + h <= hi;
    double slope;
    if (room_below && room_above) {
      slope = (at(x + h) - at(x - h)) / (2.0 * h);
    } else if (room_above) {
      slope = (at(x + h) - value) / h;
    } else if (room_below) {
      slope = (value - at(x - h)) / h;
    } else {
      // Box narrower than the step: probe the wider side, never outside it.
      const double above = hi - x;
      const double below = x - lo;
      h = std::max(above, below);
      if (!(h > 0.0)) return 0.0;
      slope = above >= below ? (at(hi) - value) / h : (value - at(lo)) / h;
    }
    if (!std::isfinite(slope)) {
      throw Error(ErrorKind::numerical, "objective is not finite at a finite-difference probe");
    }
    return slope;
  };
  Gradient g;
  g.d_lambda = partial(lambda, bounds.lambda_min, bounds.lambda_max,
                       [&](double l) { return f(l, beta); });
  g.d_beta =
      partial(beta, bounds.beta_min, bounds.beta_max, [&](double b) { return f(lambda, b); });
  return g;
}

Gradient objective_gradient(std::span<const Trade> trades, const CurveParams& params,
                            const FitConfig& config) {
  config.validate();
  const double hl = config.gradient_step * std::max(std::abs(params.lambda()), 1.0);
  const double hb = config.gradient_step * std::max(std::abs(params.beta()), 1.0);
  const Bounds& b = config.bounds;
  if (params.lambda() - hl < b.lambda_min || params.lambda() + hl > b.lambda_max ||
      params.beta() - hb < b.beta_min || params.beta() + hb > b.beta_max) {
    throw Error(ErrorKind::invalid_argument,
                "parameters must lie inside the bounds by at least one finite-difference step");
  }
  const CorpusObjective f(trades, config.loss, config.p);
  const ObjectiveFn fn = [&f](double l, double be) { return f(l, be); };
  return bounded_gradient(fn, params.lambda(), params.beta(), f(params), config.bounds,
                          config.gradient_step);
}

FitResult minimize(const ObjectiveFn& objective, const GradientFn& gradient,
                   const FitConfig& config) {
  config.validate();
  Eigen::Vector2d x0(config.initial.lambda(), config.initial.beta());
  Eigen::Vector2d lower(config.bounds.lambda_min, config.bounds.beta_min);
  Eigen::Vector2d upper(config.bounds.lambda_max, config.bounds.beta_max);

  lbfgsb::Options options;
  options.memory = config.memory;
  options.max_iterations = config.max_iterations;
  options.projected_gradient_tol = config.convergence_tol;
  options.relative_decrease_tol = config.convergence_tol;
  options.initial_step_length = config.first_step_length;

  const lbfgsb::Result r = lbfgsb::minimize(
      [&](const Eigen::VectorXd& x) { return objective(x[0], x[1]); },
      [&](const Eigen::VectorXd& x, double value) {
        const Gradient g = gradient(x[0], x[1], value);
        return Eigen::VectorXd(Eigen::Vector2d(g.d_lambda, g.d_beta));
      },
      x0, lower, upper, options);

  FitResult out;
  out.params = CurveParams(r.x[0], r.x[1]);
  out.loss_value = r.f;
  out.iterations = r.iterations;
  out.converged = lbfgsb::converged(r.status);
  out.gradient_norm_at_solution = r.projected_gradient_norm;
  out.status = std::string(lbfgsb::to_string(r.status));
  out.evaluations = r.evaluations;
  return out;
}

FitResult fit(const CorpusObjective& objective, const FitConfig& config) {
  if (objective.loss() != config.loss || !(objective.norm() == config.p)) {
    throw Error(ErrorKind::invalid_argument, "objective does not match the fit configuration");
  }
  const ObjectiveFn fn = [&objective](double l, double b) { return objective(l, b); };
  const GradientFn grad = [&](double l, double b, double value) {
    return bounded_gradient(fn, l, b, value, config.bounds, config.gradient_step);
  };
  return minimize(fn, grad, config);
}

FitResult fit(std::span<const Trade> trades, const FitConfig& config) {
  config.validate();
  return fit(CorpusObjective(trades, config.loss, config.p), config);
}

}  // namespace draftval
