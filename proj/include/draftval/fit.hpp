#pragma once

// Norm-based objectives over a trade corpus and the fitting entry points.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "draftval/corpus.hpp"
#include "draftval/model.hpp"

namespace draftval {

enum class LossKind { mae, mse };

std::string_view to_string(LossKind loss) noexcept;
/// Accepts "mae"/"l1" and "mse"/"l2" in any case.
std::optional<LossKind> parse_loss(std::string_view text) noexcept;
/// p = 1 for MAE, p = 2 for MSE.
NormOrder paired_norm(LossKind loss) noexcept;

struct Bounds {
  double lambda_min = 1e-9;
  double lambda_max = 2.0;
  double beta_min = 1e-3;
  double beta_max = 5.0;

  bool contains(double lambda, double beta) const noexcept {
    return lambda >= lambda_min && lambda <= lambda_max && beta >= beta_min && beta <= beta_max;
  }
};

struct FitConfig {
  LossKind loss = LossKind::mae;
  NormOrder p = NormOrder::l1();
  CurveParams initial{0.146, 0.698};
  Bounds bounds;
  int max_iterations = 1000;
  double gradient_step = 1e-6;  // relative to max(|parameter|, 1)
  double convergence_tol = 1e-8;
  int memory = 10;
  double first_step_length = 0.1;  // trial step length while curvature memory is empty

  /// Default settings with p paired to the loss.
  static FitConfig for_loss(LossKind loss);

  /// Throws Error(invalid_argument) on a malformed configuration.
  void validate() const;
};

struct Gradient {
  double d_lambda = 0.0;
  double d_beta = 0.0;
};

struct FitResult {
  CurveParams params{0.146, 0.698};
  double loss_value = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm_at_solution = 0.0;  // projected, infinity norm
  std::string status;                      // optimizer termination reason
  int evaluations = 0;
};

/// Mean loss over a (possibly weighted) corpus, evaluated at raw parameter
/// values. Weights act as trade multiplicities; bootstrap resamples are
/// expressed this way instead of copying trades.
class CorpusObjective {
 public:
  CorpusObjective(std::span<const Trade> trades, LossKind loss, NormOrder p);
  CorpusObjective(std::span<const Trade> trades, LossKind loss, NormOrder p,
                  std::vector<double> weights);

  double operator()(double lambda, double beta) const;
  double operator()(const CurveParams& params) const {
    return (*this)(params.lambda(), params.beta());
  }

  std::size_t trade_count() const noexcept { return corpus_.trade_count(); }
  LossKind loss() const noexcept { return loss_; }
  NormOrder norm() const noexcept { return p_; }

 private:
  PackedCorpus corpus_;
  LossKind loss_;
  NormOrder p_;
  std::vector<double> weights_;
  double weight_total_ = 0.0;
};

/// MAE: mean |delta_t|. MSE: mean delta_t^2. Throws Error(corpus_empty).
double objective(std::span<const Trade> trades, const CurveParams& params,
                 const FitConfig& config);

/// Central finite differences with step gradient_step * max(|parameter|, 1).
/// The stencil must fit inside the bounds box, otherwise Error(invalid_argument).
Gradient objective_gradient(std::span<const Trade> trades, const CurveParams& params,
                            const FitConfig& config);

using ObjectiveFn = std::function<double(double lambda, double beta)>;
using GradientFn = std::function<Gradient(double lambda, double beta, double value)>;

/// Finite-difference gradient that switches to a one-sided stencil for any
/// coordinate whose central stencil would leave the box.
Gradient bounded_gradient(const ObjectiveFn& f, double lambda, double beta, double value,
                          const Bounds& bounds, double relative_step);

/// Box-constrained quasi-Newton minimization starting from config.initial.
FitResult minimize(const ObjectiveFn& objective, const GradientFn& gradient,
                   const FitConfig& config);

/// objective + bounded_gradient + minimize. Deterministic.
FitResult fit(std::span<const Trade> trades, const FitConfig& config);
FitResult fit(const CorpusObjective& objective, const FitConfig& config);

}  // namespace draftval
