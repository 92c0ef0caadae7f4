#pragma once

// Nonparametric bootstrap of the fitted curve parameters.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "draftval/fit.hpp"
#include "draftval/model.hpp"

namespace draftval {

struct BootstrapConfig {
  int replicates = 1000;
  double confidence_level = 0.95;
  std::uint64_t master_seed = 20240501;
  int threads = 0;  // 0 = hardware concurrency; results do not depend on it

  void validate() const;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double width() const noexcept { return upper - lower; }
};

struct BootstrapResult {
  std::vector<CurveParams> replicate_params;  // successful replicates, in replicate order
  std::vector<int> failed_replicates;
  Interval lambda_ci;
  Interval beta_ci;
  double lambda_point_summary = 0.0;  // mean of replicate estimates
  double beta_point_summary = 0.0;
  double lambda_median = 0.0;
  double beta_median = 0.0;
  double confidence_level = 0.95;
  std::uint64_t master_seed = 0;
  int replicates_requested = 0;
};

/// Linear-interpolation percentile of a sample (the usual "type 7"
/// definition: position q * (n - 1) in the sorted sample). q in [0, 1].
double percentile(std::vector<double> sample, double q);

/// Resample counts for replicate r: how many times each of `trade_count`
/// trades is drawn. Depends only on (master_seed, r).
std::vector<int> resample_counts(std::uint64_t master_seed, int replicate, std::size_t trade_count);

/// Refits the curve on `replicates` resampled corpora and summarizes the
/// estimates. Replicates whose fit throws Error(numerical) are recorded and
/// excluded; more than 10% failures raise Error(numerical).
BootstrapResult bootstrap(std::span<const Trade> trades, const FitConfig& fit_config,
                          const BootstrapConfig& boot_config);

/// Builds interval summaries from a list of replicate estimates.
BootstrapResult summarize_replicates(std::vector<CurveParams> replicate_params,
                                     double confidence_level);

}  // namespace draftval
