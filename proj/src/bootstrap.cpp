#include "draftval/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

#include "draftval/error.hpp"

namespace draftval {

void BootstrapConfig::validate() const {
  if (replicates < 2) {
    throw Error(ErrorKind::invalid_argument, "bootstrap needs at least 2 replicates");
  }
  if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "confidence level must lie in (0, 1)");
  }
  if (threads < 0) {
    throw Error(ErrorKind::invalid_argument, "thread count must be >= 0");
  }
}

double percentile(std::vector<double> sample, double q) {
  if (sample.empty()) {
    throw Error(ErrorKind::invalid_argument, "percentile of an empty sample");
  }
  std::sort(sample.begin(), sample.end());
  const double position = std::clamp(q, 0.0, 1.0) * static_cast<double>(sample.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(position));
  const std::size_t above = std::min(below + 1, sample.size() - 1);
  const double frac = position - static_cast<double>(below);
  if (frac == 0.0) return sample[below];
  return sample[below] + frac * (sample[above] - sample[below]);
}

std::vector<int> resample_counts(std::uint64_t master_seed, int replicate,
                                 std::size_t trade_count) {
  const auto r = static_cast<std::uint64_t>(replicate);
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> draw(0, trade_count - 1);
  std::vector<int> counts(trade_count, 0);
  for (std::size_t i = 0; i < trade_count; ++i) ++counts[draw(rng)];
  return counts;
}

BootstrapResult summarize_replicates(std::vector<CurveParams> replicate_params,
                                     double confidence_level) {
  if (replicate_params.size() < 2) {
    throw Error(ErrorKind::numerical, "fewer than 2 successful bootstrap replicates");
  }
  std::vector<double> lambdas;
  std::vector<double> betas;
  for (const CurveParams& p : replicate_params) {
    lambdas.push_back(p.lambda());
    betas.push_back(p.beta());
  }
  const double tail = (1.0 - confidence_level) / 2.0;
  const auto n = static_cast<double>(replicate_params.size());

  BootstrapResult out;
  out.confidence_level = confidence_level;
  out.lambda_ci = {percentile(lambdas, tail), percentile(lambdas, 1.0 - tail)};
  out.beta_ci = {percentile(betas, tail), percentile(betas, 1.0 - tail)};
  out.lambda_point_summary = std::accumulate(lambdas.begin(), lambdas.end(), 0.0) / n;
  out.beta_point_summary = std::accumulate(betas.begin(), betas.end(), 0.0) / n;
  out.lambda_median = percentile(lambdas, 0.5);
  out.beta_median = percentile(betas, 0.5);
  out.replicate_params = std::move(replicate_params);
  return out;
}

BootstrapResult bootstrap(std::span<const Trade> trades, const FitConfig& fit_config,
                          const BootstrapConfig& boot_config) {
  if (trades.empty()) {
    throw Error(ErrorKind::corpus_empty, "no trades to resample");
  }
  fit_config.validate();
  boot_config.validate();

  const auto replicates = static_cast<std::size_t>(boot_config.replicates);
  std::vector<std::optional<CurveParams>> estimates(replicates);
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t r = next++; r < replicates; r = next++) {
      const std::vector<int> counts =
          resample_counts(boot_config.master_seed, static_cast<int>(r), trades.size());
      std::vector<double> weights(counts.begin(), counts.end());
      try {
        const CorpusObjective objective(trades, fit_config.loss, fit_config.p, std::move(weights));
        estimates[r] = fit(objective, fit_config).params;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::numerical) throw;
      }
    }
  };

  unsigned threads = boot_config.threads > 0 ? static_cast<unsigned>(boot_config.threads)
                                             : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(replicates));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            worker();
          } catch (...) {
            errors[t] = std::current_exception();
            next = replicates;
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<CurveParams> ok;
  std::vector<int> failed;
  for (std::size_t r = 0; r < replicates; ++r) {
    if (estimates[r]) {
      ok.push_back(*estimates[r]);
    } else {
      failed.push_back(static_cast<int>(r));
    }
  }
  if (static_cast<double>(failed.size()) > 0.1 * static_cast<double>(replicates)) {
    throw Error(ErrorKind::numerical, std::to_string(failed.size()) + " of " +
                                          std::to_string(replicates) +
                                          " bootstrap replicates failed to fit");
  }
  BootstrapResult out = summarize_replicates(std::move(ok), boot_config.confidence_level);
  out.failed_replicates = std::move(failed);
  out.master_seed = boot_config.master_seed;
  out.replicates_requested = boot_config.replicates;
  return out;
}

}  // namespace draftval
