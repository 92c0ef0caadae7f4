#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "draftval/model.hpp"

namespace draftval {

/// Trades flattened into one contiguous array of log pick gaps so the decay
/// kernel runs over the whole corpus in a single pass. Segment 2t holds the
/// up side of trade t and segment 2t+1 its down side.
class PackedCorpus {
 public:
  explicit PackedCorpus(std::span<const Trade> trades);

  std::size_t trade_count() const noexcept { return (offsets_.size() - 1) / 2; }
  std::size_t pick_count() const noexcept { return log_gap_.size(); }

  /// Trade residuals at raw parameter values. Takes doubles rather than
  /// CurveParams so the optimizer can probe finite-difference points without
  /// constructing validated values. `out` must hold trade_count() entries.
  void deltas(double lambda, double beta, double p, std::span<double> out) const;

 private:
  std::vector<double> log_gap_;
  std::vector<std::uint32_t> offsets_;
};

}  // namespace draftval
