#include "draftval/corpus.hpp"

#include <cmath>

#include "draftval/kernels.hpp"

namespace draftval {

PackedCorpus::PackedCorpus(std::span<const Trade> trades) {
  offsets_.reserve(2 * trades.size() + 1);
  offsets_.push_back(0);
  auto append = [this](const TradeSide& side) {
    for (PickNumber n : side.picks()) log_gap_.push_back(kernels::log_gap(n.value()));
    offsets_.push_back(static_cast<std::uint32_t>(log_gap_.size()));
  };
  for (const Trade& t : trades) {
    append(t.up);
    append(t.down);
  }
}

void PackedCorpus::deltas(double lambda, double beta, double p, std::span<double> out) const {
  thread_local std::vector<double> terms;
  terms.resize(log_gap_.size());
  kernels::decay_terms(log_gap_, beta, p * lambda, terms);

  auto side = [&](std::size_t segment) {
    double total = 0.0;
    for (std::uint32_t i = offsets_[segment]; i < offsets_[segment + 1]; ++i) total += terms[i];
    if (p == 1.0) return total;
    if (p == 2.0) return std::sqrt(total);
    return std::pow(total, 1.0 / p);
  };
  const std::size_t count = trade_count();
  for (std::size_t t = 0; t < count; ++t) out[t] = side(2 * t) - side(2 * t + 1);
}

}  // namespace draftval
