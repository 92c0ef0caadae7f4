#include <cmath>
#include <limits>

#include "draftval/kernels.hpp"

namespace draftval::kernels {

double log_gap(int pick) noexcept {
  if (pick <= 1) return -std::numeric_limits<double>::infinity();
  return std::log(static_cast<double>(pick - 1));
}

void decay_terms_scalar(std::span<const double> log_gap, double beta, double scale,
                        std::span<double> out) noexcept {
  const std::size_t n = log_gap.size();
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(-scale * std::exp(beta * log_gap[i]));
  }
}

}  // namespace draftval::kernels
