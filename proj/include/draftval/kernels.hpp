#pragma once

// Batched evaluation of powered pick values over a flattened corpus.
//
// Every kernel computes, for each element i,
//
//     out[i] = exp(-scale * exp(beta * log_gap[i]))
//
// where log_gap[i] = ln(n_i - 1) for pick n_i, or -inf for pick 1. With
// scale = p * lambda this is v(n_i)^p, the summand of a p-norm side value.
// The scalar kernel is the reference; vector variants must agree with it to a
// few ulp and are selected once per process from the host's CPU features.

#include <optional>
#include <span>
#include <string_view>

namespace draftval::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

/// ln(n - 1), or -inf for pick 1.
double log_gap(int pick) noexcept;

void decay_terms_scalar(std::span<const double> log_gap, double beta, double scale,
                        std::span<double> out) noexcept;

#if defined(DRAFTVAL_HAVE_AVX2)
void decay_terms_avx2(std::span<const double> log_gap, double beta, double scale,
                      std::span<double> out) noexcept;
#endif

/// True when the variant was compiled in and the CPU supports it.
bool isa_supported(Isa isa) noexcept;

/// The variant used by decay_terms(). Chosen on first use: the widest
/// supported variant, unless DRAFTVAL_ISA=scalar|avx2 names another one.
Isa active_isa() noexcept;

void decay_terms(std::span<const double> log_gap, double beta, double scale,
                 std::span<double> out) noexcept;

}  // namespace draftval::kernels
