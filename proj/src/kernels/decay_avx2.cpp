// AVX2 + FMA variant of the decay-term kernel. Compiled with -mavx2 -mfma and
// only called after a runtime CPU check.

#include <immintrin.h>

#include <cstdint>

#include "draftval/kernels.hpp"

namespace draftval::kernels {

namespace {

// 2^k for integer-valued k in [-1022, 1023].
inline __m256d pow2(__m256d k) noexcept {
  const __m128i k32 = _mm256_cvtpd_epi32(k);
  __m256i bits = _mm256_cvtepi32_epi64(k32);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  return _mm256_castsi256_pd(bits);
}

// exp(x) with round-off within a couple of ulp of the libm result on the
// normal range. NaN propagates; overflow gives +inf, underflow gives 0.
inline __m256d exp_pd(__m256d x) noexcept {
  const __m256d overflow = _mm256_set1_pd(709.782712893383973096);
  const __m256d underflow = _mm256_set1_pd(-745.133219101941108420);
  const __m256d log2e = _mm256_set1_pd(1.44269504088896338700);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);

  // max/min return their second operand when either is NaN.
  __m256d xc = _mm256_max_pd(_mm256_set1_pd(-746.0), x);
  xc = _mm256_min_pd(_mm256_set1_pd(710.0), xc);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, xc);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  // Taylor series to degree 13; |r| <= ln2/2 keeps the truncation below 1e-17.
  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // Split the exponent so each factor stays a normal number near underflow.
  const __m256d half = _mm256_floor_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)));
  const __m256d rest = _mm256_sub_pd(n, half);
  __m256d result = _mm256_mul_pd(_mm256_mul_pd(p, pow2(half)), pow2(rest));

  result = _mm256_blendv_pd(result, _mm256_setzero_pd(),
                            _mm256_cmp_pd(x, underflow, _CMP_LT_OQ));
  result = _mm256_blendv_pd(result, _mm256_set1_pd(__builtin_inf()),
                            _mm256_cmp_pd(x, overflow, _CMP_GT_OQ));
  return result;
}

}  // namespace

void decay_terms_avx2(std::span<const double> log_gap, double beta, double scale,
                      std::span<double> out) noexcept {
  const std::size_t n = log_gap.size();
  const __m256d vbeta = _mm256_set1_pd(beta);
  const __m256d vneg_scale = _mm256_set1_pd(-scale);
  const double* src = log_gap.data();
  double* dst = out.data();

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(src + i);
    const __m256d gap = exp_pd(_mm256_mul_pd(vbeta, g));
    _mm256_storeu_pd(dst + i, exp_pd(_mm256_mul_pd(vneg_scale, gap)));
  }
  if (i < n) {
    const auto remaining = static_cast<std::int64_t>(n - i);
    const __m256i lanes = _mm256_set_epi64x(3, 2, 1, 0);
    const __m256i mask = _mm256_cmpgt_epi64(_mm256_set1_epi64x(remaining), lanes);
    const __m256d g = _mm256_maskload_pd(src + i, mask);
    const __m256d gap = exp_pd(_mm256_mul_pd(vbeta, g));
    _mm256_maskstore_pd(dst + i, mask, exp_pd(_mm256_mul_pd(vneg_scale, gap)));
  }
}

}  // namespace draftval::kernels
