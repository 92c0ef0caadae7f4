#include <cstdlib>
#include <string_view>

#include "draftval/kernels.hpp"

namespace draftval::kernels {

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(DRAFTVAL_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

namespace {

using KernelFn = void (*)(std::span<const double>, double, double, std::span<double>) noexcept;

struct Selection {
  Isa isa;
  KernelFn fn;
};

Selection select() noexcept {
  Isa isa = isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
  if (const char* env = std::getenv("DRAFTVAL_ISA")) {
    const std::string_view want(env);
    if (want == "scalar") isa = Isa::scalar;
    if (want == "avx2" && isa_supported(Isa::avx2)) isa = Isa::avx2;
  }
#if defined(DRAFTVAL_HAVE_AVX2)
  if (isa == Isa::avx2) return {isa, &decay_terms_avx2};
#endif
  return {Isa::scalar, &decay_terms_scalar};
}

const Selection& selection() noexcept {
  static const Selection s = select();
  return s;
}

}  // namespace

Isa active_isa() noexcept { return selection().isa; }

void decay_terms(std::span<const double> log_gap, double beta, double scale,
                 std::span<double> out) noexcept {
  selection().fn(log_gap, beta, scale, out);
}

}  // namespace draftval::kernels
