#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"
#include "qac/simd/kernels.hpp"

namespace qac::simd {

namespace {

constexpr Kernels kScalar{
    "scalar",
    detail::dot_scalar,
    detail::quartic_sum_scalar,
    detail::weighted_square_sum_scalar,
    detail::inverse_sum_scalar,
    detail::sturm_count4_scalar,
};

#if defined(QAC_HAVE_AVX2_TU)
constexpr Kernels kAvx2{
    "avx2",
    detail::dot_avx2,
    detail::quartic_sum_avx2,
    detail::weighted_square_sum_avx2,
    detail::inverse_sum_avx2,
    detail::sturm_count4_avx2,
};
#endif

const Kernels& select() {
  const char* env = std::getenv("QAC_SIMD");
  const std::string_view want = env ? env : "";
  if (want == "scalar") return kScalar;
  if (const Kernels* k = avx2_kernels()) return *k;
  return kScalar;
}

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

const Kernels* avx2_kernels() {
#if defined(QAC_HAVE_AVX2_TU)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& kernels() {
  static const Kernels& active = select();
  return active;
}

}  // namespace qac::simd
