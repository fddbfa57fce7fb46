#include <cstdlib>
#include <string_view>

#include "specrob/simd.hpp"

namespace specrob::simd {

#if defined(SPECROB_HAVE_AVX2)
const Kernels& avx2_table();
#endif

const Kernels* avx2_kernels() {
#if defined(SPECROB_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& kernels() {
  static const Kernels& active = [&]() -> const Kernels& {
    const char* env = std::getenv("SPECROB_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return scalar_kernels();
    if (const Kernels* wide = avx2_kernels()) return *wide;
    return scalar_kernels();
  }();
  return active;
}

}  // namespace specrob::simd
