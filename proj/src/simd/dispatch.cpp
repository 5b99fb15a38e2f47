#include <cstdlib>
#include <string>

#include "strapsim/error.hpp"
#include "strapsim/simd/kernels.hpp"

namespace strapsim::simd {

#if !defined(STRAPSIM_HAVE_AVX2)
const KernelTable* avx2_kernels() noexcept { return nullptr; }
#endif

bool available(Backend backend) noexcept {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(STRAPSIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2") &&
             __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels(Backend backend) {
  if (!available(backend)) {
    throw Error(ErrorCode::InvalidArgument,
                "SIMD backend " + std::string(name(backend)) + " is not available on this CPU");
  }
  return backend == Backend::Avx2 ? *avx2_kernels() : scalar_kernels();
}

const KernelTable& kernels() noexcept {
  static const KernelTable& selected = []() -> const KernelTable& {
    const char* forced = std::getenv("STRAPSIM_SIMD");
    if (forced != nullptr && std::string(forced) == "scalar") return scalar_kernels();
    if (available(Backend::Avx2)) return *avx2_kernels();
    return scalar_kernels();
  }();
  return selected;
}

std::string_view name(Backend backend) noexcept {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

}  // namespace strapsim::simd
