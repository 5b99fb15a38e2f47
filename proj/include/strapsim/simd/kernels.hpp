#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Data-parallel inner loops used across the library. Every kernel has a
// scalar reference implementation; vector variants must agree with it
// exactly for integer/selection kernels and to rounding for reductions.
namespace strapsim::simd {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  Backend backend;

  double (*dot)(const double* a, const double* b, std::size_t n) noexcept;

  // Sums of element-wise min and max of two equally sized arrays.
  void (*min_max_sum)(const double* a, const double* b, std::size_t n, double* min_sum,
                      double* max_sum) noexcept;

  std::size_t (*count_equal)(const std::uint32_t* a, const std::uint32_t* b,
                             std::size_t n) noexcept;

  // Index of the first maximum; n must be > 0.
  std::size_t (*argmax)(const double* v, std::size_t n) noexcept;

  // dst[k] = src[idx[k]]
  void (*gather)(const double* src, const std::uint32_t* idx, std::size_t n,
                 double* dst) noexcept;
};

const KernelTable& scalar_kernels() noexcept;
// Only defined when the build includes the AVX2 translation unit.
const KernelTable* avx2_kernels() noexcept;

bool available(Backend backend) noexcept;

// Kernels for a specific backend; throws InvalidArgument when unavailable.
const KernelTable& kernels(Backend backend);

// Runtime-selected kernels: the widest available backend unless the
// STRAPSIM_SIMD environment variable is set to "scalar".
const KernelTable& kernels() noexcept;

std::string_view name(Backend backend) noexcept;

}  // namespace strapsim::simd
