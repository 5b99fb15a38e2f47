#include "strapsim/simd/kernels.hpp"

#include <algorithm>

namespace strapsim::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void min_max_sum_scalar(const double* a, const double* b, std::size_t n, double* min_sum,
                        double* max_sum) noexcept {
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lo += std::min(a[i], b[i]);
    hi += std::max(a[i], b[i]);
  }
  *min_sum = lo;
  *max_sum = hi;
}

std::size_t count_equal_scalar(const std::uint32_t* a, const std::uint32_t* b,
                               std::size_t n) noexcept {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += a[i] == b[i] ? 1 : 0;
  return count;
}

std::size_t argmax_scalar(const double* v, std::size_t n) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

void gather_scalar(const double* src, const std::uint32_t* idx, std::size_t n,
                   double* dst) noexcept {
  for (std::size_t i = 0; i < n; ++i) dst[i] = src[idx[i]];
}

constexpr KernelTable kScalar{
    Backend::Scalar, dot_scalar, min_max_sum_scalar, count_equal_scalar, argmax_scalar,
    gather_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace strapsim::simd
