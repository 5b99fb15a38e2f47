// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <bit>

#include "strapsim/simd/kernels.hpp"

namespace strapsim::simd {
namespace {

inline double hsum(__m256d v) noexcept {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void min_max_sum_avx2(const double* a, const double* b, std::size_t n, double* min_sum,
                      double* max_sum) noexcept {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    lo = _mm256_add_pd(lo, _mm256_min_pd(va, vb));
    hi = _mm256_add_pd(hi, _mm256_max_pd(va, vb));
  }
  double lo_sum = hsum(lo);
  double hi_sum = hsum(hi);
  for (; i < n; ++i) {
    lo_sum += a[i] < b[i] ? a[i] : b[i];
    hi_sum += a[i] < b[i] ? b[i] : a[i];
  }
  *min_sum = lo_sum;
  *max_sum = hi_sum;
}

std::size_t count_equal_avx2(const std::uint32_t* a, const std::uint32_t* b,
                             std::size_t n) noexcept {
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    const int mask = _mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpeq_epi32(va, vb)));
    count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) count += a[i] == b[i] ? 1 : 0;
  return count;
}

std::size_t argmax_avx2(const double* v, std::size_t n) noexcept {
  if (n < 8) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (v[i] > v[best]) best = i;
    return best;
  }
  // Pass 1: maximum value. Pass 2: first index holding it.
  __m256d vmax = _mm256_loadu_pd(v);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) vmax = _mm256_max_pd(vmax, _mm256_loadu_pd(v + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vmax);
  double best = lanes[0];
  for (int k = 1; k < 4; ++k)
    if (lanes[k] > best) best = lanes[k];
  for (; i < n; ++i)
    if (v[i] > best) best = v[i];

  const __m256d target = _mm256_set1_pd(best);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(v + j), target, _CMP_EQ_OQ));
    if (mask != 0) return j + static_cast<std::size_t>(std::countr_zero(static_cast<unsigned>(mask)));
  }
  for (; j < n; ++j)
    if (v[j] == best) return j;
  return 0;
}

void gather_avx2(const double* src, const std::uint32_t* idx, std::size_t n,
                 double* dst) noexcept {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + i));
    _mm256_storeu_pd(dst + i, _mm256_i32gather_pd(src, vi, 8));
  }
  for (; i < n; ++i) dst[i] = src[idx[i]];
}

constexpr KernelTable kAvx2{
    Backend::Avx2, dot_avx2, min_max_sum_avx2, count_equal_avx2, argmax_avx2, gather_avx2,
};

}  // namespace

const KernelTable* avx2_kernels() noexcept { return &kAvx2; }

}  // namespace strapsim::simd
