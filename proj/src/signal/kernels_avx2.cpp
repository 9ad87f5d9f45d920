// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "hitl/signal/simd_kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace hitl::signal::kernels {

namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

double sum_squares_avx2(std::span<const double> x) {
  const double* p = x.data();
  const std::size_t n = x.size();
  std::size_t i = 0;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    __m256d a = _mm256_loadu_pd(p + i);
    __m256d b = _mm256_loadu_pd(p + i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  if (i + 4 <= n) {
    __m256d a = _mm256_loadu_pd(p + i);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += p[i] * p[i];
  return acc;
}

double frame_sum_squares_avx2(std::span<const EmgFrame> frames) {
  // Each 256-bit load covers two frames as [t0, v0, t1, v1]; the blend
  // zeroes the timestamp lanes before accumulation.
  const double* p = reinterpret_cast<const double*>(frames.data());
  const std::size_t n = frames.size();
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc0 = zero;
  __m256d acc1 = zero;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_blend_pd(zero, _mm256_loadu_pd(p + 2 * i), 0b1010);
    __m256d b = _mm256_blend_pd(zero, _mm256_loadu_pd(p + 2 * i + 4), 0b1010);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  if (i + 2 <= n) {
    __m256d a = _mm256_blend_pd(zero, _mm256_loadu_pd(p + 2 * i), 0b1010);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    i += 2;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += frames[i].v * frames[i].v;
  return acc;
}

}  // namespace hitl::signal::kernels

#endif
