#include "hitl/signal/simd_kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace hitl::signal::kernels {

double sum_squares_neon(std::span<const double> x) {
  const double* p = x.data();
  const std::size_t n = x.size();
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float64x2_t a = vld1q_f64(p + i);
    float64x2_t b = vld1q_f64(p + i + 2);
    acc0 = vfmaq_f64(acc0, a, a);
    acc1 = vfmaq_f64(acc1, b, b);
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += p[i] * p[i];
  return acc;
}

double frame_sum_squares_neon(std::span<const EmgFrame> frames) {
  // vld2q de-interleaves [t0, v0, t1, v1] into {t0, t1} and {v0, v1}.
  const double* p = reinterpret_cast<const double*>(frames.data());
  const std::size_t n = frames.size();
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2x2_t tv = vld2q_f64(p + 2 * i);
    acc = vfmaq_f64(acc, tv.val[1], tv.val[1]);
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) sum += frames[i].v * frames[i].v;
  return sum;
}

}  // namespace hitl::signal::kernels

#endif
