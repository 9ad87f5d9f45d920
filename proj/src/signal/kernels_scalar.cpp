#include "hitl/signal/simd_kernels.hpp"

namespace hitl::signal::kernels {

double sum_squares_scalar(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double frame_sum_squares_scalar(std::span<const EmgFrame> frames) {
  double acc = 0.0;
  for (const EmgFrame& f : frames) acc += f.v * f.v;
  return acc;
}

}  // namespace hitl::signal::kernels
