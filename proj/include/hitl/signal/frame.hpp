#pragma once

#include <cstddef>
#include <type_traits>

namespace hitl::signal {

// One sample of a single-channel sEMG stream. Timestamps are seconds on a
// monotonic clock, values are amplitude after acquisition scaling.
struct EmgFrame {
  double t = 0.0;
  double v = 0.0;

  friend bool operator==(const EmgFrame&, const EmgFrame&) = default;
};

// The strided kernels read frames as an interleaved double array.
static_assert(std::is_standard_layout_v<EmgFrame>);
static_assert(sizeof(EmgFrame) == 2 * sizeof(double));
static_assert(offsetof(EmgFrame, v) == sizeof(double));

}  // namespace hitl::signal
