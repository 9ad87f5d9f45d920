#pragma once

// Sum-of-squares kernels behind the RMS envelope.
//
// Every kernel has a scalar reference and, where the target supports it, an
// AVX2 (x86-64) or NEON (aarch64) variant. The dispatcher picks the widest
// variant the running CPU supports; HITL_SIMD=scalar in the environment pins
// the scalar path. Variants agree to rounding (lane-wise partial sums), not
// bit-for-bit.

#include "hitl/signal/frame.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace hitl::signal::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

// Σ x² over a contiguous buffer.
double sum_squares_scalar(std::span<const double> x);
// Σ v² over frames, skipping the interleaved timestamps.
double frame_sum_squares_scalar(std::span<const EmgFrame> frames);

#if defined(__x86_64__) || defined(_M_X64)
double sum_squares_avx2(std::span<const double> x);
double frame_sum_squares_avx2(std::span<const EmgFrame> frames);
#endif

#if defined(__aarch64__)
double sum_squares_neon(std::span<const double> x);
double frame_sum_squares_neon(std::span<const EmgFrame> frames);
#endif

// ISAs this CPU can execute, scalar first.
std::vector<Isa> supported_isas();
Isa detected_isa();

// The ISA used by the dispatching entry points below.
Isa active_isa();
// Throws std::invalid_argument if the CPU lacks the ISA.
void force_isa(Isa isa);

double sum_squares(std::span<const double> x);
double frame_sum_squares(std::span<const EmgFrame> frames);

double sum_squares(Isa isa, std::span<const double> x);
double frame_sum_squares(Isa isa, std::span<const EmgFrame> frames);

}  // namespace hitl::signal::kernels
