#include "hitl/signal/simd_kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace hitl::signal::kernels {

namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa initial_isa() {
  if (const char* env = std::getenv("HITL_SIMD")) {
    if (std::string(env) == "scalar") return Isa::Scalar;
  }
  return detected_isa();
}

Isa& active() {
  static Isa isa = initial_isa();
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

std::vector<Isa> supported_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (cpu_has(isa)) out.push_back(isa);
  }
  return out;
}

Isa detected_isa() { return supported_isas().back(); }

Isa active_isa() { return active(); }

void force_isa(Isa isa) {
  if (!cpu_has(isa)) {
    throw std::invalid_argument("ISA not supported on this CPU: " + std::string(isa_name(isa)));
  }
  active() = isa;
}

double sum_squares(Isa isa, std::span<const double> x) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return sum_squares_avx2(x);
#endif
#if defined(__aarch64__)
    case Isa::Neon: return sum_squares_neon(x);
#endif
    default: return sum_squares_scalar(x);
  }
}

double frame_sum_squares(Isa isa, std::span<const EmgFrame> frames) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return frame_sum_squares_avx2(frames);
#endif
#if defined(__aarch64__)
    case Isa::Neon: return frame_sum_squares_neon(frames);
#endif
    default: return frame_sum_squares_scalar(frames);
  }
}

double sum_squares(std::span<const double> x) { return sum_squares(active(), x); }

double frame_sum_squares(std::span<const EmgFrame> frames) {
  return frame_sum_squares(active(), frames);
}

}  // namespace hitl::signal::kernels
