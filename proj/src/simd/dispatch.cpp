#include <atomic>

#include "sewma/errors.hpp"
#include "sewma/simd.hpp"

namespace sewma::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(SEWMA_HAVE_AVX2)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar};
  return isa;
}

bool use_avx2() noexcept {
#if defined(SEWMA_HAVE_AVX2)
  return current().load(std::memory_order_relaxed) == Isa::Avx2;
#else
  return false;
#endif
}

}  // namespace

bool isa_available(Isa isa) noexcept { return isa == Isa::Scalar || cpu_has_avx2(); }

Isa active_isa() noexcept { return current().load(); }

void set_isa(Isa isa) {
  if (!isa_available(isa)) throw DomainError("requested SIMD variant is not supported on this CPU");
  current().store(isa);
}

const char* isa_name(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

double dot(std::span<const double> a, std::span<const double> b) noexcept {
#if defined(SEWMA_HAVE_AVX2)
  if (use_avx2()) return avx2::dot(a.data(), b.data(), a.size());
#endif
  return scalar::dot(a.data(), b.data(), a.size());
}

void matvec(std::span<const double> a, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y) noexcept {
#if defined(SEWMA_HAVE_AVX2)
  if (use_avx2()) return avx2::matvec(a.data(), rows, cols, x.data(), y.data());
#endif
  scalar::matvec(a.data(), rows, cols, x.data(), y.data());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
#if defined(SEWMA_HAVE_AVX2)
  if (use_avx2()) return avx2::axpy(alpha, x.data(), y.data(), x.size());
#endif
  scalar::axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace sewma::simd
