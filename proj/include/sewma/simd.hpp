#pragma once

// Dense double-precision kernels used by the run-length recursions.
//
// Every kernel exists as a scalar reference and, on x86-64, an AVX2+FMA
// variant. The variant is picked once at startup from CPUID; tests can pin
// either one with set_isa() to check they agree.

#include <cstddef>
#include <span>

namespace sewma::simd {

enum class Isa { Scalar, Avx2 };

bool isa_available(Isa isa) noexcept;
Isa active_isa() noexcept;
/// Throws DomainError if `isa` is not supported on this CPU.
void set_isa(Isa isa);
const char* isa_name(Isa isa) noexcept;

double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// y = A x, with A stored row-major as rows x cols.
void matvec(std::span<const double> a, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y) noexcept;

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;

namespace scalar {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
}  // namespace avx2

}  // namespace sewma::simd
