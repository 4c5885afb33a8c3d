#pragma once

// Dense arithmetic inner loops used by the model fits and the simulation
// code. Each kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant; the variant is chosen once at startup from CPUID (or the
// NETDIFF_SIMD environment variable: "scalar" or "avx2").

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "netdiff/matrix.hpp"

namespace netdiff::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[r] = sum_c a[r*cols + c] * x[c]
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y[c] = sum_r a[r*cols + c] * w[r]   (y is overwritten)
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* w, double* y);
  // out[i] = (p[i] >= u[i])
  void (*threshold)(const double* u, const double* p, std::uint8_t* out, std::size_t n);
  // v[i] = sign(v[i]) * max(|v[i]| - t, 0)
  void (*soft_threshold)(double* v, double t, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the AVX2 translation unit was not compiled in.
const KernelTable* avx2_table() noexcept;

bool cpu_supports(Isa isa) noexcept;

/// Currently selected table.
const KernelTable& active() noexcept;

/// Force a particular ISA (tests, benchmarking). Throws InvalidArgument when
/// the CPU or the build cannot run it.
void select(Isa isa);

// Span-based entry points that route through active().
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void gemv(const Matrix& a, std::span<const double> x, std::span<double> y);
void gemv_t(const Matrix& a, std::span<const double> w, std::span<double> y);
void bernoulli_threshold(std::span<const double> u, std::span<const double> p,
                         std::span<std::uint8_t> out);
void soft_threshold(std::span<double> v, double t);

}  // namespace netdiff::kernels
