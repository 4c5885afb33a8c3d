#include <cmath>

#include "impl.hpp"

namespace netdiff::kernels::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

void gemv_t_scalar(const double* a, std::size_t rows, std::size_t cols, const double* w,
                   double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(w[r], a + r * cols, y, cols);
}

void threshold_scalar(const double* u, const double* p, std::uint8_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = p[i] >= u[i] ? 1 : 0;
}

void soft_threshold_scalar(double* v, double t, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::fabs(v[i]) - t;
    v[i] = m > 0.0 ? std::copysign(m, v[i]) : 0.0;
  }
}

}  // namespace

const KernelTable kScalarTable = {
    Isa::Scalar,    dot_scalar,       axpy_scalar,          gemv_scalar,
    gemv_t_scalar,  threshold_scalar, soft_threshold_scalar,
};

}  // namespace netdiff::kernels::detail
