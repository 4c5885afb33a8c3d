#include "impl.hpp"

#if defined(NETDIFF_HAVE_AVX2_TU)

#include <immintrin.h>

#include <cmath>

namespace netdiff::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

void gemv_t_avx2(const double* a, std::size_t rows, std::size_t cols, const double* w, double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  // Two rows per pass halves the load/store traffic on y.
  std::size_t r = 0;
  for (; r + 2 <= rows; r += 2) {
    const double* r0 = a + r * cols;
    const double* r1 = r0 + cols;
    const __m256d w0 = _mm256_set1_pd(w[r]);
    const __m256d w1 = _mm256_set1_pd(w[r + 1]);
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      __m256d acc = _mm256_loadu_pd(y + c);
      acc = _mm256_fmadd_pd(w0, _mm256_loadu_pd(r0 + c), acc);
      acc = _mm256_fmadd_pd(w1, _mm256_loadu_pd(r1 + c), acc);
      _mm256_storeu_pd(y + c, acc);
    }
    for (; c < cols; ++c) y[c] += w[r] * r0[c] + w[r + 1] * r1[c];
  }
  if (r < rows) axpy_avx2(w[r], a + r * cols, y, cols);
}

void threshold_avx2(const double* u, const double* p, std::uint8_t* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ge = _mm256_cmp_pd(_mm256_loadu_pd(p + i), _mm256_loadu_pd(u + i), _CMP_GE_OQ);
    const int bits = _mm256_movemask_pd(ge);
    out[i] = static_cast<std::uint8_t>(bits & 1);
    out[i + 1] = static_cast<std::uint8_t>((bits >> 1) & 1);
    out[i + 2] = static_cast<std::uint8_t>((bits >> 2) & 1);
    out[i + 3] = static_cast<std::uint8_t>((bits >> 3) & 1);
  }
  for (; i < n; ++i) out[i] = p[i] >= u[i] ? 1 : 0;
}

void soft_threshold_avx2(double* v, double t, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d vt = _mm256_set1_pd(t);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(v + i);
    const __m256d mag = _mm256_max_pd(_mm256_sub_pd(_mm256_andnot_pd(sign_mask, x), vt), zero);
    const __m256d pos = _mm256_cmp_pd(mag, zero, _CMP_GT_OQ);
    const __m256d sign = _mm256_and_pd(_mm256_and_pd(x, sign_mask), pos);
    _mm256_storeu_pd(v + i, _mm256_or_pd(mag, sign));
  }
  for (; i < n; ++i) {
    const double m = std::fabs(v[i]) - t;
    v[i] = m > 0.0 ? std::copysign(m, v[i]) : 0.0;
  }
}

}  // namespace

const KernelTable kAvx2Table = {
    Isa::Avx2,   dot_avx2,       axpy_avx2,          gemv_avx2,
    gemv_t_avx2, threshold_avx2, soft_threshold_avx2,
};

}  // namespace netdiff::kernels::detail

#endif  // NETDIFF_HAVE_AVX2_TU
