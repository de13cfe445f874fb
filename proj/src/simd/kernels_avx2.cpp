#include "lor/simd/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define LOR_HAVE_AVX2_TU 1
#include <immintrin.h>

#include <cmath>
#endif

namespace lor::simd {

#if LOR_HAVE_AVX2_TU

namespace {

#define LOR_AVX2 __attribute__((target("avx2,fma")))

LOR_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

LOR_AVX2 void axpy_avx2(double* y, const double* x, double a, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
  }
  // std::fma keeps the tail rounding identical to the vector body.
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

LOR_AVX2 double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

// Rows are accumulated as 4-vectors weighted by the (y,z) weights; the x
// weights are applied once at the end.
LOR_AVX2 void spline2_avx2(const SplineStencil& s, double* value, double* grad) {
  __m256d acc_v = _mm256_setzero_pd();
  __m256d acc_y = _mm256_setzero_pd();
  for (std::size_t y = 0; y < 4; ++y) {
    const __m256d row = _mm256_loadu_pd(s.rows[y]);
    acc_v = _mm256_fmadd_pd(row, _mm256_set1_pd(s.wy[y]), acc_v);
    acc_y = _mm256_fmadd_pd(row, _mm256_set1_pd(s.dwy[y]), acc_y);
  }
  const __m256d wx = _mm256_loadu_pd(s.wx.data());
  const __m256d dwx = _mm256_loadu_pd(s.dwx.data());
  *value = hsum(_mm256_mul_pd(acc_v, wx));
  grad[0] = hsum(_mm256_mul_pd(acc_v, dwx));
  grad[1] = hsum(_mm256_mul_pd(acc_y, wx));
}

LOR_AVX2 void spline3_avx2(const SplineStencil& s, double* value, double* grad) {
  __m256d acc_v = _mm256_setzero_pd();
  __m256d acc_y = _mm256_setzero_pd();
  __m256d acc_z = _mm256_setzero_pd();
  for (std::size_t z = 0; z < 4; ++z) {
    const double wz = s.wz[z];
    const double dwz = s.dwz[z];
    for (std::size_t y = 0; y < 4; ++y) {
      const __m256d row = _mm256_loadu_pd(s.rows[y + 4 * z]);
      acc_v = _mm256_fmadd_pd(row, _mm256_set1_pd(s.wy[y] * wz), acc_v);
      acc_y = _mm256_fmadd_pd(row, _mm256_set1_pd(s.dwy[y] * wz), acc_y);
      acc_z = _mm256_fmadd_pd(row, _mm256_set1_pd(s.wy[y] * dwz), acc_z);
    }
  }
  const __m256d wx = _mm256_loadu_pd(s.wx.data());
  const __m256d dwx = _mm256_loadu_pd(s.dwx.data());
  *value = hsum(_mm256_mul_pd(acc_v, wx));
  grad[0] = hsum(_mm256_mul_pd(acc_v, dwx));
  grad[1] = hsum(_mm256_mul_pd(acc_y, wx));
  grad[2] = hsum(_mm256_mul_pd(acc_z, wx));
}

#undef LOR_AVX2

constexpr KernelTable kAvx2{"avx2", axpy_avx2, dot_avx2, spline2_avx2, spline3_avx2};

}  // namespace

const KernelTable* avx2_kernels() noexcept {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &kAvx2 : nullptr;
}

#else

const KernelTable* avx2_kernels() noexcept { return nullptr; }

#endif

}  // namespace lor::simd
