#pragma once

// Data-parallel inner loops shared by interpolation, convolution and the
// histogram estimators. Each kernel has a scalar reference implementation
// and, on x86-64, an AVX2+FMA variant; the variant is chosen once at runtime.
//
// Setting LOR_SIMD=scalar in the environment forces the reference kernels.

#include <array>
#include <cstddef>

namespace lor::simd {

/// One cubic B-spline tensor stencil. Each row points at four coefficients
/// that are contiguous along x. In 2D rows[0..3] are indexed by y; in 3D
/// rows[y + 4*z] covers the full 4x4 (y,z) neighbourhood.
struct SplineStencil {
  std::array<const double*, 16> rows{};
  std::array<double, 4> wx{}, wy{}, wz{};
  std::array<double, 4> dwx{}, dwy{}, dwz{};
};

struct KernelTable {
  const char* name;
  /// y[i] += a * x[i]
  void (*axpy)(double* y, const double* x, double a, std::size_t n);
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// Value and 2-component gradient of a 2D stencil.
  void (*spline2)(const SplineStencil& s, double* value, double* grad);
  /// Value and 3-component gradient of a 3D stencil.
  void (*spline3)(const SplineStencil& s, double* value, double* grad);
};

const KernelTable& scalar_kernels() noexcept;

/// AVX2 table, or nullptr when the build or the CPU lacks AVX2 and FMA.
const KernelTable* avx2_kernels() noexcept;

/// Table used by the library. Resolved on first call.
const KernelTable& active_kernels() noexcept;

}  // namespace lor::simd
