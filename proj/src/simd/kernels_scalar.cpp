#include "lor/simd/kernels.hpp"

namespace lor::simd {
namespace {

void axpy_scalar(double* y, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void spline2_scalar(const SplineStencil& s, double* value, double* grad) {
  double v = 0.0, gx = 0.0, gy = 0.0;
  for (int y = 0; y < 4; ++y) {
    const double* row = s.rows[static_cast<std::size_t>(y)];
    double rv = 0.0, rd = 0.0;
    for (int x = 0; x < 4; ++x) {
      rv += s.wx[static_cast<std::size_t>(x)] * row[x];
      rd += s.dwx[static_cast<std::size_t>(x)] * row[x];
    }
    v += s.wy[static_cast<std::size_t>(y)] * rv;
    gx += s.wy[static_cast<std::size_t>(y)] * rd;
    gy += s.dwy[static_cast<std::size_t>(y)] * rv;
  }
  *value = v;
  grad[0] = gx;
  grad[1] = gy;
}

void spline3_scalar(const SplineStencil& s, double* value, double* grad) {
  double v = 0.0, gx = 0.0, gy = 0.0, gz = 0.0;
  for (int z = 0; z < 4; ++z) {
    double pv = 0.0, pdx = 0.0, pdy = 0.0;
    for (int y = 0; y < 4; ++y) {
      const double* row = s.rows[static_cast<std::size_t>(y + 4 * z)];
      double rv = 0.0, rd = 0.0;
      for (int x = 0; x < 4; ++x) {
        rv += s.wx[static_cast<std::size_t>(x)] * row[x];
        rd += s.dwx[static_cast<std::size_t>(x)] * row[x];
      }
      pv += s.wy[static_cast<std::size_t>(y)] * rv;
      pdx += s.wy[static_cast<std::size_t>(y)] * rd;
      pdy += s.dwy[static_cast<std::size_t>(y)] * rv;
    }
    v += s.wz[static_cast<std::size_t>(z)] * pv;
    gx += s.wz[static_cast<std::size_t>(z)] * pdx;
    gy += s.wz[static_cast<std::size_t>(z)] * pdy;
    gz += s.dwz[static_cast<std::size_t>(z)] * pv;
  }
  *value = v;
  grad[0] = gx;
  grad[1] = gy;
  grad[2] = gz;
}

constexpr KernelTable kScalar{"scalar", axpy_scalar, dot_scalar, spline2_scalar, spline3_scalar};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace lor::simd
