#include "lor/bspline.hpp"

#include <cmath>

#include "lor/error.hpp"
#include "lor/simd/kernels.hpp"

namespace lor {

namespace bspline {

double b3(double t) noexcept {
  const double a = std::abs(t);
  if (a < 1.0) return (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
  if (a < 2.0) {
    const double b = 2.0 - a;
    return b * b * b / 6.0;
  }
  return 0.0;
}

double b3_derivative(double t) noexcept {
  const double a = std::abs(t);
  const double s = t < 0.0 ? -1.0 : 1.0;
  if (a < 1.0) return s * (-2.0 * a + 1.5 * a * a);
  if (a < 2.0) {
    const double b = 2.0 - a;
    return -s * 0.5 * b * b;
  }
  return 0.0;
}

std::array<double, 4> weights(double u) noexcept {
  const double u2 = u * u, u3 = u2 * u, v = 1.0 - u;
  return {v * v * v / 6.0, (3.0 * u3 - 6.0 * u2 + 4.0) / 6.0,
          (-3.0 * u3 + 3.0 * u2 + 3.0 * u + 1.0) / 6.0, u3 / 6.0};
}

std::array<double, 4> derivative_weights(double u) noexcept {
  const double u2 = u * u, v = 1.0 - u;
  return {-0.5 * v * v, 1.5 * u2 - 2.0 * u, -1.5 * u2 + u + 0.5, 0.5 * u2};
}

}  // namespace bspline

namespace {

const double kPole = std::sqrt(3.0) - 2.0;

// In-place conversion of one line of samples to cubic spline coefficients.
void filter_line(std::vector<double>& c) {
  const std::size_t n = c.size();
  const double z = kPole;
  for (double& v : c) v *= 6.0;

  // Causal initialisation for the whole-sample mirror extension (period 2n-2).
  double zk = z;
  double z2n = std::pow(z, static_cast<double>(2 * n - 2));
  double sum = c[0] + std::pow(z, static_cast<double>(n - 1)) * c[n - 1];
  double zr = z2n / z;  // z^(2n-3)
  for (std::size_t k = 1; k + 1 < n; ++k) {
    sum += (zk + zr) * c[k];
    zk *= z;
    zr /= z;
  }
  c[0] = sum / (1.0 - z2n);
  for (std::size_t k = 1; k < n; ++k) c[k] += z * c[k - 1];

  c[n - 1] = (z / (z * z - 1.0)) * (c[n - 1] + z * c[n - 2]);
  for (std::size_t k = n - 1; k-- > 0;) c[k] = z * (c[k + 1] - c[k]);
}

}  // namespace

InterpolantCoefficients prefilter(const ImageGrid& image, BoundaryPolicy boundary) {
  const Extent& e = image.extent();
  for (int a = 0; a < e.ndim; ++a) {
    if (e.n[static_cast<std::size_t>(a)] < 4) {
      throw Error(ErrorKind::DimensionTooSmall, "prefilter needs >= 4 voxels per axis");
    }
  }
  std::vector<double> c(image.values().begin(), image.values().end());
  std::vector<double> line;
  for (int axis = 0; axis < e.ndim; ++axis) {
    const std::size_t n = e.n[static_cast<std::size_t>(axis)];
    const std::size_t stride = e.stride(axis);
    line.resize(n);
    for (std::size_t idx = 0; idx < e.size(); ++idx) {
      if ((idx / stride) % n != 0) continue;  // only line starts
      for (std::size_t k = 0; k < n; ++k) line[k] = c[idx + k * stride];
      filter_line(line);
      for (std::size_t k = 0; k < n; ++k) c[idx + k * stride] = line[k];
    }
  }
  return InterpolantCoefficients(image, std::move(c), boundary);
}

bool inside_domain(const Extent& e, const Vec3& p) noexcept {
  for (int a = 0; a < e.ndim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (!(p[ua] >= 0.0 && p[ua] <= static_cast<double>(e.n[ua] - 1))) return false;
  }
  return true;
}

SampleValue sample(const InterpolantCoefficients& c, const Vec3& p, bool want_gradient) {
  const Extent& e = c.extent();
  if (c.boundary() == BoundaryPolicy::Strict && !inside_domain(e, p)) {
    throw Error(ErrorKind::OutOfDomain, "sample position outside the image domain");
  }
  const double* coeffs = c.coeffs().data();
  const int nd = e.ndim;

  std::array<std::ptrdiff_t, 3> base{0, 0, 0};
  simd::SplineStencil st;
  std::array<std::array<double, 4>*, 3> w{&st.wx, &st.wy, &st.wz};
  std::array<std::array<double, 4>*, 3> dw{&st.dwx, &st.dwy, &st.dwz};
  for (int a = 0; a < nd; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const double fl = std::floor(p[ua]);
    base[ua] = static_cast<std::ptrdiff_t>(fl) - 1;
    *w[ua] = bspline::weights(p[ua] - fl);
    *dw[ua] = bspline::derivative_weights(p[ua] - fl);
  }

  const auto nx = static_cast<std::ptrdiff_t>(e.n[0]);
  const auto ny = static_cast<std::ptrdiff_t>(e.n[1]);
  const auto nz = static_cast<std::ptrdiff_t>(e.n[2]);
  const bool x_contiguous = base[0] >= 0 && base[0] + 3 < nx;
  std::array<double, 64> scratch;
  const int zrows = nd == 3 ? 4 : 1;
  for (int zz = 0; zz < zrows; ++zz) {
    const std::ptrdiff_t iz = nd == 3 ? mirror_index(base[2] + zz, nz) : 0;
    for (int yy = 0; yy < 4; ++yy) {
      const std::ptrdiff_t iy = mirror_index(base[1] + yy, ny);
      const std::size_t r = static_cast<std::size_t>(yy + 4 * zz);
      const std::size_t row0 = static_cast<std::size_t>(nx * (iy + ny * iz));
      if (x_contiguous) {
        st.rows[r] = coeffs + row0 + static_cast<std::size_t>(base[0]);
      } else {
        for (int xx = 0; xx < 4; ++xx) {
          scratch[r * 4 + static_cast<std::size_t>(xx)] =
              coeffs[row0 + static_cast<std::size_t>(mirror_index(base[0] + xx, nx))];
        }
        st.rows[r] = scratch.data() + r * 4;
      }
    }
  }

  SampleValue out;
  double grad[3] = {0.0, 0.0, 0.0};
  const auto& k = simd::active_kernels();
  if (nd == 3) {
    k.spline3(st, &out.value, grad);
  } else {
    k.spline2(st, &out.value, grad);
  }
  if (want_gradient) out.gradient = {grad[0], grad[1], grad[2]};
  return out;
}

}  // namespace lor
