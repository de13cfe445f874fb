#include "lor/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "lor/error.hpp"
#include "lor/kernels.hpp"
#include "lor/sampling.hpp"

namespace lor {

namespace {

Vec3 world(const Extent& e, std::size_t idx, const Vec3& spacing) {
  const auto c = e.coords(idx);
  return {static_cast<double>(c[0]) * spacing[0], static_cast<double>(c[1]) * spacing[1],
          e.ndim == 3 ? static_cast<double>(c[2]) * spacing[2] : 0.0};
}

}  // namespace

ImageGrid gen_gaussian_blob(const Extent& dims, const Vec3& center, double std,
                            const Vec3& spacing) {
  if (!(std > 0.0)) throw Error(ErrorKind::InvalidArgument, "blob std must be > 0");
  std::vector<double> v(dims.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec3 x = world(dims, i, spacing);
    double r2 = 0.0;
    for (int a = 0; a < dims.ndim; ++a) {
      const double d = x[static_cast<std::size_t>(a)] - center[static_cast<std::size_t>(a)];
      r2 += d * d;
    }
    v[i] = std::exp(-r2 / (2.0 * std * std));
  }
  return ImageGrid(dims, std::move(v), spacing, IntensityRange{0.0, 1.0});
}

ImageGrid gen_linear_gradient(const Extent& dims, const Vec3& direction, double magnitude,
                              bool rescale, const Vec3& spacing) {
  double norm = 0.0;
  for (int a = 0; a < dims.ndim; ++a) norm += direction[static_cast<std::size_t>(a)] *
                                              direction[static_cast<std::size_t>(a)];
  norm = std::sqrt(norm);
  if (norm < 1e-12) throw Error(ErrorKind::ZeroDirection, "gradient direction is zero");
  if (!(magnitude > 0.0)) throw Error(ErrorKind::InvalidArgument, "magnitude must be > 0");
  std::vector<double> v(dims.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec3 x = world(dims, i, spacing);
    double s = 0.0;
    for (int a = 0; a < dims.ndim; ++a) {
      s += direction[static_cast<std::size_t>(a)] / norm * x[static_cast<std::size_t>(a)];
    }
    v[i] = magnitude * s;
  }
  ImageGrid img(dims, std::move(v), spacing);
  return rescale ? img.normalized() : img;
}

ImageGrid gen_random_image(const Extent& dims, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(dims.size());
  for (double& x : v) x = rng.uniform();
  return ImageGrid(dims, std::move(v), {1.0, 1.0, 1.0}, IntensityRange{0.0, 1.0});
}

ImageGrid gen_smooth_random(const Extent& dims, std::uint64_t seed, double smoothing) {
  const ImageGrid noise = gen_random_image(dims, seed);
  return convolve(noise, KernelSpec{KernelFamily::Gaussian, smoothing}).with_observed_range().normalized();
}

ImageGrid resample_window(const InterpolantCoefficients& field, const Extent& out,
                          const Vec3& origin) {
  std::vector<double> v(out.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto c = out.coords(i);
    const Vec3 p{static_cast<double>(c[0]) + origin[0], static_cast<double>(c[1]) + origin[1],
                 static_cast<double>(c[2]) + origin[2]};
    v[i] = sample(field, p, false).value;
  }
  const IntensityRange r = field.intensity_range();
  for (double& x : v) x = std::clamp(x, r.min, r.max);
  return ImageGrid(out, std::move(v), field.source().spacing(), r);
}

}  // namespace lor
