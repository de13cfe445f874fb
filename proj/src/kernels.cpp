#include "lor/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lor/bspline.hpp"
#include "lor/error.hpp"
#include "lor/simd/kernels.hpp"

namespace lor {

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::CubicBSpline: return "bspline";
    case KernelFamily::Boxcar: return "boxcar";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "gaussian") return KernelFamily::Gaussian;
  if (s == "bspline" || s == "cubic_bspline") return KernelFamily::CubicBSpline;
  if (s == "boxcar") return KernelFamily::Boxcar;
  throw Error(ErrorKind::InvalidArgument, "unknown kernel family '" + s + "'");
}

double KernelSpec::support_radius() const noexcept {
  switch (family) {
    case KernelFamily::Gaussian: return truncation * scale;
    case KernelFamily::CubicBSpline: return 2.0 * scale;
    case KernelFamily::Boxcar: return 0.5 * scale;
  }
  return 0.0;
}

void ScaleTriple::validate() const {
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be >= 0");
  if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be > 0");
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be > 0 or infinite");
}

namespace {

void check_spec(const KernelSpec& spec) {
  if (!(spec.scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "kernel scale must be > 0");
}

bool in_boxcar(double t, double width) noexcept { return t >= -0.5 * width && t < 0.5 * width; }

}  // namespace

double eval(const KernelSpec& spec, double t) {
  check_spec(spec);
  const double s = spec.scale;
  switch (spec.family) {
    case KernelFamily::Gaussian:
      if (std::abs(t) > spec.truncation * s) return 0.0;
      return std::exp(-t * t / (2.0 * s * s)) / (std::sqrt(2.0 * std::numbers::pi) * s);
    case KernelFamily::CubicBSpline: return bspline::b3(t / s) / s;
    case KernelFamily::Boxcar: return in_boxcar(t, s) ? 1.0 : 0.0;
  }
  return 0.0;
}

double eval_derivative(const KernelSpec& spec, double t) {
  check_spec(spec);
  const double s = spec.scale;
  switch (spec.family) {
    case KernelFamily::Gaussian: return -t / (s * s) * eval(spec, t);
    case KernelFamily::CubicBSpline: return bspline::b3_derivative(t / s) / (s * s);
    case KernelFamily::Boxcar: return 0.0;
  }
  return 0.0;
}

double eval_parzen(const KernelSpec& spec, double t) {
  check_spec(spec);
  const double s = spec.scale;
  switch (spec.family) {
    case KernelFamily::Gaussian:
      if (std::abs(t) > spec.truncation * s) return 0.0;
      return std::exp(-t * t / (2.0 * s * s));
    case KernelFamily::CubicBSpline: return bspline::b3(t / s);
    case KernelFamily::Boxcar: return in_boxcar(t, s) ? 1.0 : 0.0;
  }
  return 0.0;
}

double eval_parzen_derivative(const KernelSpec& spec, double t) {
  check_spec(spec);
  const double s = spec.scale;
  switch (spec.family) {
    case KernelFamily::Gaussian: return -t / (s * s) * eval_parzen(spec, t);
    case KernelFamily::CubicBSpline: return bspline::b3_derivative(t / s) / s;
    case KernelFamily::Boxcar: return 0.0;
  }
  return 0.0;
}

double parzen_mass(const KernelSpec& spec) {
  check_spec(spec);
  switch (spec.family) {
    case KernelFamily::Gaussian:
      return spec.scale * std::sqrt(2.0 * std::numbers::pi) *
             std::erf(spec.truncation / std::numbers::sqrt2);
    case KernelFamily::CubicBSpline:
    case KernelFamily::Boxcar: return spec.scale;
  }
  return 0.0;
}

Taps discrete_taps(const KernelSpec& spec, double s) {
  Taps taps;
  switch (spec.family) {
    case KernelFamily::Gaussian: {
      if (s <= 0.0) return {{1.0}, 0};
      const auto r = static_cast<std::ptrdiff_t>(std::ceil(spec.truncation * s));
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        const double t = static_cast<double>(k);
        taps.weights.push_back(std::exp(-t * t / (2.0 * s * s)));
      }
      taps.origin = r;
      break;
    }
    case KernelFamily::CubicBSpline: {
      if (s <= 0.0) return {{1.0}, 0};
      const auto r = static_cast<std::ptrdiff_t>(std::ceil(2.0 * s));
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        taps.weights.push_back(bspline::b3(static_cast<double>(k) / s));
      }
      taps.origin = r;
      break;
    }
    case KernelFamily::Boxcar: {
      const double w = std::round(s);
      if (std::abs(s - w) > 1e-9 || w < 1.0) {
        throw Error(ErrorKind::UnsupportedKernel,
                    "boxcar convolution needs an integer width in voxels, got " + std::to_string(s));
      }
      const auto width = static_cast<std::ptrdiff_t>(w);
      taps.weights.assign(static_cast<std::size_t>(width), 1.0);
      taps.origin = width / 2;
      break;
    }
  }
  double sum = 0.0;
  for (double w : taps.weights) sum += w;
  for (double& w : taps.weights) w /= sum;
  return taps;
}

namespace {

void convolve_axis(const std::vector<double>& in, std::vector<double>& out, const Extent& e,
                   int axis, const Taps& taps) {
  const auto& k = simd::active_kernels();
  const std::size_t nx = e.n[0], ny = e.n[1], nz = e.n[2];
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t len = taps.weights.size();

  if (axis == 0) {
    std::vector<double> pad(nx + len - 1);
    for (std::size_t row = 0; row < ny * nz; ++row) {
      const double* src = in.data() + row * nx;
      for (std::size_t j = 0; j < pad.size(); ++j) {
        const auto off = static_cast<std::ptrdiff_t>(j) - taps.origin;
        pad[j] = src[mirror_index(off, static_cast<std::ptrdiff_t>(nx))];
      }
      double* dst = out.data() + row * nx;
      for (std::size_t t = 0; t < len; ++t) k.axpy(dst, pad.data() + t, taps.weights[t], nx);
    }
    return;
  }

  const std::size_t n = axis == 1 ? ny : nz;
  for (std::size_t z = 0; z < nz; ++z) {
    for (std::size_t y = 0; y < ny; ++y) {
      double* dst = out.data() + nx * (y + ny * z);
      const std::size_t c = axis == 1 ? y : z;
      for (std::size_t t = 0; t < len; ++t) {
        const auto src_c = static_cast<std::size_t>(mirror_index(
            static_cast<std::ptrdiff_t>(c + t) - taps.origin, static_cast<std::ptrdiff_t>(n)));
        const double* src =
            in.data() + (axis == 1 ? nx * (src_c + ny * z) : nx * (y + ny * src_c));
        k.axpy(dst, src, taps.weights[t], nx);
      }
    }
  }
}

}  // namespace

ImageGrid convolve(const ImageGrid& image, const KernelSpec& spec) {
  check_spec(spec);
  const Extent& e = image.extent();
  std::vector<double> a(image.values().begin(), image.values().end());
  std::vector<double> b(a.size());
  for (int axis = 0; axis < e.ndim; ++axis) {
    const double s = spec.scale / image.spacing()[static_cast<std::size_t>(axis)];
    const Taps taps = discrete_taps(spec, s);
    if (taps.weights.size() == 1) continue;
    convolve_axis(a, b, e, axis, taps);
    a.swap(b);
  }
  // Positive normalised taps keep values inside the input range up to rounding.
  const IntensityRange r = image.intensity_range();
  for (double& v : a) v = std::clamp(v, r.min, r.max);
  return ImageGrid(e, std::move(a), image.spacing(), r);
}

std::vector<double> convolve_line(const std::vector<double>& in, const Taps& taps) {
  const std::size_t n = in.size();
  const std::size_t len = taps.weights.size();
  std::vector<double> pad(n + len - 1), out(n, 0.0);
  for (std::size_t j = 0; j < pad.size(); ++j) {
    pad[j] = in[static_cast<std::size_t>(
        mirror_index(static_cast<std::ptrdiff_t>(j) - taps.origin, static_cast<std::ptrdiff_t>(n)))];
  }
  const auto& k = simd::active_kernels();
  for (std::size_t t = 0; t < len; ++t) k.axpy(out.data(), pad.data() + t, taps.weights[t], n);
  return out;
}

double bspline_equivalent_std() noexcept { return 0.6; }

double bspline_exact_std() noexcept { return std::sqrt(1.0 / 3.0); }

}  // namespace lor
