#pragma once

#include <limits>
#include <string>
#include <vector>

#include "lor/image.hpp"

namespace lor {

enum class KernelFamily { Gaussian, CubicBSpline, Boxcar };

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& s);

/// Kernel family and scale: the standard deviation of a Gaussian, the width
/// of a Boxcar, or the dilation of a cubic B-spline. Gaussians are truncated
/// at `truncation` multiples of the scale.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double scale = 1.0;
  double truncation = 4.0;

  /// Half-width of the support; values beyond it are zero.
  double support_radius() const noexcept;
};

/// The three scales of a locally orderless image: measurement (sigma, voxels),
/// intensity (beta, normalised intensity) and integration (alpha, voxels).
struct ScaleTriple {
  double sigma = 0.0;
  double beta = 0.05;
  double alpha = std::numeric_limits<double>::infinity();

  void validate() const;
};

/// Spatial kernel value. Gaussian and B-spline are normalised to unit integral;
/// Boxcar is the indicator of [-scale/2, scale/2).
double eval(const KernelSpec& spec, double t);
double eval_derivative(const KernelSpec& spec, double t);

/// Intensity (Parzen) window. The Gaussian is unnormalised, exp(-t^2/(2 scale^2));
/// the B-spline is B3(t/scale); Boxcar as in eval.
double eval_parzen(const KernelSpec& spec, double t);
double eval_parzen_derivative(const KernelSpec& spec, double t);

/// Integral of the Parzen window over the real line.
double parzen_mass(const KernelSpec& spec);

/// Discrete convolution taps: out[i] = sum_k weights[k] * in[i + k - origin].
struct Taps {
  std::vector<double> weights;
  std::ptrdiff_t origin = 0;
};

/// Taps normalised to sum 1, sampled with `scale_in_voxels` in place of spec.scale.
Taps discrete_taps(const KernelSpec& spec, double scale_in_voxels);

/// Separable convolution with mirror boundaries. Kernel scales are in world
/// units and divided by the per-axis spacing. Boxcar is accepted only for
/// integer widths in voxels.
ImageGrid convolve(const ImageGrid& image, const KernelSpec& spec);

/// Convolution of a single line with mirror boundaries.
std::vector<double> convolve_line(const std::vector<double>& in, const Taps& taps);

/// Standard deviation used when matching B-spline and Gaussian experiments.
double bspline_equivalent_std() noexcept;
/// Exact standard deviation of the centred cubic B-spline, sqrt(1/3).
double bspline_exact_std() noexcept;

}  // namespace lor
