#pragma once

#include <array>
#include <span>
#include <vector>

#include "lor/image.hpp"

namespace lor {

namespace bspline {

/// Centered cubic B-spline and its derivative.
double b3(double t) noexcept;
double b3_derivative(double t) noexcept;

/// Weights of the four nodes floor(x)-1 .. floor(x)+2 for fractional part u in [0,1).
std::array<double, 4> weights(double u) noexcept;
std::array<double, 4> derivative_weights(double u) noexcept;

}  // namespace bspline

enum class BoundaryPolicy {
  Mirror,  // whole-sample symmetric extension; any position is valid
  Strict,  // positions outside [0, n-1] raise OutOfDomain
};

/// Cubic B-spline coefficients of an image plus the image itself (node values
/// are needed by the hard-binned estimators).
class InterpolantCoefficients {
 public:
  InterpolantCoefficients() = default;
  InterpolantCoefficients(ImageGrid source, std::vector<double> coeffs, BoundaryPolicy boundary)
      : source_(std::move(source)), coeffs_(std::move(coeffs)), boundary_(boundary) {}

  const ImageGrid& source() const noexcept { return source_; }
  const Extent& extent() const noexcept { return source_.extent(); }
  int ndim() const noexcept { return source_.ndim(); }
  const IntensityRange& intensity_range() const noexcept { return source_.intensity_range(); }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  BoundaryPolicy boundary() const noexcept { return boundary_; }

 private:
  ImageGrid source_;
  std::vector<double> coeffs_;
  BoundaryPolicy boundary_ = BoundaryPolicy::Mirror;
};

/// Interpolating cubic B-spline prefilter (recursive, exact mirror initialisation).
InterpolantCoefficients prefilter(const ImageGrid& image,
                                  BoundaryPolicy boundary = BoundaryPolicy::Mirror);

struct SampleValue {
  double value = 0.0;
  Vec3 gradient{0.0, 0.0, 0.0};  // d value / d voxel coordinate
};

/// Spline value (and gradient) at a continuous voxel position.
SampleValue sample(const InterpolantCoefficients& c, const Vec3& p, bool want_gradient = true);

/// True when p lies in [0, n-1] on every active axis.
bool inside_domain(const Extent& e, const Vec3& p) noexcept;

}  // namespace lor
