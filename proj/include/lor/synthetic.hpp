#pragma once

#include <cstdint>

#include "lor/bspline.hpp"
#include "lor/image.hpp"

namespace lor {

/// exp(-|x - center|^2 / (2 std^2)) with x in world units (index * spacing).
/// Intensity range is [0,1].
ImageGrid gen_gaussian_blob(const Extent& dims, const Vec3& center, double std,
                            const Vec3& spacing = {1.0, 1.0, 1.0});

/// magnitude * (direction . x). The direction is normalised; a zero vector
/// raises ZeroDirection. With `rescale` the values are mapped onto [0,1],
/// otherwise they are kept and the range is the observed [min,max].
ImageGrid gen_linear_gradient(const Extent& dims, const Vec3& direction, double magnitude,
                              bool rescale = true, const Vec3& spacing = {1.0, 1.0, 1.0});

/// Independent uniform [0,1) voxels, range [0,1].
ImageGrid gen_random_image(const Extent& dims, std::uint64_t seed);

/// Uniform noise smoothed by a Gaussian of `smoothing` voxels, rescaled to [0,1].
ImageGrid gen_smooth_random(const Extent& dims, std::uint64_t seed, double smoothing);

/// out(x) = field(x + origin), evaluated with the cubic spline of `field`.
/// The output keeps the field's intensity range.
ImageGrid resample_window(const InterpolantCoefficients& field, const Extent& out,
                          const Vec3& origin);

}  // namespace lor
