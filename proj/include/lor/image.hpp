#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace lor {

using Vec3 = std::array<double, 3>;

/// Voxel counts of a 2D or 3D grid. For 2D grids the third count is 1.
struct Extent {
  int ndim = 2;
  std::array<std::size_t, 3> n{1, 1, 1};

  static Extent make2(std::size_t nx, std::size_t ny) { return {2, {nx, ny, 1}}; }
  static Extent make3(std::size_t nx, std::size_t ny, std::size_t nz) { return {3, {nx, ny, nz}}; }

  std::size_t size() const noexcept { return n[0] * n[1] * n[2]; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z = 0) const noexcept {
    return x + n[0] * (y + n[1] * z);
  }
  std::array<std::size_t, 3> coords(std::size_t idx) const noexcept {
    return {idx % n[0], (idx / n[0]) % n[1], idx / (n[0] * n[1])};
  }
  std::size_t stride(int axis) const noexcept {
    return axis == 0 ? 1 : axis == 1 ? n[0] : n[0] * n[1];
  }
  bool operator==(const Extent&) const = default;
};

/// Intensity span of an image. Histogramming maps values affinely onto [0,1].
struct IntensityRange {
  double min = 0.0;
  double max = 1.0;

  double span() const noexcept { return max - min; }
  double to_unit(double v) const noexcept { return (v - min) / (max - min); }
  double from_unit(double u) const noexcept { return min + u * (max - min); }
  bool operator==(const IntensityRange&) const = default;
};

/// Scalar image on a regular 2D/3D grid. Immutable after construction apart
/// from explicit element access used while building derived images.
class ImageGrid {
 public:
  ImageGrid() = default;

  /// Throws DimensionTooSmall if any axis has fewer than 4 voxels and
  /// InvalidArgument on non-finite values or values outside `range`.
  /// Without an explicit range the observed [min,max] is used.
  ImageGrid(Extent extent, std::vector<double> values, Vec3 spacing = {1.0, 1.0, 1.0},
            std::optional<IntensityRange> range = std::nullopt);

  /// Zero-filled image.
  explicit ImageGrid(Extent extent, Vec3 spacing = {1.0, 1.0, 1.0});

  const Extent& extent() const noexcept { return extent_; }
  int ndim() const noexcept { return extent_.ndim; }
  std::size_t dim(int axis) const noexcept { return extent_.n[static_cast<std::size_t>(axis)]; }
  std::size_t size() const noexcept { return values_.size(); }
  const Vec3& spacing() const noexcept { return spacing_; }
  const IntensityRange& intensity_range() const noexcept { return range_; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> mutable_values() noexcept { return values_; }

  double operator[](std::size_t idx) const noexcept { return values_[idx]; }
  double at(std::size_t x, std::size_t y, std::size_t z = 0) const noexcept {
    return values_[extent_.index(x, y, z)];
  }
  double& at(std::size_t x, std::size_t y, std::size_t z = 0) noexcept {
    return values_[extent_.index(x, y, z)];
  }

  /// Value mapped into [0,1] through the intensity range.
  double unit_value(std::size_t idx) const noexcept { return range_.to_unit(values_[idx]); }

  /// Copy with range reset to the observed [min,max] of the values.
  ImageGrid with_observed_range() const;
  /// Copy with values affinely mapped to [0,1] and range [0,1].
  ImageGrid normalized() const;
  /// Copy with an explicit range (validated).
  ImageGrid with_range(IntensityRange range) const;

  double sum() const noexcept;
  double mean() const noexcept;
  double variance() const noexcept;

 private:
  Extent extent_{};
  Vec3 spacing_{1.0, 1.0, 1.0};
  IntensityRange range_{};
  std::vector<double> values_;
};

/// Index reflection for whole-sample symmetric boundaries (period 2n-2).
inline std::ptrdiff_t mirror_index(std::ptrdiff_t i, std::ptrdiff_t n) noexcept {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace lor
