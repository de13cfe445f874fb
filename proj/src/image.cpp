#include "lor/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lor/error.hpp"

namespace lor {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::DimensionTooSmall: return "dimension too small";
    case ErrorKind::OutOfDomain: return "out of domain";
    case ErrorKind::ZeroDirection: return "zero direction";
    case ErrorKind::UnsupportedKernel: return "unsupported kernel";
    case ErrorKind::EmptyHistogram: return "empty histogram";
    case ErrorKind::UnnormalizedInput: return "unnormalized input";
    case ErrorKind::DegenerateHistogram: return "degenerate histogram";
    case ErrorKind::MalformedCsv: return "malformed csv";
    case ErrorKind::Io: return "i/o";
  }
  return "error";
}

namespace {

void check_extent(const Extent& e) {
  if (e.ndim != 2 && e.ndim != 3) {
    throw Error(ErrorKind::InvalidArgument, "only 2D and 3D grids are supported");
  }
  for (int a = 0; a < e.ndim; ++a) {
    if (e.n[static_cast<std::size_t>(a)] < 4) {
      throw Error(ErrorKind::DimensionTooSmall,
                  "axis " + std::to_string(a) + " has " +
                      std::to_string(e.n[static_cast<std::size_t>(a)]) + " voxels, need >= 4");
    }
  }
  if (e.ndim == 2 && e.n[2] != 1) {
    throw Error(ErrorKind::InvalidArgument, "2D extent must have n[2] == 1");
  }
}

IntensityRange observed(std::span<const double> v) {
  if (v.empty()) return {};
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

}  // namespace

ImageGrid::ImageGrid(Extent extent, std::vector<double> values, Vec3 spacing,
                     std::optional<IntensityRange> range)
    : extent_(extent), spacing_(spacing), values_(std::move(values)) {
  check_extent(extent_);
  if (values_.size() != extent_.size()) {
    throw Error(ErrorKind::InvalidArgument, "value count does not match extent");
  }
  for (int a = 0; a < 3; ++a) {
    if (!(spacing_[static_cast<std::size_t>(a)] > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "spacing must be positive");
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite voxel value");
  }
  const IntensityRange obs = observed(values_);
  if (range) {
    if (!(range->max >= range->min)) throw Error(ErrorKind::InvalidArgument, "inverted range");
    const double tol = 1e-9 * std::max(1.0, std::abs(range->span()));
    if (obs.min < range->min - tol || obs.max > range->max + tol) {
      throw Error(ErrorKind::InvalidArgument, "values outside the intensity range");
    }
    range_ = *range;
  } else {
    range_ = obs;
  }
  // A flat image still needs a usable unit mapping.
  if (range_.max == range_.min) range_.max = range_.min + 1.0;
}

ImageGrid::ImageGrid(Extent extent, Vec3 spacing)
    : ImageGrid(extent, std::vector<double>(extent.size(), 0.0), spacing, IntensityRange{0.0, 1.0}) {}

ImageGrid ImageGrid::with_observed_range() const {
  return ImageGrid(extent_, values_, spacing_, std::nullopt);
}

ImageGrid ImageGrid::normalized() const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(),
                 [this](double x) { return std::clamp(range_.to_unit(x), 0.0, 1.0); });
  return ImageGrid(extent_, std::move(v), spacing_, IntensityRange{0.0, 1.0});
}

ImageGrid ImageGrid::with_range(IntensityRange range) const {
  return ImageGrid(extent_, values_, spacing_, range);
}

double ImageGrid::sum() const noexcept { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double ImageGrid::mean() const noexcept {
  return values_.empty() ? 0.0 : sum() / static_cast<double>(values_.size());
}

double ImageGrid::variance() const noexcept {
  if (values_.empty()) return 0.0;
  const double m = mean();
  double acc = 0.0;
  for (double v : values_) acc += (v - m) * (v - m);
  return acc / static_cast<double>(values_.size());
}

}  // namespace lor
