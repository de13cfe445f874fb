#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lor/image.hpp"

namespace lor {

enum class SampleMode {
  All,     // every voxel
  Stride,  // every `stride`-th voxel along each axis
  Random,  // `count` distinct voxels drawn with `seed`
};

/// Which fixed-image voxels act as sample points. Voxels closer than `margin`
/// to any border are excluded in every mode.
struct SamplePolicy {
  SampleMode mode = SampleMode::All;
  std::size_t stride = 1;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::size_t margin = 0;
};

/// Sorted voxel indices selected by the policy.
std::vector<std::size_t> sample_indices(const Extent& e, const SamplePolicy& policy);

/// Deterministic 64-bit generator helpers (platform independent).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next() noexcept;
  /// Uniform in [0,1).
  double uniform() noexcept;
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal (Box-Muller).
  double normal() noexcept;

 private:
  std::uint64_t s_[4];
};

}  // namespace lor
