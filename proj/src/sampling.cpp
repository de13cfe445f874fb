#include "lor/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lor/error.hpp"

namespace lor {

namespace {

std::uint64_t splitmix(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

// xoshiro256**
Rng::Rng(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix(seed);
}

std::uint64_t Rng::next() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) noexcept {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = next();
  } while (v >= limit);
  return v % n;
}

double Rng::normal() noexcept {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> sample_indices(const Extent& e, const SamplePolicy& policy) {
  if (policy.mode == SampleMode::Stride && policy.stride == 0) {
    throw Error(ErrorKind::InvalidArgument, "sample stride must be >= 1");
  }
  const std::size_t step = policy.mode == SampleMode::Stride ? policy.stride : 1;
  std::array<std::size_t, 3> lo{0, 0, 0}, hi{1, 1, 1};
  for (int a = 0; a < e.ndim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (2 * policy.margin >= e.n[ua]) {
      throw Error(ErrorKind::InvalidArgument, "sample margin leaves no voxels");
    }
    lo[ua] = policy.margin;
    hi[ua] = e.n[ua] - policy.margin;
  }
  std::vector<std::size_t> out;
  for (std::size_t z = lo[2]; z < hi[2]; z += step) {
    for (std::size_t y = lo[1]; y < hi[1]; y += step) {
      for (std::size_t x = lo[0]; x < hi[0]; x += step) out.push_back(e.index(x, y, z));
    }
  }
  if (policy.mode != SampleMode::Random || policy.count >= out.size()) return out;

  // Partial Fisher-Yates: the first `count` entries become the sample.
  Rng rng(policy.seed);
  for (std::size_t i = 0; i < policy.count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(out.size() - i));
    std::swap(out[i], out[j]);
  }
  out.resize(policy.count);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace lor
