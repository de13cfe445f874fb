#include <cstdlib>
#include <cstring>

#include "lor/simd/kernels.hpp"

namespace lor::simd {

const KernelTable& active_kernels() noexcept {
  static const KernelTable* table = [] {
    const char* forced = std::getenv("LOR_SIMD");
    if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return &scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return t;
    return &scalar_kernels();
  }();
  return *table;
}

}  // namespace lor::simd
