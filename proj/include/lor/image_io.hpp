#pragma once

#include <filesystem>

#include "lor/image.hpp"

namespace lor {

/// JSON header plus little-endian float32 voxels (x fastest). The header
/// stores dims, spacing, intensity_range, dtype and the data file name,
/// which is resolved relative to the header.
void write_image(const std::filesystem::path& header, const ImageGrid& image);
ImageGrid read_image(const std::filesystem::path& header);

/// Binary 8-bit PGM (P5) for 2D images. Writing maps the intensity range
/// onto 0..255; reading gives values 0..maxval with range [0, maxval].
void write_pgm(const std::filesystem::path& path, const ImageGrid& image);
ImageGrid read_pgm(const std::filesystem::path& path);

}  // namespace lor
