#include "lor/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lor/error.hpp"

namespace lor {

namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
  return v;
}

}  // namespace

void write_image(const std::filesystem::path& header, const ImageGrid& image) {
  std::filesystem::path data = header;
  data.replace_extension(".raw");
  const Extent& e = image.extent();
  nlohmann::json j;
  j["dims"] = std::vector<std::size_t>(e.n.begin(), e.n.begin() + e.ndim);
  j["spacing"] = std::vector<double>(image.spacing().begin(), image.spacing().begin() + e.ndim);
  j["intensity_range"] = {image.intensity_range().min, image.intensity_range().max};
  j["dtype"] = "float32";
  j["data"] = data.filename().string();
  if (header.has_parent_path()) std::filesystem::create_directories(header.parent_path());
  std::ofstream h(header);
  if (!h) throw Error(ErrorKind::Io, "cannot write " + header.string());
  h << j.dump(2) << "\n";

  std::ofstream d(data, std::ios::binary);
  if (!d) throw Error(ErrorKind::Io, "cannot write " + data.string());
  for (double v : image.values()) {
    const auto f = static_cast<float>(v);
    const std::uint32_t bits = to_le(std::bit_cast<std::uint32_t>(f));
    d.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

ImageGrid read_image(const std::filesystem::path& header) {
  std::ifstream h(header);
  if (!h) throw Error(ErrorKind::Io, "cannot read " + header.string());
  nlohmann::json j;
  try {
    h >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::Io, header.string() + ": " + ex.what());
  }
  if (j.value("dtype", "float32") != "float32") {
    throw Error(ErrorKind::Io, "only float32 voxel data is supported");
  }
  const auto dims = j.at("dims").get<std::vector<std::size_t>>();
  if (dims.size() != 2 && dims.size() != 3) throw Error(ErrorKind::Io, "dims must have 2 or 3 entries");
  Extent e = dims.size() == 2 ? Extent::make2(dims[0], dims[1])
                              : Extent::make3(dims[0], dims[1], dims[2]);
  Vec3 spacing{1.0, 1.0, 1.0};
  if (j.contains("spacing")) {
    const auto s = j["spacing"].get<std::vector<double>>();
    for (std::size_t a = 0; a < std::min<std::size_t>(s.size(), 3); ++a) spacing[a] = s[a];
  }
  const auto data = header.parent_path() / j.at("data").get<std::string>();
  std::ifstream d(data, std::ios::binary);
  if (!d) throw Error(ErrorKind::Io, "cannot read " + data.string());
  std::vector<double> values(e.size());
  for (double& v : values) {
    std::uint32_t bits = 0;
    if (!d.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
      throw Error(ErrorKind::Io, data.string() + " is shorter than dims imply");
    }
    v = static_cast<double>(std::bit_cast<float>(to_le(bits)));
  }
  std::optional<IntensityRange> range;
  if (j.contains("intensity_range")) {
    const auto r = j["intensity_range"].get<std::vector<double>>();
    if (r.size() == 2) range = IntensityRange{r[0], r[1]};
  }
  // float32 rounding can push values just past the stored range
  if (range) {
    for (double& v : values) v = std::clamp(v, range->min, range->max);
  }
  return ImageGrid(e, std::move(values), spacing, range);
}

void write_pgm(const std::filesystem::path& path, const ImageGrid& image) {
  if (image.ndim() != 2) throw Error(ErrorKind::InvalidArgument, "PGM export needs a 2D image");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
  f << "P5\n" << image.dim(0) << " " << image.dim(1) << "\n255\n";
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double u = std::clamp(image.unit_value(i), 0.0, 1.0);
    const auto b = static_cast<unsigned char>(std::lround(u * 255.0));
    f.put(static_cast<char>(b));
  }
}

ImageGrid read_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot read " + path.string());
  auto token = [&]() {
    std::string t;
    while (f >> t) {
      if (t[0] != '#') return t;
      std::string rest;
      std::getline(f, rest);
    }
    throw Error(ErrorKind::Io, "truncated PGM header");
  };
  if (token() != "P5") throw Error(ErrorKind::Io, "only binary P5 PGM is supported");
  const std::size_t w = std::stoul(token()), hgt = std::stoul(token());
  const unsigned long maxval = std::stoul(token());
  if (maxval == 0 || maxval > 65535) throw Error(ErrorKind::Io, "bad PGM maxval");
  f.get();
  std::vector<double> v(w * hgt);
  for (double& x : v) {
    int hi = f.get();
    if (hi == EOF) throw Error(ErrorKind::Io, "truncated PGM data");
    if (maxval > 255) {
      const int lo = f.get();
      if (lo == EOF) throw Error(ErrorKind::Io, "truncated PGM data");
      hi = (hi << 8) | lo;
    }
    x = static_cast<double>(hi);
  }
  return ImageGrid(Extent::make2(w, hgt), std::move(v), {1.0, 1.0, 1.0},
                   IntensityRange{0.0, static_cast<double>(maxval)});
}

}  // namespace lor
