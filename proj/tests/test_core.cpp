#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "lor/error.hpp"
#include "lor/image.hpp"
#include "lor/image_io.hpp"
#include "lor/parallel.hpp"
#include "lor/sampling.hpp"
#include "lor/synthetic.hpp"

using namespace lor;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no lor::Error thrown");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("extent index and coords are inverse") {
  const Extent e = Extent::make3(5, 7, 4);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto c = e.coords(i);
    CHECK(e.index(c[0], c[1], c[2]) == i);
  }
  CHECK(e.stride(0) == 1);
  CHECK(e.stride(1) == 5);
  CHECK(e.stride(2) == 35);
}

TEST_CASE("image construction validates its input") {
  CHECK(kind_of([] { ImageGrid(Extent::make2(3, 8)); }) == ErrorKind::DimensionTooSmall);
  std::vector<double> v(16, 0.5);
  v[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK(kind_of([&] { ImageGrid(Extent::make2(4, 4), v); }) == ErrorKind::InvalidArgument);
  v[3] = 2.0;
  CHECK(kind_of([&] { ImageGrid(Extent::make2(4, 4), v, {1, 1, 1}, IntensityRange{0, 1}); }) ==
        ErrorKind::InvalidArgument);
  const ImageGrid ok(Extent::make2(4, 4), v);
  CHECK(ok.intensity_range().max == 2.0);
  CHECK(ok.intensity_range().min == 0.5);
}

TEST_CASE("normalized maps the declared range onto [0,1]") {
  std::vector<double> v(16);
  std::iota(v.begin(), v.end(), 10.0);
  const ImageGrid img(Extent::make2(4, 4), v);
  const ImageGrid n = img.normalized();
  CHECK(n[0] == 0.0);
  CHECK(n[15] == 1.0);
  CHECK(n[5] == doctest::Approx(5.0 / 15.0));

  // A wider declared range keeps the relative placement.
  const ImageGrid wide = img.with_range({0.0, 50.0}).normalized();
  CHECK(wide[0] == doctest::Approx(0.2));
  CHECK(wide.with_observed_range().normalized()[15] == 1.0);
}

TEST_CASE("mirror_index reflects with period 2n-2") {
  CHECK(mirror_index(-1, 5) == 1);
  CHECK(mirror_index(-4, 5) == 4);
  CHECK(mirror_index(5, 5) == 3);
  CHECK(mirror_index(8, 5) == 0);
  CHECK(mirror_index(9, 5) == 1);
  CHECK(mirror_index(3, 1) == 0);
}

TEST_CASE("rng is deterministic and in range") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    differs |= x != c.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(a.below(7) < 7);
    b.below(7);
    c.below(7);
  }
  CHECK(differs);
}

TEST_CASE("sample_indices honours mode and margin") {
  const Extent e = Extent::make2(10, 8);
  SamplePolicy all;
  CHECK(sample_indices(e, all).size() == 80);

  SamplePolicy m;
  m.margin = 2;
  const auto inner = sample_indices(e, m);
  CHECK(inner.size() == 6 * 4);
  for (auto i : inner) {
    const auto c = e.coords(i);
    CHECK(c[0] >= 2);
    CHECK(c[0] <= 7);
    CHECK(c[1] >= 2);
    CHECK(c[1] <= 5);
  }

  SamplePolicy s;
  s.mode = SampleMode::Stride;
  s.stride = 3;
  CHECK(sample_indices(e, s).size() == 4 * 3);

  SamplePolicy r;
  r.mode = SampleMode::Random;
  r.count = 30;
  r.seed = 9;
  const auto a = sample_indices(e, r);
  CHECK(a.size() == 30);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK(a == sample_indices(e, r));
}

TEST_CASE("parallel_reduce is bitwise identical across thread counts") {
  std::vector<double> x(100003);
  Rng rng(5);
  for (double& v : x) v = rng.normal() * 1e3;
  auto run = [&] {
    return parallel_reduce(
        x.size(), 0.0,
        [&](std::size_t b, std::size_t e, double& acc) {
          for (std::size_t i = b; i < e; ++i) acc += x[i] * x[i];
        },
        [](double& into, const double& from) { into += from; });
  };
  const int saved = thread_count();
  set_thread_count(1);
  const double one = run();
  set_thread_count(4);
  const double four = run();
  set_thread_count(saved);
  CHECK(one == four);
}

TEST_CASE("synthetic generators") {
  const Extent e = Extent::make2(21, 21);
  const ImageGrid blob = gen_gaussian_blob(e, {10, 10, 0}, 3.0);
  CHECK(blob.at(10, 10) == 1.0);
  CHECK(blob.at(13, 10) == doctest::Approx(std::exp(-0.5)));
  CHECK(kind_of([&] { gen_gaussian_blob(e, {0, 0, 0}, 0.0); }) == ErrorKind::InvalidArgument);

  CHECK(kind_of([&] { gen_linear_gradient(e, {0, 0, 0}, 1.0); }) == ErrorKind::ZeroDirection);
  const ImageGrid raw = gen_linear_gradient(e, {3, 4, 0}, 2.0, false);
  CHECK(raw.at(5, 0) == doctest::Approx(2.0 * 0.6 * 5));
  const ImageGrid g = gen_linear_gradient(e, {1, 1, 0}, 2.0);
  CHECK(g.at(0, 0) == 0.0);
  CHECK(g.at(20, 20) == 1.0);

  const ImageGrid s = gen_smooth_random(Extent::make2(32, 32), 3, 2.0);
  const auto [lo, hi] = std::minmax_element(s.values().begin(), s.values().end());
  CHECK(*lo == 0.0);
  CHECK(*hi == 1.0);
  CHECK(s.values()[100] == gen_smooth_random(Extent::make2(32, 32), 3, 2.0).values()[100]);
}

TEST_CASE("image files round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "lor_core_io";
  std::filesystem::create_directories(dir);
  const ImageGrid img = gen_smooth_random(Extent::make3(6, 5, 4), 1, 1.0);
  write_image(dir / "a.json", img);
  const ImageGrid back = read_image(dir / "a.json");
  CHECK(back.extent() == img.extent());
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(back[i] == doctest::Approx(img[i]).epsilon(1e-6));

  const ImageGrid flat = gen_smooth_random(Extent::make2(8, 6), 2, 1.0);
  write_pgm(dir / "a.pgm", flat);
  const ImageGrid pgm = read_pgm(dir / "a.pgm");
  CHECK(pgm.extent() == flat.extent());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    CHECK(std::abs(pgm.unit_value(i) - flat[i]) <= 0.5 / 255.0 + 1e-12);
  }
  CHECK(kind_of([&] { read_image(dir / "missing.json"); }) == ErrorKind::Io);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
