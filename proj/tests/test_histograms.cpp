#include <cmath>
#include <sstream>

#include "doctest.h"
#include "lor/error.hpp"
#include "lor/histograms.hpp"
#include "lor/measures.hpp"
#include "lor/parallel.hpp"
#include "lor/sampling.hpp"
#include "lor/synthetic.hpp"
#include "oracles.hpp"

using namespace lor;

namespace {

// Image whose unit values sit on bin centres of an m-bin histogram.
ImageGrid quantized(const Extent& e, std::uint64_t seed, std::size_t m) {
  const ImageGrid s = gen_smooth_random(e, seed, 1.5);
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = bin_center(static_cast<std::size_t>(std::max<long>(0, oracle::bin_of(s[i], m))), m);
  }
  return ImageGrid(e, std::move(v), {1, 1, 1}, IntensityRange{0, 1});
}

Transform shift(double x, double y) {
  Transform t = Transform::translation(2);
  t.set_param(0, x);
  t.set_param(1, y);
  return t;
}

double total(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_SUITE("histograms") {

TEST_CASE("bin index") {
  CHECK(bin_index(0.0, 4) == 0);
  CHECK(bin_index(0.25, 4) == 1);
  CHECK(bin_index(0.2499, 4) == 0);
  CHECK(bin_index(1.0, 4) == 3);
  CHECK(bin_index(-1e-12, 4) == -1);
  CHECK(bin_index(1.0 + 1e-12, 4) == -1);
  CHECK(bin_center(0, 4) == 0.125);
}

TEST_CASE("merging adjacent counting bins halves the resolution") {
  const ImageGrid img = gen_random_image(Extent::make2(16, 16), 3);
  const auto h8 = counting_histogram(img, 8);
  const auto h4 = counting_histogram(img, 4);
  CHECK(merge_adjacent_bins(h8).bins == h4.bins);
  CHECK(total(h8.bins) == 256.0);
  CHECK_THROWS_AS(merge_adjacent_bins(counting_histogram(img, 5)), Error);
}

TEST_CASE("pw histogram mass") {
  const ImageGrid img = gen_smooth_random(Extent::make2(16, 16), 2, 2.0);
  const KernelSpec p{KernelFamily::Gaussian, 0.02, 6.0};
  const auto h = normalize(pw_histogram(img, p, 128));
  CHECK(total(h.bins) * h.delta() == doctest::Approx(1.0));
  CHECK(h.k == doctest::Approx(parzen_mass(p)));
  CHECK_THROWS_AS(moments(pw_histogram(img, p, 128)), Error);
}

TEST_CASE("boxcar pw joint equals brute-force counts") {
  const std::size_t m = 12;
  const ImageGrid a = gen_smooth_random(Extent::make2(14, 13), 1, 2.0);
  const ImageGrid b = gen_smooth_random(Extent::make2(14, 13), 2, 2.0);
  const auto ca = prefilter(a), cb = prefilter(b);
  EstimatorConfig c;
  c.bins = m;
  c.parzen = KernelFamily::Boxcar;
  c.scales.beta = 1.0 / m;
  for (const Transform& t : {shift(0, 0), shift(0.37, -0.81), shift(-2.2, 1.4)}) {
    const JointEngine engine(ca, cb, c);
    const RawJoint raw = engine.accumulate_pw(engine.pairs(t, false));
    CHECK(raw.h == oracle::pw_counts(ca, b, t, m));
    const auto h = pw_joint(ca, cb, t, c);
    const double d2 = h.delta() * h.delta();
    for (std::size_t k = 0; k < m * m; ++k) {
      CHECK(h.joint[k] * d2 * raw.total == doctest::Approx(raw.h[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("gpv joint equals the direct triple loop") {
  const std::size_t m = 10;
  const ImageGrid a = gen_smooth_random(Extent::make2(16, 15), 4, 2.0);
  const ImageGrid b = gen_smooth_random(Extent::make2(16, 15), 5, 2.0);
  const auto ca = prefilter(a), cb = prefilter(b);
  for (auto fam : {KernelFamily::Gaussian, KernelFamily::CubicBSpline}) {
    EstimatorConfig c;
    c.estimator = Estimator::GPV;
    c.bins = m;
    c.window = fam;
    c.scales.alpha = 0.8;
    c.sampling.margin = 1;
    const Transform t = shift(0.31, -0.57);
    const JointEngine engine(ca, cb, c);
    const RawJoint raw = engine.accumulate_gpv(t, false);
    const auto ref = oracle::gpv_weights(a, b, t, c.window_spec(), m, 1);
    for (std::size_t k = 0; k < m * m; ++k) CHECK(raw.h[k] == doctest::Approx(ref[k]).epsilon(1e-9).scale(1e-9));
  }
}

TEST_CASE("histogram SSD equals the voxel loop on quantised images") {
  const std::size_t m = 16;
  const ImageGrid a = quantized(Extent::make2(16, 16), 7, m);
  const ImageGrid b = quantized(Extent::make2(16, 16), 8, m);
  EstimatorConfig c;
  c.bins = m;
  c.parzen = KernelFamily::Boxcar;
  c.scales.beta = 1.0 / m;
  const auto ca = prefilter(a), cb = prefilter(b);
  const Transform t = shift(1, -2);
  const MeasureValue v = evaluate({MeasureKind::SSD}, pw_joint(ca, cb, t, c));
  CHECK(v.value == doctest::Approx(oracle::voxel_ssd(ca, b, t)).epsilon(1e-10));
}

TEST_CASE("bin-width spline parzen agrees with the general path") {
  const ImageGrid a = gen_smooth_random(Extent::make2(24, 24), 1, 3.0);
  const ImageGrid b = gen_smooth_random(Extent::make2(24, 24), 2, 3.0);
  const auto ca = prefilter(a), cb = prefilter(b);
  EstimatorConfig fast;
  fast.bins = 32;
  fast.parzen = KernelFamily::CubicBSpline;
  fast.scales.beta = 1.0 / 32;
  EstimatorConfig general = fast;
  general.scales.beta = (1.0 + 1e-11) / 32;
  const Transform t = shift(0.4, 0.3);
  const auto hf = pw_joint(ca, cb, t, fast), hg = pw_joint(ca, cb, t, general);
  for (std::size_t k = 0; k < hf.joint.size(); ++k) {
    CHECK(hf.joint[k] == doctest::Approx(hg.joint[k]).epsilon(1e-8).scale(1e-8));
  }
}

TEST_CASE("normalised joints and marginals") {
  const ImageGrid a = gen_smooth_random(Extent::make2(20, 20), 1, 2.0);
  const ImageGrid b = gen_smooth_random(Extent::make2(20, 20), 2, 2.0);
  const auto ca = prefilter(a), cb = prefilter(b);
  EstimatorConfig c;
  c.bins = 16;
  c.scales.beta = 0.05;
  for (Estimator e : {Estimator::PW, Estimator::GPV}) {
    c.estimator = e;
    c.scales.alpha = e == Estimator::GPV ? 1.0 : std::numeric_limits<double>::infinity();
    const auto h = estimate_joint(ca, cb, shift(0.5, 0.2), c);
    CHECK(h.normalized);
    CHECK(total(h.joint) * h.delta() * h.delta() == doctest::Approx(1.0));
    CHECK(total(h.marginal_i) * h.delta() == doctest::Approx(1.0));
    CHECK(total(h.marginal_j) * h.delta() == doctest::Approx(1.0));
    const auto tt = transpose(transpose(h));
    CHECK(tt.joint == h.joint);
    CHECK(transpose(h).at(3, 5) == h.at(5, 3));
    if (e == Estimator::GPV) {
      CHECK(h.direct_i.size() == 16);
      CHECK(h.direct_j.size() == 16);
    }
  }
}

TEST_CASE("jensen-shannon divergence") {
  const ImageGrid a = gen_smooth_random(Extent::make2(20, 20), 1, 2.0);
  const ImageGrid b = gen_smooth_random(Extent::make2(20, 20), 2, 2.0);
  const auto ca = prefilter(a), cb = prefilter(b);
  EstimatorConfig c;
  c.bins = 16;
  const auto p = pw_joint(ca, cb, shift(0, 0), c);
  const auto q = pw_joint(ca, cb, shift(1.5, 0), c);
  CHECK(jensen_shannon(p, p) == 0.0);
  const double d = jensen_shannon(p, q);
  CHECK(d > 0.0);
  CHECK(d < std::log(2.0));
  CHECK(d == doctest::Approx(jensen_shannon(q, p)).epsilon(1e-14));
}

TEST_CASE("pw swapped joint equals the forward joint at the identity") {
  const ImageGrid a = gen_smooth_random(Extent::make2(20, 20), 1, 2.0);
  const ImageGrid b = gen_smooth_random(Extent::make2(20, 20), 2, 2.0);
  const auto ca = prefilter(a), cb = prefilter(b);
  EstimatorConfig c;
  c.bins = 16;
  const auto f = pw_joint(ca, cb, shift(0, 0), c);
  const auto s = swapped_joint(ca, cb, shift(0, 0), c);
  for (std::size_t k = 0; k < f.joint.size(); ++k) CHECK(s.joint[k] == doctest::Approx(f.joint[k]).epsilon(1e-12));
}

TEST_CASE("local histogram mean is the windowed image mean") {
  const ImageGrid img = gen_smooth_random(Extent::make2(32, 32), 6, 3.0);
  std::vector<double> v(img.values().begin(), img.values().end());
  for (double& x : v) x = 0.35 + 0.3 * x;  // keep the Parzen tails inside [0,1]
  const ImageGrid mid(img.extent(), v, {1, 1, 1}, IntensityRange{0, 1});
  const auto c = prefilter(mid);
  const ScaleTriple s{0.0, 0.03, 2.0};
  const Vec3 x{15.3, 16.7, 0};
  const auto h = normalize(local_histogram(c, x, s, KernelFamily::Gaussian, KernelFamily::Gaussian, 256));
  const KernelSpec w{KernelFamily::Gaussian, 2.0, 4.0};
  double num = 0, den = 0, sq = 0;
  for (std::size_t i = 0; i < mid.size(); ++i) {
    const auto p = mid.extent().coords(i);
    const double wt = eval(w, x[0] - double(p[0])) * eval(w, x[1] - double(p[1]));
    num += wt * mid[i];
    sq += wt * mid[i] * mid[i];
    den += wt;
  }
  const MomentSet mom = moments(h, 2);
  CHECK(mom.raw[1] == doctest::Approx(num / den).epsilon(1e-9));
  CHECK(mom.raw[2] == doctest::Approx(sq / den + 0.03 * 0.03).epsilon(1e-6));
  CHECK(mom.parzen_central[2] == doctest::Approx(0.03 * 0.03).epsilon(1e-6));
  CHECK_THROWS_AS(local_histogram(c, x, {0, 0.03, std::numeric_limits<double>::infinity()},
                                  KernelFamily::Gaussian, KernelFamily::Gaussian, 16),
                  Error);
}

TEST_CASE("soft isophote") {
  const ImageGrid img = gen_linear_gradient(Extent::make2(11, 4), {1, 0, 0}, 1.0);
  const ImageGrid iso = soft_isophote(prefilter(img), 0.5, 0.1);
  CHECK(iso.at(5, 2) == doctest::Approx(1.0));
  CHECK(iso.at(6, 2) == doctest::Approx(std::exp(-0.5)));
  CHECK_THROWS_AS(soft_isophote(prefilter(img), 1.5, 0.1), Error);
}

TEST_CASE("intensity convolution keeps unit mass") {
  const ImageGrid a = gen_smooth_random(Extent::make2(20, 20), 1, 2.0);
  const auto ca = prefilter(a);
  EstimatorConfig c;
  c.bins = 32;
  c.scales.beta = 0.02;
  const auto h = convolve_intensity(pw_joint(ca, ca, shift(0, 0), c), 0.03);
  CHECK(total(h.joint) * h.delta() * h.delta() == doctest::Approx(1.0));
  CHECK_THROWS_AS(convolve_intensity(h, 0.0), Error);
}

TEST_CASE("estimator configuration is validated") {
  EstimatorConfig c;
  c.estimator = Estimator::GPV;
  CHECK_THROWS_AS(c.validate(), Error);  // alpha is infinite by default
  c.scales.alpha = 5.0;
  CHECK_THROWS_AS(c.validate(), Error);  // 4 alpha > 15 voxels
  c.scales.alpha = 2.0;
  CHECK_NOTHROW(c.validate());
  c.bins = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(estimator_from_string(to_string(Estimator::GPV)) == Estimator::GPV);
}

TEST_CASE("joints are bitwise reproducible across thread counts") {
  const ImageGrid a = gen_smooth_random(Extent::make3(16, 16, 16), 1, 2.0);
  const ImageGrid b = gen_smooth_random(Extent::make3(16, 16, 16), 2, 2.0);
  const auto ca = prefilter(a), cb = prefilter(b);
  EstimatorConfig c;
  c.bins = 16;
  c.scales.alpha = 1.0;
  Transform t = Transform::translation(3);
  t.set_param(0, 0.3);
  const int saved = thread_count();
  for (Estimator e : {Estimator::PW, Estimator::GPV}) {
    c.estimator = e;
    set_thread_count(1);
    const auto one = estimate_joint(ca, cb, t, c);
    set_thread_count(3);
    const auto three = estimate_joint(ca, cb, t, c);
    CHECK(one.joint == three.joint);
  }
  set_thread_count(saved);
}

TEST_CASE("joint csv dump") {
  const ImageGrid a = gen_smooth_random(Extent::make2(8, 8), 1, 1.0);
  const auto ca = prefilter(a);
  EstimatorConfig c;
  c.bins = 4;
  std::ostringstream out;
  write_csv(out, pw_joint(ca, ca, shift(0, 0), c));
  const std::string s = out.str();
  CHECK(s.find("# M=4") != std::string::npos);
  std::size_t rows = 0;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') ++rows;
  }
  CHECK(rows == 4);
}

}  // TEST_SUITE
