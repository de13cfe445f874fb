#include <cmath>

#include "doctest.h"
#include "lor/error.hpp"
#include "lor/histograms.hpp"
#include "lor/measures.hpp"
#include "lor/synthetic.hpp"

using namespace lor;

namespace {

JointHistogram from_masses(std::size_t m, const std::vector<double>& q) {
  JointHistogram h;
  h.bins = m;
  h.joint = q;
  h.marginal_i.assign(m, 0.0);
  h.marginal_j.assign(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      h.marginal_i[a] += q[a * m + b];
      h.marginal_j[b] += q[a * m + b];
    }
  }
  return h;
}

JointHistogram smooth_joint(std::size_t m) {
  const ImageGrid a = gen_smooth_random(Extent::make2(24, 24), 1, 3.0);
  const ImageGrid b = gen_smooth_random(Extent::make2(24, 24), 2, 3.0);
  EstimatorConfig c;
  c.bins = m;
  c.scales.beta = 0.12;
  Transform t = Transform::translation(2);
  t.set_param(0, 0.4);
  return pw_joint(prefilter(a), prefilter(b), t, c);
}

Transform identity2() { return Transform::translation(2); }

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("entropy on bin masses") {
  const std::vector<double> uniform(8, 1.0);
  CHECK(entropy(uniform, 1.0 / 8) == doctest::Approx(std::log(8.0)));
  const std::vector<double> spike{0.0, 4.0, 0.0, 0.0};
  CHECK(entropy(spike, 0.25) == 0.0);
  CHECK_THROWS_AS(entropy(std::vector<double>{1.0, 1.0}, 1.0), Error);
}

TEST_CASE("identical images give NMI 2 and MI = H") {
  const ImageGrid a = gen_smooth_random(Extent::make2(20, 20), 3, 2.0);
  EstimatorConfig c;
  c.bins = 16;
  c.parzen = KernelFamily::Boxcar;
  c.scales.beta = 1.0 / 16;
  const auto ca = prefilter(a);
  const auto h = pw_joint(ca, ca, identity2(), c);
  const MeasureValue nmi = evaluate({MeasureKind::NMI}, h);
  CHECK(nmi.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(nmi.minimized == -nmi.value);
  const MeasureValue mi = evaluate({MeasureKind::MI}, h);
  REQUIRE(mi.entropies);
  CHECK(mi.value == doctest::Approx(mi.entropies->h_i));
  CHECK(evaluate({MeasureKind::SSD}, h).value == doctest::Approx(0.0));
  CHECK(evaluate({MeasureKind::CC}, h).value == doctest::Approx(1.0));
}

TEST_CASE("independent joint gives MI 0 and NMI 1") {
  const std::vector<double> pi{0.1, 0.4, 0.3, 0.2}, pj{0.25, 0.25, 0.4, 0.1};
  std::vector<double> q(16);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) q[a * 4 + b] = pi[a] * pj[b];
  }
  const auto h = from_masses(4, q);
  CHECK(evaluate({MeasureKind::MI}, h).value == doctest::Approx(0.0).scale(1.0));
  CHECK(evaluate({MeasureKind::NMI}, h).value == doctest::Approx(1.0));
  CHECK(evaluate({MeasureKind::CC}, h).value == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("inverted image has CC -1") {
  const ImageGrid a = gen_smooth_random(Extent::make2(20, 20), 3, 2.0);
  std::vector<double> v(a.values().begin(), a.values().end());
  for (double& x : v) x = 1.0 - x;
  const ImageGrid b(a.extent(), v, {1, 1, 1}, IntensityRange{0, 1});
  EstimatorConfig c;
  c.bins = 32;
  c.parzen = KernelFamily::Boxcar;
  c.scales.beta = 1.0 / 32;
  const auto h = pw_joint(prefilter(a), prefilter(b), identity2(), c);
  CHECK(evaluate({MeasureKind::CC}, h).value == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("pointwise losses") {
  MeasureSpec huber{MeasureKind::Huber, 2.0, 0.1};
  CHECK(loss(huber, 0.0, 0.05) == doctest::Approx(0.0025));
  CHECK(loss(huber, 0.0, 0.1 - 1e-12) == doctest::Approx(loss(huber, 0.0, 0.1 + 1e-12)));
  CHECK(loss(huber, 0.6, 0.3) == doctest::Approx(2 * 0.1 * 0.3 - 0.01));
  CHECK(loss(huber, 0.3, 0.6) == loss(huber, 0.6, 0.3));
  MeasureSpec hinge{MeasureKind::Hinge, 2.0, 0.1};
  CHECK(loss(hinge, 0.0, 0.05) == 0.0);
  CHECK(loss(hinge, 0.0, 0.3) == doctest::Approx(0.04));
  MeasureSpec trunc{MeasureKind::Trunc, 2.0, 0.1};
  CHECK(loss(trunc, 0.0, 0.9) == doctest::Approx(0.01));
  MeasureSpec lq{MeasureKind::Lq, 1.5};
  CHECK(loss(lq, 0.2, 0.6) == doctest::Approx(std::pow(0.4, 1.5)));
  CHECK_THROWS_AS(loss({MeasureKind::NMI}, 0, 0), Error);
  CHECK_THROWS_AS(MeasureSpec({MeasureKind::Huber, 2.0, 0.0}).validate(), Error);
}

TEST_CASE("histogram gradient matches finite differences") {
  const std::size_t m = 8;
  const JointHistogram h = smooth_joint(m);
  double s = 0;
  for (double v : h.joint) s += v;
  for (MeasureKind k : {MeasureKind::SSD, MeasureKind::Lq, MeasureKind::Huber, MeasureKind::MI,
                        MeasureKind::NMI, MeasureKind::CC, MeasureKind::CR}) {
    CAPTURE(to_string(k));
    const MeasureSpec spec{k, 1.5, 0.1};
    const HistogramGradient g = gradient_wrt_histogram(spec, h);
    double weighted = 0;
    for (std::size_t i = 0; i < m * m; ++i) weighted += g.d_joint[i] * h.joint[i];
    CHECK(weighted == doctest::Approx(0.0).scale(1.0));
    for (std::size_t i : {0u, 9u, 27u, 36u, 63u}) {
      const double eps = 1e-6 * s;
      JointHistogram up = h, dn = h;
      up.normalized = dn.normalized = false;
      up.joint[i] += eps;
      dn.joint[i] -= eps;
      const double fd = (evaluate(spec, up).value - evaluate(spec, dn).value) / (2 * eps) * s;
      CHECK(g.d_joint[i] == doctest::Approx(fd).epsilon(1e-5).scale(1e-6));
    }
  }
}

TEST_CASE("linear measure gradient is the centred loss") {
  const JointHistogram h = smooth_joint(8);
  const MeasureSpec spec{MeasureKind::SSD};
  const double v = evaluate(spec, h).value;
  const auto g = gradient_wrt_histogram(spec, h);
  for (std::size_t a = 0; a < 8; ++a) {
    for (std::size_t b = 0; b < 8; ++b) {
      CHECK(g.d_joint[a * 8 + b] ==
            doctest::Approx(loss(spec, bin_center(a, 8), bin_center(b, 8)) - v).scale(1.0));
    }
  }
}

TEST_CASE("correlation ratio forms agree") {
  const ImageGrid target = gen_smooth_random(Extent::make2(24, 24), 5, 2.0);
  std::vector<double> lab(target.size());
  for (std::size_t i = 0; i < lab.size(); ++i) lab[i] = std::floor(target[i] * 3.0 + 0.2 * (i % 2));
  const ImageGrid labels(target.extent(), lab);
  const auto f = correlation_ratio_forms(labels, target, 64);
  CHECK(f.within == doctest::Approx(f.between).epsilon(1e-10));
  CHECK(f.within > 0.5);
  CHECK(f.within <= 1.0);
  CHECK(evaluate_cr(labels, target, 64).value == doctest::Approx(f.within));

  // Labels equal to the binned target explain all of its variance.
  std::vector<double> exact(target.size());
  for (std::size_t i = 0; i < exact.size(); ++i) exact[i] = double(bin_index(target[i], 64));
  CHECK(evaluate_cr(ImageGrid(target.extent(), exact), target, 64).value == doctest::Approx(1.0));
}

TEST_CASE("degenerate inputs are rejected") {
  const std::vector<double> one{16.0, 0, 0, 0};
  const auto h = from_masses(2, one);
  CHECK_THROWS_AS(evaluate({MeasureKind::NMI}, h), Error);
  CHECK_THROWS_AS(evaluate({MeasureKind::CC}, h), Error);
  CHECK(measure_kind_from_string("pnorm") == MeasureKind::Lq);
  CHECK_THROWS_AS(measure_kind_from_string("ncc"), Error);
}

}  // TEST_SUITE
