#include <cmath>

#include "doctest.h"
#include "lor/error.hpp"
#include "lor/objective.hpp"
#include "lor/optimizer.hpp"
#include "lor/registration.hpp"
#include "lor/sampling.hpp"
#include "lor/synthetic.hpp"

using namespace lor;

namespace {

Transform randomized(Transform t, std::uint64_t seed, double scale) {
  Rng r(seed);
  std::vector<double> p(t.size());
  for (double& v : p) v = scale * (2 * r.uniform() - 1);
  t.set_params(p);
  return t;
}

}  // namespace

TEST_SUITE("registration") {

TEST_CASE("transform jacobians match finite differences") {
  const Extent e = Extent::make3(20, 18, 16);
  for (const Transform& base :
       {randomized(Transform::translation(3), 1, 1.0), randomized(Transform::rigid(e), 2, 0.3),
        randomized(Transform::ffd(e, {2, 2, 2}), 3, 1.0)}) {
    CAPTURE(to_string(base.kind()));
    const Vec3 x{5.3, 7.1, 9.6};
    const Vec3 v{0.7, -1.1, 0.4};
    std::vector<double> g(base.size(), 0.0);
    base.accumulate_gradient(x, v, g);
    for (std::size_t k = 0; k < base.size(); ++k) {
      Transform up = base, dn = base;
      up.set_param(k, base.params()[k] + 1e-6);
      dn.set_param(k, base.params()[k] - 1e-6);
      const Vec3 a = up.apply(x), b = dn.apply(x);
      double fd = 0;
      for (int d = 0; d < 3; ++d) fd += v[d] * (a[d] - b[d]) / 2e-6;
      CHECK(g[k] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("inverse undoes translation and rigid maps") {
  const Extent e = Extent::make2(30, 20);
  for (const Transform& t : {randomized(Transform::translation(2), 4, 3.0),
                             randomized(Transform::rigid(e), 5, 0.5)}) {
    const Transform inv = t.inverse();
    const Vec3 x{3.5, 11.25, 0};
    const Vec3 y = inv.apply(t.apply(x));
    CHECK(y[0] == doctest::Approx(x[0]));
    CHECK(y[1] == doctest::Approx(x[1]));
  }
  CHECK_THROWS_AS(Transform::ffd(e, {1, 1, 1}).inverse(), Error);
  CHECK(Transform::ffd(Extent::make3(8, 8, 8), {1, 1, 1}).size() == 3 * 64);
}

TEST_CASE("lbfgs minimises the Rosenbrock function") {
  const ObjectiveFunction f = [](std::span<const double> x, std::vector<double>& g) {
    g.assign(2, 0.0);
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  std::vector<double> x{-1.2, 1.0};
  OptimizerOptions o;
  o.max_iterations = 200;
  o.grad_tolerance = 1e-10;
  const auto trace = minimize_lbfgs(f, x, o);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(trace.entries.front().value > trace.entries.back().value);
  for (std::size_t i = 1; i < trace.entries.size(); ++i) {
    CHECK(trace.entries[i].value <= trace.entries[i - 1].value);
  }
}

TEST_CASE("objective gradient matches finite differences in 2D") {
  const ImageGrid a = gen_smooth_random(Extent::make2(32, 32), 1, 3.0);
  const ImageGrid b = gen_smooth_random(Extent::make2(32, 32), 2, 3.0);
  for (Estimator est : {Estimator::PW, Estimator::GPV}) {
    for (MeasureKind k : {MeasureKind::NMI, MeasureKind::SSD, MeasureKind::CC}) {
      CAPTURE(to_string(est));
      CAPTURE(to_string(k));
      ObjectiveConfig c;
      c.measure.kind = k;
      c.estimator.estimator = est;
      c.estimator.bins = 16;
      c.estimator.scales = {1.0, 0.06, est == Estimator::GPV ? 0.7 : std::numeric_limits<double>::infinity()};
      c.estimator.window = KernelFamily::CubicBSpline;
      c.estimator.sampling.margin = 3;
      const Objective obj(c, a, b);
      const Transform t = randomized(Transform::rigid(a.extent()), 8, 0.4);
      std::vector<double> g;
      obj.value_and_gradient(t, g);
      for (std::size_t p = 0; p < t.size(); ++p) {
        Transform up = t, dn = t;
        const double h = 1e-5;
        up.set_param(p, t.params()[p] + h);
        dn.set_param(p, t.params()[p] - h);
        const double fd = (obj.value(up) - obj.value(dn)) / (2 * h);
        CHECK(g[p] == doctest::Approx(fd).epsilon(1e-4).scale(1e-7));
      }
    }
  }
}

TEST_CASE("spatial ssd only evaluates ssd") {
  ObjectiveConfig c;
  c.spatial_ssd = true;
  c.measure.kind = MeasureKind::NMI;
  CHECK_THROWS_AS(c.validate(), Error);
  c.measure.kind = MeasureKind::SSD;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("small translation is recovered") {
  const ImageGrid field = gen_smooth_random(Extent::make2(48, 48), 3, 4.0);
  const auto fc = prefilter(field);
  const ImageGrid fixed = resample_window(fc, Extent::make2(32, 32), {8, 8, 0});
  const ImageGrid moving = resample_window(fc, Extent::make2(32, 32), {8 - 1.3, 8 + 0.6, 0});
  ObjectiveConfig c;
  c.estimator.bins = 32;
  c.estimator.scales.sigma = 1.0;
  c.estimator.scales.beta = 1.0 / 32;
  const auto r = register_images(c, moving, fixed, Transform::translation(2));
  CHECK(r.transform.params()[0] == doctest::Approx(1.3).epsilon(0.05));
  CHECK(r.transform.params()[1] == doctest::Approx(-0.6).epsilon(0.05));
  const auto j = to_json(r, c);
  CHECK(j["transform"]["kind"] == "translation");
  CHECK(j["trace"]["iterations"].get<std::size_t>() + 1 == r.trace.entries.size());
}

TEST_CASE("configuration json round trips") {
  ObjectiveConfig c;
  c.measure.kind = MeasureKind::Huber;
  c.measure.k_loss = 0.2;
  c.estimator.estimator = Estimator::GPV;
  c.estimator.scales = {1.5, 0.03, 2.0};
  c.estimator.window = KernelFamily::CubicBSpline;
  c.estimator.sampling.mode = SampleMode::Random;
  c.estimator.sampling.count = 500;
  c.estimator.sampling.seed = 7;
  const ObjectiveConfig back = objective_config_from_json(to_json(c));
  CHECK(back.measure.kind == MeasureKind::Huber);
  CHECK(back.measure.k_loss == 0.2);
  CHECK(back.estimator.estimator == Estimator::GPV);
  CHECK(back.estimator.scales.alpha == 2.0);
  CHECK(back.estimator.window == KernelFamily::CubicBSpline);
  CHECK(back.estimator.sampling.mode == SampleMode::Random);
  CHECK(back.estimator.sampling.count == 500);

  ObjectiveConfig pw;
  CHECK(std::isinf(objective_config_from_json(to_json(pw)).estimator.scales.alpha));
  CHECK_THROWS_AS(objective_config_from_json({{"alpha", "wide"}}), Error);
  CHECK_THROWS_AS(objective_config_from_json({{"measure", "ncc"}}), Error);

  OptimizerOptions o;
  o.max_iterations = 17;
  o.c2 = 0.5;
  const OptimizerOptions ob = optimizer_options_from_json(to_json(o));
  CHECK(ob.max_iterations == 17);
  CHECK(ob.c2 == 0.5);
}

}  // TEST_SUITE
