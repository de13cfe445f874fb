#include "lor/objective.hpp"

#include "lor/error.hpp"
#include "lor/parallel.hpp"

namespace lor {

void ObjectiveConfig::validate() const {
  measure.validate();
  estimator.validate();
  if (spatial_ssd && measure.kind != MeasureKind::SSD) {
    throw Error(ErrorKind::InvalidArgument, "the spatial path only evaluates SSD");
  }
}

namespace {

InterpolantCoefficients prepare(const ImageGrid& image, double sigma) {
  if (sigma > 0.0) return prefilter(convolve(image, KernelSpec{KernelFamily::Gaussian, sigma}));
  return prefilter(image);
}

}  // namespace

Objective::Objective(ObjectiveConfig config, const ImageGrid& moving, const ImageGrid& fixed)
    : config_((config.validate(), config)),
      moving_(prepare(moving, config.estimator.scales.sigma)),
      fixed_(prepare(fixed, config.estimator.scales.sigma)),
      engine_(moving_, fixed_, config.estimator) {}

double Objective::evaluate(const Transform& t, std::vector<double>* grad,
                           MeasureValue* report) const {
  const bool want_grad = grad != nullptr;
  const MeasureSpec& spec = config_.measure;

  if (config_.spatial_ssd) {
    const auto pairs = engine_.pairs(t, want_grad);
    struct Partial {
      double sum = 0.0;
      std::size_t n = 0;
      std::vector<double> g;
    };
    Partial init{0.0, 0, std::vector<double>(want_grad ? t.size() : 0, 0.0)};
    const Partial acc = parallel_reduce(
        pairs.size(), init,
        [&](std::size_t begin, std::size_t end, Partial& part) {
          for (std::size_t s = begin; s < end; ++s) {
            const PairSample& p = pairs[s];
            if (!p.valid) continue;
            const double d = p.u - p.r;
            part.sum += d * d;
            ++part.n;
            if (want_grad) {
              const double c = 2.0 * d;
              t.accumulate_gradient(engine_.position(p.index), {c * p.du[0], c * p.du[1], c * p.du[2]},
                                    part.g);
            }
          }
        },
        [](Partial& into, const Partial& from) {
          into.sum += from.sum;
          into.n += from.n;
          for (std::size_t k = 0; k < into.g.size(); ++k) into.g[k] += from.g[k];
        });
    if (acc.n == 0) throw Error(ErrorKind::EmptyHistogram, "no sample overlaps the moving image");
    const double v = acc.sum / static_cast<double>(acc.n);
    if (want_grad) {
      grad->assign(acc.g.begin(), acc.g.end());
      for (double& x : *grad) x /= static_cast<double>(acc.n);
    }
    if (report != nullptr) report->value = report->minimized = v;
    return v;
  }

  const double sign = spec.is_similarity() ? -1.0 : 1.0;
  auto finish = [&](const RawJoint& raw) {
    const JointHistogram h = engine_.to_histogram(raw);
    const MeasureValue mv = lor::evaluate(spec, h);
    if (report != nullptr) *report = mv;
    return std::pair{mv.minimized, h};
  };

  if (config_.estimator.estimator == Estimator::PW) {
    const auto pairs = engine_.pairs(t, want_grad);
    const RawJoint raw = engine_.accumulate_pw(pairs);
    if (raw.total <= 0.0) throw Error(ErrorKind::EmptyHistogram, "joint histogram has zero mass");
    auto [v, h] = finish(raw);
    if (want_grad) {
      HistogramGradient g = gradient_wrt_histogram(spec, h);
      for (double& x : g.d_joint) x *= sign;
      *grad = engine_.chain_pw(t, pairs, g.d_joint, raw.total);
    }
    return v;
  }

  const RawJoint raw = engine_.accumulate_gpv(t, false);
  if (raw.total <= 0.0) throw Error(ErrorKind::EmptyHistogram, "joint histogram has zero mass");
  auto [v, h] = finish(raw);
  if (want_grad) {
    HistogramGradient g = gradient_wrt_histogram(spec, h);
    for (double& x : g.d_joint) x *= sign;
    *grad = engine_.chain_gpv(t, g.d_joint, raw.total);
  }
  return v;
}

double Objective::value(const Transform& t) const { return evaluate(t, nullptr, nullptr); }

double Objective::value_and_gradient(const Transform& t, std::vector<double>& grad) const {
  return evaluate(t, &grad, nullptr);
}

MeasureValue Objective::measure(const Transform& t) const {
  MeasureValue mv;
  evaluate(t, nullptr, &mv);
  return mv;
}

JointHistogram Objective::joint(const Transform& t) const {
  if (config_.estimator.estimator == Estimator::PW) {
    const auto pairs = engine_.pairs(t, false);
    return normalize(engine_.to_histogram(engine_.accumulate_pw(pairs)));
  }
  return normalize(engine_.to_histogram(engine_.accumulate_gpv(t, true)));
}

}  // namespace lor
