#include <algorithm>
#include <cmath>

#include "lor/bspline.hpp"
#include "lor/error.hpp"
#include "lor/histograms.hpp"
#include "lor/parallel.hpp"
#include "lor/simd/kernels.hpp"

namespace lor {

namespace {

// Parzen weights of one intensity over the bins inside the window support.
class ParzenBins {
 public:
  ParzenBins(const KernelSpec& spec, std::size_t bins)
      : family_(spec.family),
        scale_(spec.scale),
        inv_scale_(1.0 / spec.scale),
        cut_(spec.truncation * spec.scale),
        rad_(spec.support_radius()),
        bins_(bins),
        hard_(spec.family == KernelFamily::Boxcar &&
              std::abs(spec.scale * static_cast<double>(bins) - 1.0) < 1e-12),
        unit_spline_(spec.family == KernelFamily::CubicBSpline &&
                     std::abs(spec.scale * static_cast<double>(bins) - 1.0) < 1e-12) {}

  bool compact() const noexcept { return hard_ || unit_spline_; }

  /// Fills w (and dw if non-null) for bins [lo, lo + count); returns count.
  std::size_t eval(double v, std::size_t& lo, double* w, double* dw) const {
    if (hard_) {
      const auto b = bin_index(v, bins_);
      if (b < 0) return 0;
      lo = static_cast<std::size_t>(b);
      w[0] = 1.0;
      if (dw != nullptr) dw[0] = 0.0;
      return 1;
    }
    const auto m = static_cast<double>(bins_);
    if (unit_spline_) return eval_unit_spline(v * m - 0.5, lo, w, dw);
    const double a = std::clamp(std::ceil((v - rad_) * m - 0.5), 0.0, m);
    const double b = std::clamp(std::floor((v + rad_) * m - 0.5) + 1.0, 0.0, m);
    lo = static_cast<std::size_t>(a);
    const std::size_t hi = std::max(lo, static_cast<std::size_t>(b));
    for (std::size_t n = lo; n < hi; ++n) {
      const double t = v - bin_center(n, bins_);
      kernel(t, w[n - lo], dw != nullptr ? dw + (n - lo) : nullptr);
    }
    return hi - lo;
  }

 private:
  // Bin-width spline: the four weights come from one fractional offset.
  std::size_t eval_unit_spline(double x, std::size_t& lo, double* w, double* dw) const {
    auto ifl = static_cast<std::ptrdiff_t>(x);
    if (static_cast<double>(ifl) > x) --ifl;
    const auto fl = static_cast<double>(ifl);
    const std::ptrdiff_t first = ifl - 1;
    const auto bw = bspline::weights(x - fl);
    const auto bd = bspline::derivative_weights(x - fl);
    const auto m = static_cast<std::ptrdiff_t>(bins_);
    const std::ptrdiff_t a = std::max<std::ptrdiff_t>(first, 0);
    const std::ptrdiff_t b = std::min<std::ptrdiff_t>(first + 4, m);
    if (b <= a) return 0;
    lo = static_cast<std::size_t>(a);
    const double scale = static_cast<double>(bins_);
    for (std::ptrdiff_t n = a; n < b; ++n) {
      w[n - a] = bw[static_cast<std::size_t>(n - first)];
      if (dw != nullptr) dw[n - a] = bd[static_cast<std::size_t>(n - first)] * scale;
    }
    return static_cast<std::size_t>(b - a);
  }

  void kernel(double t, double& w, double* dw) const {
    switch (family_) {
      case KernelFamily::CubicBSpline: {
        const double x = t * inv_scale_;
        const double ax = std::abs(x);
        const double sg = x < 0.0 ? -1.0 : 1.0;
        if (ax < 1.0) {
          w = (4.0 - 6.0 * ax * ax + 3.0 * ax * ax * ax) / 6.0;
          if (dw != nullptr) *dw = sg * (-2.0 * ax + 1.5 * ax * ax) * inv_scale_;
        } else if (ax < 2.0) {
          const double c = 2.0 - ax;
          w = c * c * c / 6.0;
          if (dw != nullptr) *dw = -sg * 0.5 * c * c * inv_scale_;
        } else {
          w = 0.0;
          if (dw != nullptr) *dw = 0.0;
        }
        return;
      }
      case KernelFamily::Gaussian: {
        w = std::abs(t) > cut_ ? 0.0 : std::exp(-0.5 * t * t * inv_scale_ * inv_scale_);
        if (dw != nullptr) *dw = -t * inv_scale_ * inv_scale_ * w;
        return;
      }
      case KernelFamily::Boxcar:
        w = t >= -0.5 * scale_ && t < 0.5 * scale_ ? 1.0 : 0.0;
        if (dw != nullptr) *dw = 0.0;
        return;
    }
  }

  KernelFamily family_;
  double scale_, inv_scale_, cut_, rad_;
  std::size_t bins_;
  bool hard_;
  bool unit_spline_;
};

void add_into(std::vector<double>& into, const std::vector<double>& from) {
  simd::active_kernels().axpy(into.data(), from.data(), 1.0, into.size());
}

}  // namespace

JointEngine::JointEngine(const InterpolantCoefficients& moving, const InterpolantCoefficients& fixed,
                         EstimatorConfig config)
    : moving_(&moving), fixed_(&fixed), config_(config) {
  config_.validate();
  if (moving.ndim() != fixed.ndim()) {
    throw Error(ErrorKind::InvalidArgument, "moving and fixed images differ in dimension");
  }
  samples_ = sample_indices(fixed.extent(), config_.sampling);
  auto bins_of = [&](const ImageGrid& img) {
    std::vector<int> b(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
      b[i] = static_cast<int>(bin_index(img.unit_value(i), config_.bins));
    }
    return b;
  };
  if (config_.estimator == Estimator::GPV) moving_bins_ = bins_of(moving.source());
  fixed_bins_ = bins_of(fixed.source());
  if (config_.estimator == Estimator::PW) {
    const ParzenBins pr(config_.parzen_spec_fixed(), config_.bins);
    if (pr.compact()) {
      const ImageGrid& img = fixed.source();
      fixed_parzen_.resize(img.size());
      for (std::size_t i = 0; i < img.size(); ++i) {
        std::size_t lo = 0;
        auto& f = fixed_parzen_[i];
        f.n = static_cast<std::uint32_t>(pr.eval(img.unit_value(i), lo, f.w.data(), nullptr));
        f.lo = static_cast<std::uint32_t>(lo);
      }
    }
  }
}

std::size_t JointEngine::fixed_weights(std::size_t index, std::size_t& lo, double* w) const {
  const FixedParzen& f = fixed_parzen_[index];
  lo = f.lo;
  for (std::uint32_t k = 0; k < f.n; ++k) w[k] = f.w[k];
  return f.n;
}

Vec3 JointEngine::position(std::size_t index) const noexcept {
  const auto c = fixed_->extent().coords(index);
  return {static_cast<double>(c[0]), static_cast<double>(c[1]), static_cast<double>(c[2])};
}

std::vector<PairSample> JointEngine::pairs(const Transform& t, bool want_gradient) const {
  std::vector<PairSample> out(samples_.size());
  const IntensityRange mr = moving_->intensity_range();
  const double inv_span = 1.0 / mr.span();
  const ImageGrid& fixed = fixed_->source();
  const Extent& me = moving_->extent();
  const std::size_t chunks = std::min<std::size_t>(kReductionChunks, std::max<std::size_t>(1, out.size()));
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = out.size() * c / chunks, end = out.size() * (c + 1) / chunks;
    for (std::size_t s = begin; s < end; ++s) {
      PairSample& p = out[s];
      p.index = samples_[s];
      p.r = fixed.unit_value(p.index);
      const Vec3 y = t.apply(position(p.index));
      p.valid = inside_domain(me, y);
      if (!p.valid) continue;
      const SampleValue v = sample(*moving_, y, want_gradient);
      p.u = (v.value - mr.min) * inv_span;
      for (std::size_t a = 0; a < 3; ++a) p.du[a] = v.gradient[a] * inv_span;
    }
  });
  return out;
}

RawJoint JointEngine::accumulate_pw(std::span<const PairSample> pairs) const {
  const std::size_t m = config_.bins;
  const ParzenBins pi(config_.parzen_spec_moving(), m);
  const ParzenBins pr(config_.parzen_spec_fixed(), m);
  const bool cached = !fixed_parzen_.empty();

  struct Partial {
    std::vector<double> h;
    std::size_t n = 0;
  };
  Partial init{std::vector<double>(m * m, 0.0), 0};
  Partial acc = parallel_reduce(
      pairs.size(), init,
      [&](std::size_t begin, std::size_t end, Partial& part) {
        std::vector<double> wi(m), wr(m);
        for (std::size_t s = begin; s < end; ++s) {
          const PairSample& p = pairs[s];
          if (!p.valid) continue;
          std::size_t li = 0, lr = 0;
          const std::size_t ni = pi.eval(p.u, li, wi.data(), nullptr);
          const std::size_t nr = cached ? fixed_weights(p.index, lr, wr.data())
                                        : pr.eval(p.r, lr, wr.data(), nullptr);
          if (ni == 0 || nr == 0) continue;
          ++part.n;
          double* base = part.h.data() + li * m + lr;
          if (ni == 4 && nr == 4) {
            for (std::size_t a = 0; a < 4; ++a) {
              for (std::size_t c = 0; c < 4; ++c) base[a * m + c] += wi[a] * wr[c];
            }
            continue;
          }
          for (std::size_t a = 0; a < ni; ++a) {
            for (std::size_t c = 0; c < nr; ++c) base[a * m + c] += wi[a] * wr[c];
          }
        }
      },
      [](Partial& into, const Partial& from) {
        add_into(into.h, from.h);
        into.n += from.n;
      });

  RawJoint raw;
  raw.h = std::move(acc.h);
  raw.samples = acc.n;
  for (double v : raw.h) raw.total += v;
  return raw;
}

std::vector<double> JointEngine::chain_pw(const Transform& t, std::span<const PairSample> pairs,
                                          std::span<const double> g, double total) const {
  const std::size_t m = config_.bins;
  const ParzenBins pi(config_.parzen_spec_moving(), m);
  const ParzenBins pr(config_.parzen_spec_fixed(), m);
  const bool cached = !fixed_parzen_.empty();
  std::vector<double> grad = parallel_reduce(
      pairs.size(), std::vector<double>(t.size(), 0.0),
      [&](std::size_t begin, std::size_t end, std::vector<double>& part) {
        std::vector<double> wi(m), dwi(m), wr(m);
        for (std::size_t s = begin; s < end; ++s) {
          const PairSample& p = pairs[s];
          if (!p.valid) continue;
          std::size_t li = 0, lr = 0;
          const std::size_t ni = pi.eval(p.u, li, wi.data(), dwi.data());
          const std::size_t nr = cached ? fixed_weights(p.index, lr, wr.data())
                                        : pr.eval(p.r, lr, wr.data(), nullptr);
          if (ni == 0 || nr == 0) continue;
          const double* base = g.data() + li * m + lr;
          double d = 0.0;
          if (ni == 4 && nr == 4) {
            for (std::size_t a = 0; a < 4; ++a) {
              const double* row = base + a * m;
              d += dwi[a] * (row[0] * wr[0] + row[1] * wr[1] + row[2] * wr[2] + row[3] * wr[3]);
            }
          } else {
            for (std::size_t a = 0; a < ni; ++a) {
              double r = 0.0;
              for (std::size_t c = 0; c < nr; ++c) r += base[a * m + c] * wr[c];
              d += dwi[a] * r;
            }
          }
          if (d == 0.0) continue;
          t.accumulate_gradient(position(p.index), {d * p.du[0], d * p.du[1], d * p.du[2]}, part);
        }
      },
      add_into);
  for (double& v : grad) v /= total;
  return grad;
}

bool JointEngine::gpv_stencil(const Vec3& y, bool want_derivative, GpvStencil& s) const {
  const KernelSpec w = config_.window_spec();
  const double rad = w.support_radius();
  const Extent& e = moving_->extent();
  for (int a = 0; a < 3; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (a >= e.ndim) {
      s.lo[ua] = 0;
      s.len[ua] = 1;
      s.w[ua][0] = 1.0;
      s.dw[ua][0] = 0.0;
      continue;
    }
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil(y[ua] - rad));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(y[ua] + rad));
    // Weights are normalised over the whole lattice; nodes outside the
    // domain are then dropped, so windows near the border lose mass.
    double sum = 0.0, dsum = 0.0;
    for (std::ptrdiff_t q = lo; q <= hi; ++q) {
      sum += eval(w, y[ua] - static_cast<double>(q));
      if (want_derivative) dsum += eval_derivative(w, y[ua] - static_cast<double>(q));
    }
    if (!(sum > 0.0)) return false;
    const std::ptrdiff_t lo_in = std::max<std::ptrdiff_t>(lo, 0);
    const std::ptrdiff_t hi_in = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(e.n[ua]) - 1);
    if (hi_in < lo_in) return false;
    s.lo[ua] = lo_in;
    s.len[ua] = static_cast<int>(hi_in - lo_in + 1);
    for (std::ptrdiff_t q = lo_in; q <= hi_in; ++q) {
      const double t = y[ua] - static_cast<double>(q);
      const double wn = eval(w, t) / sum;
      s.w[ua][static_cast<std::size_t>(q - lo_in)] = wn;
      if (want_derivative) {
        s.dw[ua][static_cast<std::size_t>(q - lo_in)] = (eval_derivative(w, t) - wn * dsum) / sum;
      }
    }
  }
  return true;
}

RawJoint JointEngine::accumulate_gpv(const Transform& t, bool want_direct) const {
  const std::size_t m = config_.bins;
  const Extent& me = moving_->extent();
  const IntensityRange mr = moving_->intensity_range();
  struct Partial {
    std::vector<double> h, di, dj;
    std::size_t n = 0;
  };
  Partial init{std::vector<double>(m * m, 0.0), std::vector<double>(want_direct ? m : 0, 0.0),
               std::vector<double>(want_direct ? m : 0, 0.0), 0};
  Partial acc = parallel_reduce(
      samples_.size(), init,
      [&](std::size_t begin, std::size_t end, Partial& part) {
        GpvStencil st;
        for (std::size_t s = begin; s < end; ++s) {
          const std::size_t idx = samples_[s];
          const int n = fixed_bins_[idx];
          if (n < 0) continue;
          const Vec3 y = t.apply(position(idx));
          if (!inside_domain(me, y) || !gpv_stencil(y, false, st)) continue;
          ++part.n;
          double* col = part.h.data() + n;
          for (int z = 0; z < st.len[2]; ++z) {
            const double wz = st.w[2][static_cast<std::size_t>(z)];
            for (int yy = 0; yy < st.len[1]; ++yy) {
              const double wyz = wz * st.w[1][static_cast<std::size_t>(yy)];
              const std::size_t row = me.index(static_cast<std::size_t>(st.lo[0]),
                                               static_cast<std::size_t>(st.lo[1] + yy),
                                               static_cast<std::size_t>(st.lo[2] + z));
              for (int x = 0; x < st.len[0]; ++x) {
                const int b = moving_bins_[row + static_cast<std::size_t>(x)];
                if (b < 0) continue;
                col[static_cast<std::size_t>(b) * m] += wyz * st.w[0][static_cast<std::size_t>(x)];
              }
            }
          }
          if (want_direct) {
            part.dj[static_cast<std::size_t>(n)] += 1.0;
            const auto bi = bin_index(mr.to_unit(sample(*moving_, y, false).value), m);
            if (bi >= 0) part.di[static_cast<std::size_t>(bi)] += 1.0;
          }
        }
      },
      [](Partial& into, const Partial& from) {
        add_into(into.h, from.h);
        for (std::size_t i = 0; i < into.di.size(); ++i) {
          into.di[i] += from.di[i];
          into.dj[i] += from.dj[i];
        }
        into.n += from.n;
      });
  RawJoint raw;
  raw.h = std::move(acc.h);
  raw.direct_i = std::move(acc.di);
  raw.direct_j = std::move(acc.dj);
  raw.samples = acc.n;
  for (double v : raw.h) raw.total += v;
  return raw;
}

std::vector<double> JointEngine::chain_gpv(const Transform& t, std::span<const double> g,
                                           double total) const {
  const std::size_t m = config_.bins;
  const Extent& me = moving_->extent();
  std::vector<double> grad = parallel_reduce(
      samples_.size(), std::vector<double>(t.size(), 0.0),
      [&](std::size_t begin, std::size_t end, std::vector<double>& part) {
        GpvStencil st;
        for (std::size_t s = begin; s < end; ++s) {
          const std::size_t idx = samples_[s];
          const int n = fixed_bins_[idx];
          if (n < 0) continue;
          const Vec3 x = position(idx);
          const Vec3 y = t.apply(x);
          if (!inside_domain(me, y) || !gpv_stencil(y, true, st)) continue;
          const double* col = g.data() + n;
          Vec3 v{0.0, 0.0, 0.0};
          for (int z = 0; z < st.len[2]; ++z) {
            const auto uz = static_cast<std::size_t>(z);
            for (int yy = 0; yy < st.len[1]; ++yy) {
              const auto uy = static_cast<std::size_t>(yy);
              const std::size_t row = me.index(static_cast<std::size_t>(st.lo[0]),
                                               static_cast<std::size_t>(st.lo[1] + yy),
                                               static_cast<std::size_t>(st.lo[2] + z));
              double sw = 0.0, sdw = 0.0;  // sums over x of g*w and g*dw
              for (int xx = 0; xx < st.len[0]; ++xx) {
                const int b = moving_bins_[row + static_cast<std::size_t>(xx)];
                if (b < 0) continue;
                const double gv = col[static_cast<std::size_t>(b) * m];
                sw += gv * st.w[0][static_cast<std::size_t>(xx)];
                sdw += gv * st.dw[0][static_cast<std::size_t>(xx)];
              }
              v[0] += sdw * st.w[1][uy] * st.w[2][uz];
              v[1] += sw * st.dw[1][uy] * st.w[2][uz];
              v[2] += sw * st.w[1][uy] * st.dw[2][uz];
            }
          }
          t.accumulate_gradient(x, v, part);
        }
      },
      add_into);
  for (double& v : grad) v /= total;
  return grad;
}

JointHistogram JointEngine::to_histogram(const RawJoint& raw) const {
  JointHistogram h;
  h.bins = config_.bins;
  h.joint = raw.h;
  h.direct_i = raw.direct_i;
  h.direct_j = raw.direct_j;
  h.estimator = config_.estimator;
  h.scales = config_.scales;
  h.samples = raw.samples;
  h.mass = raw.total;
  const std::size_t m = h.bins;
  h.marginal_i.assign(m, 0.0);
  h.marginal_j.assign(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      h.marginal_i[a] += h.joint[a * m + b];
      h.marginal_j[b] += h.joint[a * m + b];
    }
  }
  return h;
}

JointHistogram pw_joint(const InterpolantCoefficients& moving, const InterpolantCoefficients& fixed,
                        const Transform& transform, const EstimatorConfig& config) {
  EstimatorConfig c = config;
  c.estimator = Estimator::PW;
  const JointEngine engine(moving, fixed, c);
  const auto p = engine.pairs(transform, false);
  return normalize(engine.to_histogram(engine.accumulate_pw(p)));
}

JointHistogram gpv_joint(const InterpolantCoefficients& moving, const InterpolantCoefficients& fixed,
                         const Transform& transform, const EstimatorConfig& config) {
  EstimatorConfig c = config;
  c.estimator = Estimator::GPV;
  const JointEngine engine(moving, fixed, c);
  return normalize(engine.to_histogram(engine.accumulate_gpv(transform, true)));
}

JointHistogram estimate_joint(const InterpolantCoefficients& moving,
                              const InterpolantCoefficients& fixed, const Transform& transform,
                              const EstimatorConfig& config) {
  return config.estimator == Estimator::PW ? pw_joint(moving, fixed, transform, config)
                                           : gpv_joint(moving, fixed, transform, config);
}

JointHistogram swapped_joint(const InterpolantCoefficients& moving,
                             const InterpolantCoefficients& fixed, const Transform& transform,
                             const EstimatorConfig& config) {
  return transpose(estimate_joint(fixed, moving, transform.inverse(), config));
}

}  // namespace lor
