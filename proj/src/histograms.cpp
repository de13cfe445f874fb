#include "lor/histograms.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "lor/error.hpp"

namespace lor {

std::ptrdiff_t bin_index(double u, std::size_t bins) noexcept {
  if (!(u >= 0.0 && u <= 1.0)) return -1;
  const auto n = static_cast<std::ptrdiff_t>(std::floor(u * static_cast<double>(bins)));
  return std::min(n, static_cast<std::ptrdiff_t>(bins) - 1);
}

std::string to_string(Estimator e) { return e == Estimator::PW ? "pw" : "gpv"; }

Estimator estimator_from_string(const std::string& s) {
  if (s == "pw" || s == "PW") return Estimator::PW;
  if (s == "gpv" || s == "GPV") return Estimator::GPV;
  throw Error(ErrorKind::InvalidArgument, "unknown estimator '" + s + "'");
}

KernelSpec EstimatorConfig::parzen_spec_moving() const {
  return {parzen, scales.beta, parzen_truncation};
}

KernelSpec EstimatorConfig::parzen_spec_fixed() const {
  return {parzen, beta_fixed > 0.0 ? beta_fixed : scales.beta, parzen_truncation};
}

KernelSpec EstimatorConfig::window_spec() const { return {window, scales.alpha, window_truncation}; }

void EstimatorConfig::validate() const {
  scales.validate();
  if (bins < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 bins");
  if (beta_fixed < 0.0) throw Error(ErrorKind::InvalidArgument, "beta_fixed must be >= 0");
  if (estimator == Estimator::GPV) {
    if (!std::isfinite(scales.alpha)) {
      throw Error(ErrorKind::InvalidArgument, "GPV needs a finite integration scale alpha");
    }
    if (window_spec().support_radius() > 15.0) {
      throw Error(ErrorKind::InvalidArgument, "GPV window support exceeds 15 voxels");
    }
  }
}

LocalHistogram counting_histogram(const ImageGrid& image, std::size_t bins) {
  if (bins < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 bins");
  LocalHistogram h;
  h.bins.assign(bins, 0.0);
  h.parzen = {KernelFamily::Boxcar, 1.0 / static_cast<double>(bins)};
  h.scales.beta = h.parzen.scale;
  h.k = h.parzen.scale;
  for (std::size_t i = 0; i < image.size(); ++i) {
    const auto b = bin_index(image.unit_value(i), bins);
    if (b >= 0) h.bins[static_cast<std::size_t>(b)] += 1.0;
  }
  return h;
}

LocalHistogram merge_adjacent_bins(const LocalHistogram& h) {
  if (h.size() % 2 != 0) throw Error(ErrorKind::InvalidArgument, "bin count must be even");
  LocalHistogram out = h;
  out.bins.assign(h.size() / 2, 0.0);
  for (std::size_t n = 0; n < out.size(); ++n) out.bins[n] = h.bins[2 * n] + h.bins[2 * n + 1];
  out.parzen.scale = 2.0 * h.parzen.scale;
  return out;
}

namespace {

// Bins whose centre lies within `radius` of v, as [lo, hi).
std::pair<std::size_t, std::size_t> support_bins(double v, double radius, std::size_t bins) {
  const auto m = static_cast<double>(bins);
  const double a = std::ceil((v - radius) * m - 0.5);
  const double b = std::floor((v + radius) * m - 0.5) + 1.0;
  const auto lo = static_cast<std::size_t>(std::clamp(a, 0.0, m));
  const auto hi = static_cast<std::size_t>(std::clamp(b, 0.0, m));
  return {lo, std::max(lo, hi)};
}

void add_parzen(std::vector<double>& bins, const KernelSpec& p, double v, double weight) {
  const auto [lo, hi] = support_bins(v, p.support_radius(), bins.size());
  for (std::size_t n = lo; n < hi; ++n) {
    bins[n] += weight * eval_parzen(p, v - bin_center(n, bins.size()));
  }
}

}  // namespace

LocalHistogram pw_histogram(const ImageGrid& image, const KernelSpec& parzen, std::size_t bins) {
  if (bins < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 bins");
  LocalHistogram h;
  h.bins.assign(bins, 0.0);
  h.parzen = parzen;
  h.scales.beta = parzen.scale;
  h.k = parzen_mass(parzen);
  const double w = 1.0 / static_cast<double>(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) add_parzen(h.bins, parzen, image.unit_value(i), w);
  return h;
}

LocalHistogram local_histogram(const InterpolantCoefficients& coeffs, const Vec3& x,
                               const ScaleTriple& scales, KernelFamily parzen,
                               KernelFamily window, std::size_t bins) {
  scales.validate();
  if (!std::isfinite(scales.alpha)) {
    throw Error(ErrorKind::InvalidArgument, "local_histogram needs finite alpha; use pw_histogram");
  }
  if (bins < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 bins");
  const ImageGrid& img = coeffs.source();
  const Extent& e = img.extent();
  const KernelSpec p{parzen, scales.beta, 6.0};
  const KernelSpec w{window, scales.alpha, 4.0};
  const double rad = w.support_radius();

  std::array<std::ptrdiff_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < e.ndim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    lo[ua] = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(x[ua] - rad)));
    hi[ua] = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(e.n[ua]) - 1,
                                      static_cast<std::ptrdiff_t>(std::floor(x[ua] + rad)));
  }

  LocalHistogram h;
  h.bins.assign(bins, 0.0);
  h.location = x;
  h.scales = scales;
  h.parzen = p;
  h.k = parzen_mass(p);
  for (std::ptrdiff_t z = lo[2]; z <= hi[2]; ++z) {
    const double wz = e.ndim == 3 ? eval(w, x[2] - static_cast<double>(z)) : 1.0;
    for (std::ptrdiff_t y = lo[1]; y <= hi[1]; ++y) {
      const double wy = eval(w, x[1] - static_cast<double>(y));
      for (std::ptrdiff_t xx = lo[0]; xx <= hi[0]; ++xx) {
        const double wt = wz * wy * eval(w, x[0] - static_cast<double>(xx));
        if (wt == 0.0) continue;
        const std::size_t idx = e.index(static_cast<std::size_t>(xx), static_cast<std::size_t>(y),
                                        static_cast<std::size_t>(z));
        add_parzen(h.bins, p, img.unit_value(idx), wt);
      }
    }
  }
  return h;
}

ImageGrid soft_isophote(const InterpolantCoefficients& coeffs, double i0, double beta,
                        KernelFamily parzen) {
  if (!(i0 >= 0.0 && i0 <= 1.0)) throw Error(ErrorKind::InvalidArgument, "i0 must be in [0,1]");
  const ImageGrid& img = coeffs.source();
  const KernelSpec p{parzen, beta, 6.0};
  std::vector<double> v(img.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = eval_parzen(p, img.unit_value(i) - i0);
  return ImageGrid(img.extent(), std::move(v), img.spacing(), IntensityRange{0.0, 1.0});
}

LocalHistogram normalize(const LocalHistogram& h) {
  if (h.normalized) return h;
  double sum = 0.0;
  for (double b : h.bins) sum += b;
  const double mass = sum * h.delta();
  if (!(mass > 0.0)) throw Error(ErrorKind::EmptyHistogram, "histogram has zero mass");
  LocalHistogram out = h;
  for (double& b : out.bins) b /= mass;
  out.mass = mass;
  out.normalized = true;
  return out;
}

JointHistogram normalize(const JointHistogram& h) {
  if (h.normalized) return h;
  const std::size_t m = h.bins;
  const double d = h.delta();
  double sum = 0.0;
  for (double v : h.joint) sum += v;
  if (!(sum > 0.0)) throw Error(ErrorKind::EmptyHistogram, "joint histogram has zero mass");
  JointHistogram out = h;
  const double scale = 1.0 / (sum * d * d);
  for (double& v : out.joint) v *= scale;
  out.marginal_i.assign(m, 0.0);
  out.marginal_j.assign(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      out.marginal_i[a] += out.joint[a * m + b] * d;
      out.marginal_j[b] += out.joint[a * m + b] * d;
    }
  }
  for (auto* v : {&out.direct_i, &out.direct_j}) {
    double s = 0.0;
    for (double x : *v) s += x;
    if (s > 0.0) {
      for (double& x : *v) x /= s * d;
    }
  }
  out.mass = sum;
  out.normalized = true;
  return out;
}

JointHistogram transpose(const JointHistogram& h) {
  JointHistogram out = h;
  const std::size_t m = h.bins;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) out.joint[b * m + a] = h.joint[a * m + b];
  }
  out.marginal_i = h.marginal_j;
  out.marginal_j = h.marginal_i;
  out.direct_i = h.direct_j;
  out.direct_j = h.direct_i;
  return out;
}

double jensen_shannon(const JointHistogram& p, const JointHistogram& q) {
  if (p.bins != q.bins) throw Error(ErrorKind::InvalidArgument, "bin counts differ");
  const JointHistogram a = normalize(p);
  const JointHistogram b = normalize(q);
  const double d2 = a.delta() * a.delta();
  double js = 0.0;
  for (std::size_t k = 0; k < a.joint.size(); ++k) {
    const double x = a.joint[k] * d2;
    const double y = b.joint[k] * d2;
    const double mid = 0.5 * (x + y);
    if (x > 0.0) js += 0.5 * x * std::log(x / mid);
    if (y > 0.0) js += 0.5 * y * std::log(y / mid);
  }
  return std::max(js, 0.0);
}

double parzen_central_moment(const KernelSpec& parzen, int n) {
  if (n < 0 || n > 5) throw Error(ErrorKind::InvalidArgument, "moment order must be in 0..5");
  if (n == 0) return 1.0;
  if (n % 2 == 1) return 0.0;
  const double s = parzen.scale;
  switch (parzen.family) {
    case KernelFamily::Gaussian: return n == 2 ? s * s : 3.0 * std::pow(s, 4);
    case KernelFamily::CubicBSpline: return n == 2 ? s * s / 3.0 : 0.3 * std::pow(s, 4);
    case KernelFamily::Boxcar: return std::pow(0.5 * s, n) / (n + 1.0);
  }
  return 0.0;
}

MomentSet moments(const LocalHistogram& h, int up_to) {
  if (up_to < 0 || up_to > 5) throw Error(ErrorKind::InvalidArgument, "moment order must be in 0..5");
  if (!h.normalized) throw Error(ErrorKind::UnnormalizedInput, "moments need a normalised histogram");
  MomentSet m;
  m.order = up_to;
  const double d = h.delta();
  for (std::size_t n = 0; n < h.size(); ++n) {
    const double i = bin_center(n, h.size());
    double pw = h.bins[n] * d;
    for (int k = 0; k <= up_to; ++k) {
      m.raw[static_cast<std::size_t>(k)] += pw;
      pw *= i;
    }
  }
  const double mean = m.raw[1];
  for (std::size_t n = 0; n < h.size(); ++n) {
    const double c = bin_center(n, h.size()) - mean;
    double pw = h.bins[n] * d;
    for (int k = 0; k <= up_to; ++k) {
      m.central[static_cast<std::size_t>(k)] += pw;
      pw *= c;
    }
  }
  for (int k = 0; k <= up_to; ++k) {
    m.parzen_central[static_cast<std::size_t>(k)] = parzen_central_moment(h.parzen, k);
  }
  return m;
}

JointHistogram convolve_intensity(const JointHistogram& h, double b) {
  if (!(b > 0.0)) throw Error(ErrorKind::InvalidArgument, "intensity smoothing must be > 0");
  const JointHistogram p = normalize(h);
  const std::size_t m = p.bins;
  const double s = b * static_cast<double>(m);  // std in bins
  const auto r = static_cast<std::ptrdiff_t>(std::ceil(6.0 * s));
  std::vector<double> taps(static_cast<std::size_t>(2 * r + 1));
  for (std::ptrdiff_t k = -r; k <= r; ++k) {
    taps[static_cast<std::size_t>(k + r)] = std::exp(-0.5 * static_cast<double>(k * k) / (s * s));
  }
  const auto mm = static_cast<std::ptrdiff_t>(m);
  std::vector<double> tmp(m * m, 0.0);
  // along j (contiguous), then along i; zero outside [0,1]^2
  for (std::ptrdiff_t a = 0; a < mm; ++a) {
    for (std::ptrdiff_t c = 0; c < mm; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        const std::ptrdiff_t src = c - k;
        if (src < 0 || src >= mm) continue;
        acc += taps[static_cast<std::size_t>(k + r)] * p.joint[static_cast<std::size_t>(a * mm + src)];
      }
      tmp[static_cast<std::size_t>(a * mm + c)] = acc;
    }
  }
  JointHistogram out = p;
  for (std::ptrdiff_t a = 0; a < mm; ++a) {
    for (std::ptrdiff_t c = 0; c < mm; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        const std::ptrdiff_t src = a - k;
        if (src < 0 || src >= mm) continue;
        acc += taps[static_cast<std::size_t>(k + r)] * tmp[static_cast<std::size_t>(src * mm + c)];
      }
      out.joint[static_cast<std::size_t>(a * mm + c)] = acc;
    }
  }
  out.scales.beta = std::sqrt(p.scales.beta * p.scales.beta + b * b);
  out.normalized = false;
  out.direct_i.clear();
  out.direct_j.clear();
  return normalize(out);
}

void write_csv(std::ostream& out, const JointHistogram& h) {
  const JointHistogram p = normalize(h);
  out << "# estimator=" << to_string(p.estimator) << "\n"
      << "# M=" << p.bins << "\n"
      << std::setprecision(17) << "# sigma=" << p.scales.sigma << "\n"
      << "# beta=" << p.scales.beta << "\n"
      << "# alpha=" << p.scales.alpha << "\n"
      << "# N=" << p.samples << "\n";
  for (std::size_t a = 0; a < p.bins; ++a) {
    for (std::size_t b = 0; b < p.bins; ++b) {
      if (b > 0) out << ',';
      out << p.at(a, b);
    }
    out << '\n';
  }
}

}  // namespace lor
