#include "lor/measures.hpp"

#include <cmath>
#include <map>

#include "lor/error.hpp"

namespace lor {

std::string to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::SSD: return "ssd";
    case MeasureKind::Lq: return "lq";
    case MeasureKind::Hinge: return "hinge";
    case MeasureKind::Huber: return "huber";
    case MeasureKind::Trunc: return "trunc";
    case MeasureKind::MI: return "mi";
    case MeasureKind::NMI: return "nmi";
    case MeasureKind::CC: return "cc";
    case MeasureKind::CR: return "cr";
  }
  return "unknown";
}

MeasureKind measure_kind_from_string(const std::string& s) {
  static const std::map<std::string, MeasureKind> names{
      {"ssd", MeasureKind::SSD},     {"lq", MeasureKind::Lq},     {"pnorm", MeasureKind::Lq},
      {"hinge", MeasureKind::Hinge}, {"huber", MeasureKind::Huber}, {"trunc", MeasureKind::Trunc},
      {"mi", MeasureKind::MI},       {"nmi", MeasureKind::NMI},   {"cc", MeasureKind::CC},
      {"cr", MeasureKind::CR}};
  const auto it = names.find(s);
  if (it == names.end()) throw Error(ErrorKind::InvalidArgument, "unknown measure '" + s + "'");
  return it->second;
}

void MeasureSpec::validate() const {
  if (!(q >= 0.0)) throw Error(ErrorKind::InvalidArgument, "loss exponent q must be >= 0");
  const bool thresholded =
      kind == MeasureKind::Hinge || kind == MeasureKind::Huber || kind == MeasureKind::Trunc;
  if (thresholded && !(k_loss > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "loss threshold must be > 0");
  }
}

bool MeasureSpec::is_linear() const noexcept {
  switch (kind) {
    case MeasureKind::SSD:
    case MeasureKind::Lq:
    case MeasureKind::Hinge:
    case MeasureKind::Huber:
    case MeasureKind::Trunc: return true;
    default: return false;
  }
}

bool MeasureSpec::is_similarity() const noexcept { return !is_linear(); }

double loss(const MeasureSpec& spec, double i, double j) {
  const double d = std::abs(i - j);
  const double q = spec.q, k = spec.k_loss;
  switch (spec.kind) {
    case MeasureKind::SSD: return d * d;
    case MeasureKind::Lq: return std::pow(d, q);
    case MeasureKind::Hinge: return d > k ? std::pow(d - k, q) : 0.0;
    case MeasureKind::Huber:
      return d < k ? std::pow(d, q) : q * std::pow(k, q - 1.0) * d - (q - 1.0) * std::pow(k, q);
    case MeasureKind::Trunc: return d < k ? std::pow(d, q) : std::pow(k, q);
    default: throw Error(ErrorKind::InvalidArgument, "loss() applies to linear measures only");
  }
}

double entropy(std::span<const double> p, double delta) {
  double mass = 0.0;
  for (double v : p) mass += v * delta;
  if (std::abs(mass - 1.0) > 1e-6) {
    throw Error(ErrorKind::UnnormalizedInput, "entropy needs a unit-mass density");
  }
  double h = 0.0;
  for (double v : p) {
    const double q = v * delta;
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

namespace {

// Bin masses of a normalised joint and its marginals.
struct Masses {
  std::size_t m = 0;
  std::vector<double> q, qi, qj;
};

Masses masses(const JointHistogram& h) {
  const JointHistogram p = normalize(h);
  Masses s;
  s.m = p.bins;
  const double d2 = p.delta() * p.delta();
  s.q.resize(p.joint.size());
  s.qi.assign(s.m, 0.0);
  s.qj.assign(s.m, 0.0);
  for (std::size_t a = 0; a < s.m; ++a) {
    for (std::size_t b = 0; b < s.m; ++b) {
      const double v = p.joint[a * s.m + b] * d2;
      s.q[a * s.m + b] = v;
      s.qi[a] += v;
      s.qj[b] += v;
    }
  }
  return s;
}

double shannon(const std::vector<double>& q) {
  double h = 0.0;
  for (double v : q) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

double clamped_log(double v) { return std::log(std::max(v, kProbabilityFloor)); }

struct Stats {
  double mi = 0, mr = 0, eii = 0, err = 0, eir = 0;
  double var_i() const { return eii - mi * mi; }
  double var_r() const { return err - mr * mr; }
  double cov() const { return eir - mi * mr; }
};

Stats stats(const Masses& s) {
  Stats st;
  for (std::size_t a = 0; a < s.m; ++a) {
    const double i = bin_center(a, s.m);
    for (std::size_t b = 0; b < s.m; ++b) {
      const double j = bin_center(b, s.m), q = s.q[a * s.m + b];
      st.mi += i * q;
      st.mr += j * q;
      st.eii += i * i * q;
      st.err += j * j * q;
      st.eir += i * j * q;
    }
  }
  return st;
}

// Correlation ratio with the fixed-image bins as segments.
double joint_cr(const Masses& s, const Stats& st, std::vector<double>* seg) {
  const double var = st.var_i();
  if (!(var > 0.0)) throw Error(ErrorKind::DegenerateHistogram, "moving intensities have zero variance");
  double a = 0.0;
  if (seg != nullptr) seg->assign(s.m, 0.0);
  for (std::size_t b = 0; b < s.m; ++b) {
    double sb = 0.0;
    for (std::size_t m = 0; m < s.m; ++m) sb += bin_center(m, s.m) * s.q[m * s.m + b];
    if (seg != nullptr) (*seg)[b] = sb;
    if (s.qj[b] > kProbabilityFloor) a += sb * sb / s.qj[b];
  }
  return (a - st.mi * st.mi) / var;
}

}  // namespace

MeasureValue evaluate(const MeasureSpec& spec, const JointHistogram& h) {
  spec.validate();
  const Masses s = masses(h);
  MeasureValue out;
  if (spec.is_linear()) {
    double v = 0.0;
    for (std::size_t a = 0; a < s.m; ++a) {
      for (std::size_t b = 0; b < s.m; ++b) {
        v += loss(spec, bin_center(a, s.m), bin_center(b, s.m)) * s.q[a * s.m + b];
      }
    }
    out.value = out.minimized = v;
    return out;
  }
  switch (spec.kind) {
    case MeasureKind::MI:
    case MeasureKind::NMI: {
      Entropies e{shannon(s.qi), shannon(s.qj), shannon(s.q)};
      if (spec.kind == MeasureKind::MI) {
        out.value = e.h_i + e.h_r - e.h_ir;
      } else {
        if (!(e.h_ir > 0.0)) {
          throw Error(ErrorKind::DegenerateHistogram, "joint entropy is zero (constant images)");
        }
        out.value = (e.h_i + e.h_r) / e.h_ir;
      }
      out.entropies = e;
      break;
    }
    case MeasureKind::CC: {
      const Stats st = stats(s);
      const double vi = st.var_i(), vr = st.var_r();
      if (!(vi > 0.0 && vr > 0.0)) {
        throw Error(ErrorKind::DegenerateHistogram, "zero variance in correlation coefficient");
      }
      out.value = st.cov() / std::sqrt(vi * vr);
      out.moments = CorrelationMoments{st.mi, st.mr, std::sqrt(vi), std::sqrt(vr)};
      break;
    }
    case MeasureKind::CR: {
      out.value = joint_cr(s, stats(s), nullptr);
      break;
    }
    default: break;
  }
  out.minimized = -out.value;
  return out;
}

HistogramGradient gradient_wrt_histogram(const MeasureSpec& spec, const JointHistogram& h) {
  spec.validate();
  const Masses s = masses(h);
  const std::size_t m = s.m;
  HistogramGradient g;
  g.bins = m;
  g.d_joint.assign(m * m, 0.0);
  auto& d = g.d_joint;

  if (spec.is_linear()) {
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) d[a * m + b] = loss(spec, bin_center(a, m), bin_center(b, m));
    }
  } else if (spec.kind == MeasureKind::MI || spec.kind == MeasureKind::NMI) {
    const double hi = shannon(s.qi), hr = shannon(s.qj), hir = shannon(s.q);
    if (spec.kind == MeasureKind::NMI && !(hir > 0.0)) {
      throw Error(ErrorKind::DegenerateHistogram, "joint entropy is zero (constant images)");
    }
    for (std::size_t a = 0; a < m; ++a) {
      const double li = clamped_log(s.qi[a]);
      for (std::size_t b = 0; b < m; ++b) {
        const double lj = clamped_log(s.qj[b]);
        const double l = clamped_log(s.q[a * m + b]);
        if (spec.kind == MeasureKind::MI) {
          d[a * m + b] = l - li - lj - 1.0;
        } else {
          const double dm = -li - lj - 2.0;  // d(H_I + H_R)
          const double dj = -l - 1.0;        // d H_IR
          d[a * m + b] = dm / hir - (hi + hr) * dj / (hir * hir);
        }
      }
    }
  } else if (spec.kind == MeasureKind::CC) {
    const Stats st = stats(s);
    const double vi = st.var_i(), vr = st.var_r();
    if (!(vi > 0.0 && vr > 0.0)) {
      throw Error(ErrorKind::DegenerateHistogram, "zero variance in correlation coefficient");
    }
    const double sd = std::sqrt(vi * vr), cc = st.cov() / sd;
    for (std::size_t a = 0; a < m; ++a) {
      const double i = bin_center(a, m);
      for (std::size_t b = 0; b < m; ++b) {
        const double j = bin_center(b, m);
        const double dc = i * j - i * st.mr - j * st.mi;
        const double dvi = i * i - 2.0 * i * st.mi;
        const double dvr = j * j - 2.0 * j * st.mr;
        d[a * m + b] = dc / sd - 0.5 * cc * (dvi / vi + dvr / vr);
      }
    }
  } else if (spec.kind == MeasureKind::CR) {
    const Stats st = stats(s);
    std::vector<double> seg;
    const double cr = joint_cr(s, st, &seg);
    const double var = st.var_i();
    for (std::size_t a = 0; a < m; ++a) {
      const double i = bin_center(a, m);
      const double dvar = i * i - 2.0 * st.mi * i;
      for (std::size_t b = 0; b < m; ++b) {
        double da;
        if (s.qj[b] > kProbabilityFloor) {
          const double r = seg[b] / s.qj[b];
          da = 2.0 * r * i - r * r - 2.0 * st.mi * i;
        } else {
          da = i * i - 2.0 * st.mi * i;  // limit of an empty segment
        }
        d[a * m + b] = (da - cr * dvar) / var;
      }
    }
  }

  // Project onto mass-preserving perturbations: derivative of value(H / sum H).
  double mean = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) mean += s.q[k] * d[k];
  for (double& v : d) v -= mean;
  return g;
}

CorrelationRatioForms correlation_ratio_forms(const ImageGrid& labels, const ImageGrid& target,
                                              std::size_t bins) {
  if (labels.extent() != target.extent()) {
    throw Error(ErrorKind::InvalidArgument, "label and target images differ in size");
  }
  if (bins < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 bins");
  std::map<long, std::vector<double>> hist;
  for (std::size_t x = 0; x < target.size(); ++x) {
    const double l = labels[x];
    if (!std::isfinite(l)) throw Error(ErrorKind::InvalidArgument, "labels must be finite");
    auto& h = hist[std::lround(l)];
    if (h.empty()) h.assign(bins, 0.0);
    const auto b = bin_index(target.unit_value(x), bins);
    if (b >= 0) h[static_cast<std::size_t>(b)] += 1.0;
  }
  double n = 0.0, s1 = 0.0, s2 = 0.0;
  for (const auto& [label, h] : hist) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double i = bin_center(b, bins);
      n += h[b];
      s1 += i * h[b];
      s2 += i * i * h[b];
    }
  }
  const double mu = s1 / n, var = s2 / n - mu * mu;
  if (!(var > 1e-15)) throw Error(ErrorKind::DegenerateHistogram, "target has zero variance");
  CorrelationRatioForms f;
  double within = 0.0;
  for (const auto& [label, h] : hist) {
    double nj = 0.0, t1 = 0.0, t2 = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      const double i = bin_center(b, bins);
      nj += h[b];
      t1 += i * h[b];
      t2 += i * i * h[b];
    }
    if (nj == 0.0) continue;
    const double muj = t1 / nj, varj = t2 / nj - muj * muj;
    within += nj / n * varj;
    f.between += nj / n * (muj - mu) * (muj - mu) / var;
  }
  f.within = 1.0 - within / var;
  return f;
}

MeasureValue evaluate_cr(const ImageGrid& labels, const ImageGrid& target, std::size_t bins) {
  const CorrelationRatioForms f = correlation_ratio_forms(labels, target, bins);
  MeasureValue out;
  out.value = f.within;
  out.minimized = -f.within;
  return out;
}

}  // namespace lor
