#include "lor/cli/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "lor/cli/plot.hpp"
#include "lor/error.hpp"
#include "lor/kernels.hpp"
#include "lor/objective.hpp"
#include "lor/parallel.hpp"
#include "lor/synthetic.hpp"

namespace lor::cli {

std::string to_string(PairKind k) {
  switch (k) {
    case PairKind::Remap: return "remap";
    case PairKind::Gradient: return "gradient";
    case PairKind::Blobs: return "blobs";
    case PairKind::Ramps: return "ramps";
  }
  return "unknown";
}

PairKind pair_kind_from_string(const std::string& s) {
  if (s == "remap") return PairKind::Remap;
  if (s == "gradient") return PairKind::Gradient;
  if (s == "blobs") return PairKind::Blobs;
  if (s == "ramps") return PairKind::Ramps;
  throw Error(ErrorKind::InvalidArgument, "unknown pair kind '" + s + "'");
}

namespace {

Extent extent_of(const std::array<std::size_t, 3>& d) {
  return d[2] <= 1 ? Extent::make2(d[0], d[1]) : Extent::make3(d[0], d[1], d[2]);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

ImagePair make_pair(const PairSpec& spec, std::uint64_t seed) {
  const Extent e = extent_of(spec.dims);
  ImagePair p;
  switch (spec.kind) {
    case PairKind::Remap: {
      p.a = gen_smooth_random(e, seed, spec.smoothing);
      std::vector<double> v(p.a.values().begin(), p.a.values().end());
      for (double& x : v) x *= x;
      p.b = ImageGrid(e, std::move(v)).normalized();
      break;
    }
    case PairKind::Gradient: {
      const ImageGrid f = gen_smooth_random(e, seed, spec.smoothing);
      std::vector<double> va(e.size()), vb(e.size());
      const double sx = spec.slope / static_cast<double>(e.n[0] - 1);
      const double sy = spec.slope / static_cast<double>(e.n[1] - 1);
      for (std::size_t i = 0; i < e.size(); ++i) {
        const auto c = e.coords(i);
        va[i] = f[i] + sx * static_cast<double>(c[0]);
        vb[i] = f[i] + sy * static_cast<double>(c[1]);
      }
      p.a = ImageGrid(e, std::move(va)).normalized();
      p.b = ImageGrid(e, std::move(vb)).normalized();
      break;
    }
    case PairKind::Blobs: {
      const Vec3 c{0.5 * static_cast<double>(e.n[0] - 1), 0.5 * static_cast<double>(e.n[1] - 1),
                   0.5 * static_cast<double>(e.n[2] - 1)};
      p.a = gen_gaussian_blob(e, c, 5.0);
      p.b = gen_gaussian_blob(e, c, 11.0);
      break;
    }
    case PairKind::Ramps: {
      // The diagonal ramp spans [0,1]; the axial one shares its magnitude and range.
      const double g = 1.0 / (std::sqrt(2.0) * static_cast<double>(e.n[0] - 1));
      const ImageGrid ra = gen_linear_gradient(e, {1, 0, 0}, g, false);
      const ImageGrid rb = gen_linear_gradient(e, {1, 1, 0}, g, false);
      p.a = ImageGrid(e, std::vector<double>(ra.values().begin(), ra.values().end()), {1, 1, 1}, IntensityRange{0, 1});
      p.b = ImageGrid(e, std::vector<double>(rb.values().begin(), rb.values().end()), {1, 1, 1}, IntensityRange{0, 1});
      break;
    }
  }
  return p;
}

std::vector<double> SweepSpec::offsets() const {
  const auto n = static_cast<long>(std::lround(range / step));
  std::vector<double> out;
  for (long k = -n; k <= n; ++k) out.push_back(static_cast<double>(k) * step);
  return out;
}

void ExperimentConfig::validate() const {
  static const char* const ids[] = {"asymmetry", "scales", "jointreport", "bench"};
  if (std::find(std::begin(ids), std::end(ids), id) == std::end(ids)) {
    throw Error(ErrorKind::InvalidArgument, "unknown experiment '" + id + "'");
  }
  if (!(sweep.step > 0.0) || !(sweep.range >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "sweep step must be > 0 and range >= 0");
  }
  if (sweep.axis < 0 || sweep.axis > 2) throw Error(ErrorKind::InvalidArgument, "sweep axis");
  if (estimators.empty() || sigmas.empty() || betas.empty() || alphas.empty()) {
    throw Error(ErrorKind::InvalidArgument, "estimator and scale grids must be non-empty");
  }
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be >= 0");
  }
  for (double b : betas) {
    if (!(b > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be > 0");
  }
  for (double a : alphas) {
    if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be > 0");
  }
  if (bins < 2) throw Error(ErrorKind::InvalidArgument, "bins must be >= 2");
  if (pair.count == 0) throw Error(ErrorKind::InvalidArgument, "pair count must be >= 1");
  if (evaluations < 1) throw Error(ErrorKind::InvalidArgument, "evaluations must be >= 1");
  measure.validate();
}

EstimatorConfig ExperimentConfig::estimator_config(Estimator e, double sigma, double beta,
                                                   double alpha) const {
  EstimatorConfig c;
  c.estimator = e;
  c.bins = bins;
  c.scales.sigma = sigma;
  c.scales.beta = e == Estimator::GPV ? 1.0 / static_cast<double>(bins) : beta;
  c.scales.alpha = e == Estimator::GPV ? alpha : kInf;
  c.sampling.margin = margin;
  if (samples > 0) {
    c.sampling.mode = SampleMode::Random;
    c.sampling.count = samples;
    c.sampling.seed = seed;
  }
  return c;
}

ExperimentConfig default_config(const std::string& id) {
  ExperimentConfig c;
  c.id = id;
  if (id == "asymmetry") {
    c.pair.count = 10;
  } else if (id == "scales") {
    c.sigmas = {1.0};
    c.betas = {0.01, 0.02, 0.05, 0.1, 0.2};
    c.alphas = {0.2, 0.5, 1.0, 2.0, 3.0};
    c.estimators = {Estimator::PW, Estimator::GPV};
  } else if (id == "jointreport") {
    c.pair.kind = PairKind::Gradient;
    c.pair.smoothing = 4.0;
    c.sigmas = {1.0, 4.0};
    c.alphas = {1.0};
  } else if (id == "bench") {
    c.pair.dims = {128, 128, 64};
    c.pair.smoothing = 4.0;
    c.bins = 256;
    c.betas = {1.0 / 256.0};
    c.sigmas = {0.0};
    c.alphas = {1.0};
    c.samples = 1000000;
    c.margin = 0;
  }
  c.validate();
  return c;
}

namespace {

nlohmann::json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    throw Error(ErrorKind::InvalidArgument, "expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

std::vector<double> read_grid(const nlohmann::json& j) {
  std::vector<double> out;
  if (!j.is_array()) return {read_number(j)};
  for (const auto& v : j) out.push_back(read_number(v));
  return out;
}

nlohmann::json grid(const std::vector<double>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json est = nlohmann::json::array();
  for (Estimator e : c.estimators) est.push_back(to_string(e));
  return {{"experiment", c.id},
          {"estimators", est},
          {"measure", {{"kind", to_string(c.measure.kind)}, {"q", c.measure.q}, {"k_loss", c.measure.k_loss}}},
          {"sigmas", grid(c.sigmas)},
          {"betas", grid(c.betas)},
          {"alphas", grid(c.alphas)},
          {"sweep", {{"range", c.sweep.range}, {"step", c.sweep.step}, {"axis", c.sweep.axis}}},
          {"bins", c.bins},
          {"samples", c.samples},
          {"margin", c.margin},
          {"pair",
           {{"kind", to_string(c.pair.kind)},
            {"dims", c.pair.dims},
            {"smoothing", c.pair.smoothing},
            {"slope", c.pair.slope},
            {"count", c.pair.count}}},
          {"seed", c.seed},
          {"evaluations", c.evaluations},
          {"out", c.out_dir.string()}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::string& fallback_id) {
  ExperimentConfig c = default_config(j.value("experiment", fallback_id));
  try {
    if (j.contains("estimators")) {
      c.estimators.clear();
      for (const auto& e : j["estimators"]) c.estimators.push_back(estimator_from_string(e));
    }
    if (j.contains("measure")) {
      const auto& m = j["measure"];
      if (m.is_string()) {
        c.measure.kind = measure_kind_from_string(m.get<std::string>());
      } else {
        c.measure.kind = measure_kind_from_string(m.value("kind", to_string(c.measure.kind)));
        c.measure.q = m.value("q", c.measure.q);
        c.measure.k_loss = m.value("k_loss", c.measure.k_loss);
      }
    }
    if (j.contains("sigmas")) c.sigmas = read_grid(j["sigmas"]);
    if (j.contains("betas")) c.betas = read_grid(j["betas"]);
    if (j.contains("alphas")) c.alphas = read_grid(j["alphas"]);
    if (j.contains("sweep")) {
      const auto& s = j["sweep"];
      c.sweep.range = s.value("range", c.sweep.range);
      c.sweep.step = s.value("step", c.sweep.step);
      c.sweep.axis = s.value("axis", c.sweep.axis);
    }
    c.bins = j.value("bins", c.bins);
    c.samples = j.value("samples", c.samples);
    c.margin = j.value("margin", c.margin);
    if (j.contains("pair")) {
      const auto& p = j["pair"];
      c.pair.kind = pair_kind_from_string(p.value("kind", to_string(c.pair.kind)));
      if (p.contains("dims")) {
        const auto d = p["dims"].get<std::vector<std::size_t>>();
        if (d.size() < 2 || d.size() > 3) throw Error(ErrorKind::InvalidArgument, "pair dims");
        c.pair.dims = {d[0], d[1], d.size() == 3 ? d[2] : 1};
      }
      c.pair.smoothing = p.value("smoothing", c.pair.smoothing);
      c.pair.slope = p.value("slope", c.pair.slope);
      c.pair.count = p.value("count", c.pair.count);
    }
    c.seed = j.value("seed", c.seed);
    c.evaluations = j.value("evaluations", c.evaluations);
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::InvalidArgument, std::string("experiment config: ") + ex.what());
  }
  c.validate();
  return c;
}

void stamp(CsvTable& table, const ExperimentConfig& c) {
  table.set_meta("experiment", c.id);
  table.set_meta("config", to_json(c).dump());
}

// ---------------------------------------------------------------------------

InterpolantCoefficients smoothed_coefficients(const ImageGrid& image, double sigma) {
  if (sigma <= 0.0) return prefilter(image);
  return prefilter(convolve(image, {KernelFamily::Gaussian, sigma}));
}

namespace {

JointHistogram engine_joint(const JointEngine& e, const Transform& t) {
  if (e.config().estimator == Estimator::PW) {
    const auto pairs = e.pairs(t, false);
    return normalize(e.to_histogram(e.accumulate_pw(pairs)));
  }
  return normalize(e.to_histogram(e.accumulate_gpv(t, false)));
}

}  // namespace

std::vector<double> sweep_scores(const InterpolantCoefficients& a,
                                 const InterpolantCoefficients& b,
                                 const EstimatorConfig& estimator, const MeasureSpec& measure,
                                 const SweepSpec& sweep, bool swapped) {
  // M(B, A o phi) is the estimator with roles exchanged under phi^-1.
  const JointEngine engine = swapped ? JointEngine(b, a, estimator) : JointEngine(a, b, estimator);
  std::vector<double> out;
  for (double t : sweep.offsets()) {
    Transform tr = Transform::translation(a.ndim());
    tr.set_param(static_cast<std::size_t>(sweep.axis), t);
    const JointHistogram h =
        swapped ? transpose(engine_joint(engine, tr.inverse())) : engine_joint(engine, tr);
    out.push_back(-evaluate(measure, h).minimized);
  }
  return out;
}

double refine_peak(const std::vector<double>& offsets, const std::vector<double>& scores) {
  if (offsets.size() != scores.size() || offsets.empty()) {
    throw Error(ErrorKind::InvalidArgument, "offsets and scores differ in length");
  }
  const auto best = static_cast<std::size_t>(
      std::max_element(scores.begin(), scores.end()) - scores.begin());
  if (best == 0 || best + 1 == scores.size()) return offsets[best];
  constexpr std::size_t kHalf = 4;
  const std::size_t lo = best >= kHalf ? best - kHalf : 0;
  const std::size_t hi = std::min(scores.size() - 1, best + kHalf);
  // Normal equations of y = c0 + c1 d + c2 d^2 with d relative to the best sample.
  double s[5] = {0, 0, 0, 0, 0}, r[3] = {0, 0, 0};
  for (std::size_t k = lo; k <= hi; ++k) {
    const double d = offsets[k] - offsets[best];
    double p = 1.0;
    for (int q = 0; q < 5; ++q) {
      s[q] += p;
      if (q < 3) r[q] += p * scores[k];
      p *= d;
    }
  }
  double m[3][4] = {{s[0], s[1], s[2], r[0]}, {s[1], s[2], s[3], r[1]}, {s[2], s[3], s[4], r[2]}};
  for (int i = 0; i < 3; ++i) {
    for (int k = i + 1; k < 3; ++k) {
      const double f = m[k][i] / m[i][i];
      for (int c = i; c < 4; ++c) m[k][c] -= f * m[i][c];
    }
  }
  const double c2 = m[2][3] / m[2][2];
  const double c1 = (m[1][3] - m[1][2] * c2) / m[1][1];
  if (!(c2 < 0.0)) return offsets[best];
  const double d = std::clamp(-c1 / (2.0 * c2), offsets[lo] - offsets[best], offsets[hi] - offsets[best]);
  return offsets[best] + d;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "line fit needs two or more points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = sxx > 0 && syy > 0 ? sxy * sxy / (sxx * syy) : 0.0;
  return f;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> row_of(std::initializer_list<double> values) {
  std::vector<std::string> r;
  for (double v : values) r.push_back(format_number(v));
  return r;
}

}  // namespace

AsymmetryReport run_asymmetry_sweep(const ExperimentConfig& c) {
  c.validate();
  AsymmetryReport rep;
  rep.config = c;
  const auto offsets = c.sweep.offsets();
  for (std::size_t p = 0; p < c.pair.count; ++p) {
    const ImagePair pair = make_pair(c.pair, c.seed + p);
    for (double sigma : c.sigmas) {
      const auto a = smoothed_coefficients(pair.a, sigma);
      const auto b = smoothed_coefficients(pair.b, sigma);
      for (Estimator e : c.estimators) {
        const std::vector<double> alphas = e == Estimator::GPV ? c.alphas : std::vector<double>{kInf};
        for (double alpha : alphas) {
          const EstimatorConfig ec = c.estimator_config(e, sigma, c.betas.front(), alpha);
          AsymmetryRow row;
          row.estimator = e;
          row.sigma = sigma;
          row.beta = ec.scales.beta;
          row.alpha = alpha;
          row.pair = p;
          row.optimum_forward =
              refine_peak(offsets, sweep_scores(a, b, ec, c.measure, c.sweep, false));
          row.optimum_swapped =
              refine_peak(offsets, sweep_scores(a, b, ec, c.measure, c.sweep, true));
          row.asymmetry = row.optimum_forward - row.optimum_swapped;
          rep.rows.push_back(row);
        }
      }
    }
  }
  // Aggregate over pairs, keeping first-appearance order.
  for (const auto& row : rep.rows) {
    auto it = std::find_if(rep.summary.begin(), rep.summary.end(), [&](const AsymmetrySummary& s) {
      return s.estimator == row.estimator && s.sigma == row.sigma && s.alpha == row.alpha;
    });
    if (it == rep.summary.end()) {
      rep.summary.push_back({row.estimator, row.sigma, row.beta, row.alpha, 0.0, 0.0});
      it = rep.summary.end() - 1;
    }
    it->mean_abs += std::abs(row.asymmetry) / static_cast<double>(c.pair.count);
    it->mean += row.asymmetry / static_cast<double>(c.pair.count);
  }
  return rep;
}

CsvTable AsymmetryReport::table() const {
  CsvTable t;
  stamp(t, config);
  t.header = {"estimator", "sigma", "beta", "alpha", "pair", "optimum_forward", "optimum_swapped",
              "asymmetry"};
  for (const auto& r : rows) {
    auto rec = row_of({r.sigma, r.beta, r.alpha, static_cast<double>(r.pair), r.optimum_forward,
                       r.optimum_swapped, r.asymmetry});
    rec.insert(rec.begin(), to_string(r.estimator));
    t.rows.push_back(std::move(rec));
  }
  return t;
}

CsvTable AsymmetryReport::summary_table() const {
  CsvTable t;
  stamp(t, config);
  t.header = {"estimator", "sigma", "beta", "alpha", "mean_abs_asymmetry", "mean_asymmetry"};
  for (const auto& s : summary) {
    auto rec = row_of({s.sigma, s.beta, s.alpha, s.mean_abs, s.mean});
    rec.insert(rec.begin(), to_string(s.estimator));
    t.rows.push_back(std::move(rec));
  }
  return t;
}

AsymmetryLaw fit_asymmetry_law(const AsymmetryReport& r, Estimator e) {
  AsymmetryLaw law;
  std::vector<double> xs, ys, sigmas;
  for (const auto& s : r.summary) {
    if (s.estimator != e) continue;
    xs.push_back(s.alpha);
    ys.push_back(s.mean_abs);
    if (std::find(law.alphas.begin(), law.alphas.end(), s.alpha) == law.alphas.end()) {
      law.alphas.push_back(s.alpha);
    }
    if (std::find(sigmas.begin(), sigmas.end(), s.sigma) == sigmas.end()) sigmas.push_back(s.sigma);
  }
  if (xs.size() < 2) throw Error(ErrorKind::InvalidArgument, "not enough summary rows to fit");
  const LinearFit pooled = fit_line(xs, ys);
  law.alpha_slope = pooled.slope;
  law.alpha_r2 = pooled.r2;
  for (double a : law.alphas) {
    std::vector<double> sx, sy;
    for (const auto& s : r.summary) {
      if (s.estimator == e && s.alpha == a) {
        sx.push_back(s.sigma);
        sy.push_back(s.mean_abs);
      }
    }
    const double slope = sx.size() >= 2 ? fit_line(sx, sy).slope : 0.0;
    law.sigma_slopes.push_back(slope);
    if (law.alpha_slope != 0.0) {
      law.max_sigma_ratio = std::max(law.max_sigma_ratio, std::abs(slope / law.alpha_slope));
    }
  }
  return law;
}

// ---------------------------------------------------------------------------

ScaleReport run_scale_sweep(const ExperimentConfig& c) {
  c.validate();
  ScaleReport rep;
  rep.config = c;
  const ImagePair pair = make_pair(c.pair, c.seed);
  const auto offsets = c.sweep.offsets();
  const auto centre = static_cast<std::size_t>(
      std::min_element(offsets.begin(), offsets.end(),
                       [](double x, double y) { return std::abs(x) < std::abs(y); }) -
      offsets.begin());
  for (double sigma : c.sigmas) {
    const auto a = smoothed_coefficients(pair.a, sigma);
    const auto b = smoothed_coefficients(pair.b, sigma);
    for (Estimator e : c.estimators) {
      const std::size_t n = e == Estimator::PW ? c.betas.size() : c.alphas.size();
      for (std::size_t k = 0; k < n; ++k) {
        const double beta = e == Estimator::PW ? c.betas[k] : c.betas.front();
        const double alpha = e == Estimator::PW ? kInf : c.alphas[k];
        const EstimatorConfig ec = c.estimator_config(e, sigma, beta, alpha);
        ScaleCurve curve;
        curve.estimator = e;
        curve.sigma = sigma;
        curve.beta = ec.scales.beta;
        curve.alpha = alpha;
        curve.offsets = offsets;
        const double sign = c.measure.is_similarity() ? 1.0 : -1.0;
        for (double s : sweep_scores(a, b, ec, c.measure, c.sweep, false)) {
          curve.values.push_back(sign * s);
        }
        curve.peak = curve.values[centre];
        if (centre > 0 && centre + 1 < offsets.size()) {
          const double h = c.sweep.step;
          curve.sharpness = -(curve.values[centre + 1] - 2.0 * curve.values[centre] +
                              curve.values[centre - 1]) /
                            (h * h);
        }
        rep.curves.push_back(std::move(curve));
      }
    }
  }
  return rep;
}

CsvTable ScaleReport::table() const {
  CsvTable t;
  stamp(t, config);
  t.header = {"estimator", "sigma", "beta", "alpha", "offset", "value"};
  for (const auto& cv : curves) {
    for (std::size_t i = 0; i < cv.offsets.size(); ++i) {
      auto rec = row_of({cv.sigma, cv.beta, cv.alpha, cv.offsets[i], cv.values[i]});
      rec.insert(rec.begin(), to_string(cv.estimator));
      t.rows.push_back(std::move(rec));
    }
  }
  return t;
}

CsvTable ScaleReport::summary_table() const {
  CsvTable t;
  stamp(t, config);
  t.header = {"estimator", "sigma", "beta", "alpha", "peak", "sharpness"};
  for (const auto& cv : curves) {
    auto rec = row_of({cv.sigma, cv.beta, cv.alpha, cv.peak, cv.sharpness});
    rec.insert(rec.begin(), to_string(cv.estimator));
    t.rows.push_back(std::move(rec));
  }
  return t;
}

// ---------------------------------------------------------------------------

JointDensityReport run_joint_density_report(const ExperimentConfig& c) {
  c.validate();
  JointDensityReport rep;
  rep.config = c;
  const ImagePair pair = make_pair(c.pair, c.seed);
  const Transform identity = Transform::translation(pair.a.ndim());
  for (double sigma : c.sigmas) {
    const auto a = smoothed_coefficients(pair.a, sigma);
    const auto b = smoothed_coefficients(pair.b, sigma);
    for (Estimator e : c.estimators) {
      const std::vector<double> alphas = e == Estimator::GPV ? c.alphas : std::vector<double>{kInf};
      for (double alpha : alphas) {
        const EstimatorConfig ec = c.estimator_config(e, sigma, c.betas.front(), alpha);
        JointDensityEntry entry;
        entry.estimator = e;
        entry.sigma = sigma;
        entry.alpha = alpha;
        entry.forward = estimate_joint(a, b, identity, ec);
        entry.swapped = swapped_joint(a, b, identity, ec);
        entry.jsd = jensen_shannon(entry.forward, entry.swapped);
        rep.entries.push_back(std::move(entry));
      }
    }
  }
  return rep;
}

CsvTable JointDensityReport::summary_table() const {
  CsvTable t;
  stamp(t, config);
  t.set_meta("reference", "published MRI JSD 0.10005 (sigma=1) and 0.27105 (sigma=4), not reproduced");
  t.header = {"estimator", "sigma", "alpha", "jsd", "l1_difference"};
  for (const auto& e : entries) {
    double l1 = 0.0;
    const double d2 = e.forward.delta() * e.forward.delta();
    for (std::size_t k = 0; k < e.forward.joint.size(); ++k) {
      l1 += std::abs(e.forward.joint[k] - e.swapped.joint[k]) * d2;
    }
    auto rec = row_of({e.sigma, e.alpha, e.jsd, l1});
    rec.insert(rec.begin(), to_string(e.estimator));
    t.rows.push_back(std::move(rec));
  }
  return t;
}

std::vector<std::filesystem::path> write_joint_density_report(const JointDensityReport& r,
                                                              const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  const auto summary = dir / "jointreport_summary.csv";
  write_csv_file(summary, r.summary_table());
  written.push_back(summary);
  for (const auto& e : r.entries) {
    const std::string tag = to_string(e.estimator) + "_s" + format_number(e.sigma) +
                            (e.estimator == Estimator::GPV ? "_a" + format_number(e.alpha) : "");
    const std::size_t m = e.forward.bins;
    Heatmap diff{tag + " forward - swapped", m, m, {}, true};
    for (std::size_t k = 0; k < m * m; ++k) diff.values.push_back(e.forward.joint[k] - e.swapped.joint[k]);
    CsvTable dt;
    dt.set_meta("estimator", to_string(e.estimator));
    dt.set_meta("M", std::to_string(m));
    dt.set_meta("sigma", format_number(e.sigma));
    dt.set_meta("alpha", format_number(e.alpha));
    dt.set_meta("content", "forward minus swapped density");
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<std::string> rec;
      for (std::size_t j = 0; j < m; ++j) rec.push_back(format_number(diff.values[i * m + j]));
      dt.rows.push_back(std::move(rec));
    }
    const std::pair<const char*, const JointHistogram*> dumps[] = {{"forward", &e.forward},
                                                                     {"swapped", &e.swapped}};
    for (const auto& [name, h] : dumps) {
      const auto path = dir / ("joint_" + tag + "_" + name + ".csv");
      std::ofstream out(path, std::ios::binary);
      if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
      write_csv(out, *h);
      written.push_back(path);
      const auto svg = dir / ("joint_" + tag + "_" + name + ".svg");
      std::ofstream(svg, std::ios::binary)
          << render_heatmap({tag + " " + name, m, m, h->joint, false});
      written.push_back(svg);
    }
    const auto dpath = dir / ("joint_" + tag + "_difference.csv");
    write_csv_file(dpath, dt);
    written.push_back(dpath);
    const auto dsvg = dir / ("joint_" + tag + "_difference.svg");
    std::ofstream(dsvg, std::ios::binary) << render_heatmap(diff);
    written.push_back(dsvg);
  }
  return written;
}

// ---------------------------------------------------------------------------

BenchReport run_bench(const ExperimentConfig& c) {
  c.validate();
  BenchReport rep;
  rep.config = c;
  rep.threads = thread_count();
  const ImagePair pair = make_pair(c.pair, c.seed);
  const double n = static_cast<double>(c.samples > 0 ? c.samples : pair.a.size());
  const double m = static_cast<double>(c.bins);

  // Off-grid evaluation point, so spline weights are not degenerate.
  const double shift[3] = {0.3, -0.2, 0.1};
  Transform t = Transform::translation(pair.a.ndim());
  for (int k = 0; k < pair.a.ndim(); ++k) t.set_param(static_cast<std::size_t>(k), shift[k]);

  struct Case {
    std::string name;
    MeasureKind kind;
    Estimator estimator;
    bool spatial;
    double flops;
  };
  const std::vector<Case> cases = {
      {"ssd", MeasureKind::SSD, Estimator::PW, true, FlopModel::ssd(n)},
      {"pnorm", MeasureKind::Lq, Estimator::PW, false, FlopModel::pnorm(n)},
      {"pw_nmi", MeasureKind::NMI, Estimator::PW, false, FlopModel::pw_nmi(n, m)},
      {"gpv_nmi", MeasureKind::NMI, Estimator::GPV, false, FlopModel::gpv_nmi(n, m)},
  };
  std::vector<std::unique_ptr<Objective>> objectives;
  for (const auto& cs : cases) {
    ObjectiveConfig oc;
    oc.measure.kind = cs.kind;
    oc.measure.q = 1.5;
    oc.spatial_ssd = cs.spatial;
    oc.estimator = c.estimator_config(cs.estimator, c.sigmas.front(), c.betas.front(), c.alphas.front());
    oc.estimator.parzen = KernelFamily::CubicBSpline;
    oc.estimator.window = KernelFamily::CubicBSpline;
    objectives.push_back(std::make_unique<Objective>(oc, pair.a, pair.b));
  }
  // Cases are interleaved per round so that machine drift hits all of them
  // alike; the median round time is reported.
  std::vector<std::vector<double>> samples(cases.size());
  std::vector<double> g;
  for (const auto& obj : objectives) obj->value_and_gradient(t, g);  // warm-up
  for (int k = 0; k < c.evaluations; ++k) {
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const auto start = std::chrono::steady_clock::now();
      objectives[i]->value_and_gradient(t, g);
      samples[i].push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
  }
  for (std::size_t i = 0; i < cases.size(); ++i) {
    auto& v = samples[i];
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    BenchTiming bt;
    bt.name = cases[i].name;
    bt.seconds = v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    bt.flops = cases[i].flops;
    rep.timings.push_back(bt);
  }
  const double ssd_s = rep.timings.front().seconds, ssd_f = rep.timings.front().flops;
  for (auto& bt : rep.timings) {
    bt.ratio = bt.seconds / ssd_s;
    bt.theoretical = bt.flops / ssd_f;
    bt.overhead = bt.ratio / bt.theoretical;
  }
  rep.gpv_model_bytes = MemoryModel::gpv_bytes(n);
  rep.pw_model_bytes = MemoryModel::pw_bytes(n);
  rep.pw_cache_bytes = n * static_cast<double>(sizeof(PairSample));
  return rep;
}

const BenchTiming& BenchReport::timing(const std::string& name) const {
  for (const auto& t : timings) {
    if (t.name == name) return t;
  }
  throw Error(ErrorKind::InvalidArgument, "no timing named '" + name + "'");
}

CsvTable BenchReport::table() const {
  CsvTable t;
  stamp(t, config);
  t.set_meta("threads", std::to_string(threads));
  t.set_meta("gpv_model_bytes", format_number(gpv_model_bytes));
  t.set_meta("pw_model_bytes", format_number(pw_model_bytes));
  t.set_meta("pw_cache_bytes", format_number(pw_cache_bytes));
  t.set_meta("reference", "published SSD 1.21 s, PW 1.63 s, ratio 1.34, theoretical 1.17 (2011 laptop)");
  t.header = {"measure", "seconds", "ratio_to_ssd", "theoretical_ratio", "overhead", "flops"};
  for (const auto& b : timings) {
    auto rec = row_of({b.seconds, b.ratio, b.theoretical, b.overhead, b.flops});
    rec.insert(rec.begin(), b.name);
    t.rows.push_back(std::move(rec));
  }
  return t;
}

}  // namespace lor::cli
