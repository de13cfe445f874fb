#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lor/cli/csv.hpp"
#include "lor/histograms.hpp"
#include "lor/measures.hpp"

namespace lor::cli {

/// Synthetic image pairs used in place of real scans.
///   Remap     A = F, B = F^2 (rescaled) for a smooth random field F; a
///             multimodal pair with a sharp optimum at zero offset
///   Gradient  A = F + s x, B = F + s y: equal gradient magnitude, orthogonal
///             directions, over a shared texture F
///   Blobs     centred Gaussian blobs of std 5 and 11
enum class PairKind { Remap, Gradient, Blobs, Ramps };
std::string to_string(PairKind k);
PairKind pair_kind_from_string(const std::string& s);

struct PairSpec {
  PairKind kind = PairKind::Remap;
  std::array<std::size_t, 3> dims{64, 64, 1};  // dims[2] == 1 means 2D
  double smoothing = 10.0;  // std of F in voxels
  double slope = 1.26;      // ramp rise across the x (or y) extent, Gradient only
  // Ramps: pure linear ramps along (1,0) and (1,1)/sqrt2 with equal gradient magnitude.
  std::size_t count = 1;    // number of seeded pairs (seed, seed+1, ...)
};

struct ImagePair {
  ImageGrid a;
  ImageGrid b;
};

ImagePair make_pair(const PairSpec& spec, std::uint64_t seed);

/// Translation sweep along one axis, offsets -range..range in `step`.
struct SweepSpec {
  double range = 1.5;
  double step = 0.1;
  int axis = 0;
  std::vector<double> offsets() const;
};

struct ExperimentConfig {
  std::string id = "asymmetry";  // asymmetry | scales | jointreport | bench
  std::vector<Estimator> estimators{Estimator::GPV, Estimator::PW};
  MeasureSpec measure;
  std::vector<double> sigmas{0.5, 1.0, 2.0, 4.0};
  std::vector<double> betas{1.0 / 64.0};  // PW Parzen std; GPV bins are hard (1/M)
  std::vector<double> alphas{0.2, 0.5, 1.0, 1.5, 2.0};
  SweepSpec sweep;
  std::size_t bins = 64;
  std::size_t samples = 0;  // 0: every voxel inside the margin, else a random subset
  std::size_t margin = 12;  // sample points keep this distance to the border
  PairSpec pair;
  std::uint64_t seed = 1;
  int evaluations = 100;  // bench only
  std::filesystem::path out_dir = "out";

  void validate() const;
  /// Estimator settings for one grid point.
  EstimatorConfig estimator_config(Estimator e, double sigma, double beta, double alpha) const;
};

/// Defaults per experiment id.
ExperimentConfig default_config(const std::string& id);
nlohmann::json to_json(const ExperimentConfig& c);
/// Keys absent from `j` keep the defaults of j["experiment"] (or `fallback_id`).
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::string& fallback_id = "asymmetry");

/// Metadata header lines shared by every CSV an experiment writes.
void stamp(CsvTable& table, const ExperimentConfig& c);

// ---------------------------------------------------------------------------
// Translation sweeps

/// Image smoothed with a Gaussian of std sigma (voxels; 0 leaves it as is)
/// and prefiltered for spline sampling.
InterpolantCoefficients smoothed_coefficients(const ImageGrid& image, double sigma);

/// Measure score (larger is better) along the sweep for M(A o phi, B), or
/// for M(B, A o phi) when `swapped`. The swapped order runs the estimator
/// with B as the moving image under the inverse translation.
std::vector<double> sweep_scores(const InterpolantCoefficients& a,
                                 const InterpolantCoefficients& b,
                                 const EstimatorConfig& estimator, const MeasureSpec& measure,
                                 const SweepSpec& sweep, bool swapped);

/// Offset of the maximum: least-squares parabola through the samples
/// within four steps of the best sample, clamped to that window.
double refine_peak(const std::vector<double>& offsets, const std::vector<double>& scores);

struct AsymmetryRow {
  Estimator estimator = Estimator::GPV;
  double sigma = 0.0, beta = 0.0, alpha = 0.0;
  std::size_t pair = 0;
  double optimum_forward = 0.0;
  double optimum_swapped = 0.0;
  double asymmetry = 0.0;  // forward - swapped
};

struct AsymmetrySummary {
  Estimator estimator = Estimator::GPV;
  double sigma = 0.0, beta = 0.0, alpha = 0.0;
  double mean_abs = 0.0;  // mean over pairs of |asymmetry|
  double mean = 0.0;
};

struct AsymmetryReport {
  ExperimentConfig config;
  std::vector<AsymmetryRow> rows;
  std::vector<AsymmetrySummary> summary;
  CsvTable table() const;
  CsvTable summary_table() const;
};

AsymmetryReport run_asymmetry_sweep(const ExperimentConfig& c);

/// Linear fits of mean |asymmetry| for one estimator: pooled over sigma
/// against alpha, and per alpha against sigma.
struct AsymmetryLaw {
  double alpha_slope = 0.0;
  double alpha_r2 = 0.0;
  std::vector<double> alphas;
  std::vector<double> sigma_slopes;  // one per alpha
  double max_sigma_ratio = 0.0;      // max |sigma slope| / |alpha slope|
};
AsymmetryLaw fit_asymmetry_law(const AsymmetryReport& r, Estimator e);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Scale sweep

struct ScaleCurve {
  Estimator estimator = Estimator::PW;
  double sigma = 0.0, beta = 0.0, alpha = 0.0;
  std::vector<double> offsets;
  std::vector<double> values;  // measure in its usual orientation
  double peak = 0.0;           // value at offset 0
  double sharpness = 0.0;      // -(v(h) - 2 v(0) + v(-h)) / h^2
};

struct ScaleReport {
  ExperimentConfig config;
  std::vector<ScaleCurve> curves;
  CsvTable table() const;          // long format, one row per offset
  CsvTable summary_table() const;  // one row per curve
};

/// PW curves over sigma x beta, GPV curves over sigma x alpha, on the first
/// pair (aligned at offset 0).
ScaleReport run_scale_sweep(const ExperimentConfig& c);

// ---------------------------------------------------------------------------
// Joint density report

struct JointDensityEntry {
  Estimator estimator = Estimator::GPV;
  double sigma = 0.0, alpha = 0.0;
  JointHistogram forward;  // M(A, B)
  JointHistogram swapped;  // M(B, A), transposed into the (A, B) layout
  double jsd = 0.0;
};

struct JointDensityReport {
  ExperimentConfig config;
  std::vector<JointDensityEntry> entries;
  CsvTable summary_table() const;
};

/// Joints of both argument orders at the identity for every estimator, sigma
/// and alpha (PW once per sigma), with their Jensen-Shannon divergence.
JointDensityReport run_joint_density_report(const ExperimentConfig& c);

/// Summary CSV plus, per entry, the forward, swapped and difference
/// densities as CSV and SVG heatmaps. Returns the written files.
std::vector<std::filesystem::path> write_joint_density_report(const JointDensityReport& r,
                                                              const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Timing bench

/// Closed-form flop totals of the unified evaluation loop (cubic B-spline
/// kernels, N samples, M bins).
struct FlopModel {
  static double ssd(double n) { return 1134.0 * n; }
  static double pnorm(double n) { return 1379.0 * n; }
  static double pw_nmi(double n, double m) { return 1331.0 * n + 9.0 * m * m + 6.0 * m; }
  static double gpv_nmi(double n, double m) { return 1383.0 * n + 9.0 * m * m + 6.0 * m; }
};

/// Working-set bytes of the sample caches assumed by the flop model.
struct MemoryModel {
  static double gpv_bytes(double n) { return 192.0 * n * 8.0; }
  static double pw_bytes(double n) { return 8.0 * n * 8.0; }
};

struct BenchTiming {
  std::string name;
  double seconds = 0.0;  // median wall time per value-and-gradient evaluation
  double ratio = 0.0;    // seconds / SSD seconds
  double theoretical = 0.0;
  double overhead = 0.0;  // ratio / theoretical
  double flops = 0.0;
};

struct BenchReport {
  ExperimentConfig config;
  int threads = 1;
  std::vector<BenchTiming> timings;  // SSD, PNorm, PW-NMI, GPV-NMI
  double gpv_model_bytes = 0.0;
  double pw_model_bytes = 0.0;
  double pw_cache_bytes = 0.0;  // per-sample pair cache of this implementation
  CsvTable table() const;
  const BenchTiming& timing(const std::string& name) const;
};

/// Uses config.samples (N), bins (M), evaluations and pair dims. The SSD
/// baseline is the spatial residual sum; the others run through the joint
/// histogram with cubic B-spline P and W.
BenchReport run_bench(const ExperimentConfig& c);

}  // namespace lor::cli
