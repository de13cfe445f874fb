#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lor/bspline.hpp"
#include "lor/image.hpp"
#include "lor/kernels.hpp"
#include "lor/sampling.hpp"
#include "lor/transform.hpp"

namespace lor {

// Intensities are histogrammed in normalised units u in [0,1] (see
// IntensityRange). With M bins the centres are i_n = (n + 0.5) / M and the
// bin width is 1/M.

inline double bin_center(std::size_t n, std::size_t bins) noexcept {
  return (static_cast<double>(n) + 0.5) / static_cast<double>(bins);
}

/// Half-open cell [n/M, (n+1)/M) containing u, with u = 1 in the last cell.
/// Returns -1 for u outside [0,1].
std::ptrdiff_t bin_index(double u, std::size_t bins) noexcept;

enum class Estimator { PW, GPV };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);

struct LocalHistogram {
  std::vector<double> bins;
  std::optional<Vec3> location;  // absent for global histograms
  ScaleTriple scales;
  KernelSpec parzen{KernelFamily::Boxcar, 1.0};
  double k = 1.0;     // analytic mass of the Parzen window
  double mass = 0.0;  // sum(bins) * delta at the last normalisation
  bool normalized = false;

  std::size_t size() const noexcept { return bins.size(); }
  double delta() const noexcept { return 1.0 / static_cast<double>(bins.size()); }
};

/// Joint histogram over (i, j): i indexes the moving image I, j the fixed
/// image R. Raw histograms hold accumulated kernel weights; normalised ones
/// hold densities (sum joint * delta^2 = 1, sum marginal * delta = 1).
struct JointHistogram {
  std::size_t bins = 0;
  std::vector<double> joint;       // joint[m * bins + n]
  std::vector<double> marginal_i;  // row sums over j
  std::vector<double> marginal_j;  // column sums over i
  // GPV only: hard histograms of the sampled values of I and R. These are
  // the "direct" marginal estimates and are not expected to equal the sums.
  std::vector<double> direct_i;
  std::vector<double> direct_j;
  Estimator estimator = Estimator::PW;
  ScaleTriple scales;
  std::size_t samples = 0;
  double mass = 0.0;  // raw sum of joint entries before normalisation
  bool normalized = false;

  double delta() const noexcept { return 1.0 / static_cast<double>(bins); }
  double at(std::size_t m, std::size_t n) const noexcept { return joint[m * bins + n]; }
};

struct MomentSet {
  int order = 0;
  std::array<double, 6> raw{};             // mu'_n about zero
  std::array<double, 6> central{};         // mu_n about the mean
  std::array<double, 6> parzen_central{};  // eta_n of the Parzen window
};

/// Estimator configuration shared by pw_joint, gpv_joint and the objective.
struct EstimatorConfig {
  Estimator estimator = Estimator::PW;
  ScaleTriple scales;
  std::size_t bins = 64;
  KernelFamily parzen = KernelFamily::Gaussian;  // P (PW only; GPV is hard-binned)
  KernelFamily window = KernelFamily::Gaussian;  // W (GPV only)
  double parzen_truncation = 6.0;
  double window_truncation = 4.0;
  double beta_fixed = 0.0;  // separate beta for R; 0 means scales.beta
  SamplePolicy sampling;

  KernelSpec parzen_spec_moving() const;
  KernelSpec parzen_spec_fixed() const;
  KernelSpec window_spec() const;
  void validate() const;
};

LocalHistogram counting_histogram(const ImageGrid& image, std::size_t bins);

/// Sum of adjacent bin pairs (2n, 2n+1); needs an even bin count.
LocalHistogram merge_adjacent_bins(const LocalHistogram& h);

/// Global Parzen histogram: bins[n] = mean over voxels of P(u(x) - i_n).
LocalHistogram pw_histogram(const ImageGrid& image, const KernelSpec& parzen, std::size_t bins);

/// bins[n] = sum over voxels psi of P(u(psi) - i_n, beta) W(x - psi, alpha),
/// with x in voxel units. Uses node values; apply the measurement scale first.
LocalHistogram local_histogram(const InterpolantCoefficients& coeffs, const Vec3& x,
                               const ScaleTriple& scales, KernelFamily parzen,
                               KernelFamily window, std::size_t bins);

/// Pixelwise P(u(x) - i0, beta) on the grid nodes.
ImageGrid soft_isophote(const InterpolantCoefficients& coeffs, double i0, double beta,
                        KernelFamily parzen = KernelFamily::Gaussian);

LocalHistogram normalize(const LocalHistogram& h);
JointHistogram normalize(const JointHistogram& h);

/// Eta_n of the Parzen window: central moments of P / k.
double parzen_central_moment(const KernelSpec& parzen, int n);

MomentSet moments(const LocalHistogram& h, int up_to = 5);

/// Parzen-window joint estimate of (I o phi, R); normalised.
JointHistogram pw_joint(const InterpolantCoefficients& moving, const InterpolantCoefficients& fixed,
                        const Transform& transform, const EstimatorConfig& config);

/// Generalised partial volume estimate: R supplies hard classes at the
/// sample points, I supplies hard classes spread by W around phi(x).
JointHistogram gpv_joint(const InterpolantCoefficients& moving, const InterpolantCoefficients& fixed,
                         const Transform& transform, const EstimatorConfig& config);

/// Dispatch on config.estimator.
JointHistogram estimate_joint(const InterpolantCoefficients& moving,
                              const InterpolantCoefficients& fixed, const Transform& transform,
                              const EstimatorConfig& config);

/// Swaps the roles of i and j (joint, marginals and direct marginals).
JointHistogram transpose(const JointHistogram& h);

/// Joint of the swapped argument order M(B, A o phi), reported in the
/// (A, B) orientation: the estimator runs with `fixed` as the moving image
/// under phi^-1 and the result is transposed. Needs an invertible transform.
JointHistogram swapped_joint(const InterpolantCoefficients& moving,
                             const InterpolantCoefficients& fixed, const Transform& transform,
                             const EstimatorConfig& config);

/// Jensen-Shannon divergence (natural log) between the bin masses of two
/// normalised joints with equal bin counts.
double jensen_shannon(const JointHistogram& p, const JointHistogram& q);

/// Normalised density convolved with an isotropic Gaussian of std b in
/// (i, j); mass leaving [0,1]^2 is dropped before renormalising.
JointHistogram convolve_intensity(const JointHistogram& h, double b);

/// CSV dump: '#' comment header (estimator, M, sigma, beta, alpha, N) then M
/// rows of M densities; row m is the moving-image bin.
void write_csv(std::ostream& out, const JointHistogram& h);

/// Per-sample quantities shared by the PW estimator, the spatial SSD path
/// and their gradients.
struct PairSample {
  std::size_t index = 0;  // fixed-image voxel
  double u = 0.0;         // moving intensity at phi(x), normalised
  double r = 0.0;         // fixed intensity at x, normalised
  Vec3 du{0.0, 0.0, 0.0}; // d u / d phi(x)
  bool valid = false;     // phi(x) inside the moving domain
};

/// Raw accumulation result.
struct RawJoint {
  std::vector<double> h;  // M*M
  std::vector<double> direct_i, direct_j;
  double total = 0.0;
  std::size_t samples = 0;
};

/// Sample-level engine behind the estimators and the registration
/// objective. Holds the sample set and per-image hard bins; one instance per
/// image pair and configuration.
class JointEngine {
 public:
  JointEngine(const InterpolantCoefficients& moving, const InterpolantCoefficients& fixed,
              EstimatorConfig config);

  const EstimatorConfig& config() const noexcept { return config_; }
  std::span<const std::size_t> sample_points() const noexcept { return samples_; }

  /// Moving/fixed pairs at every sample point; invalid where phi(x) leaves
  /// the moving domain.
  std::vector<PairSample> pairs(const Transform& t, bool want_gradient) const;

  RawJoint accumulate_pw(std::span<const PairSample> pairs) const;
  RawJoint accumulate_gpv(const Transform& t, bool want_direct) const;

  /// d value / d params from g = T * d value / d H (see measures), for the
  /// state produced by the matching accumulate call.
  std::vector<double> chain_pw(const Transform& t, std::span<const PairSample> pairs,
                               std::span<const double> g, double total) const;
  std::vector<double> chain_gpv(const Transform& t, std::span<const double> g, double total) const;

  /// Voxel position of a fixed-image sample.
  Vec3 position(std::size_t index) const noexcept;

  JointHistogram to_histogram(const RawJoint& raw) const;

 private:
  struct GpvStencil {
    std::array<std::ptrdiff_t, 3> lo{0, 0, 0};
    std::array<int, 3> len{1, 1, 1};
    std::array<std::array<double, 32>, 3> w{};
    std::array<std::array<double, 32>, 3> dw{};
  };
  bool gpv_stencil(const Vec3& y, bool want_derivative, GpvStencil& s) const;
  // Fixed-image Parzen weights per voxel, cached when the kernel spans at most four bins.
  struct FixedParzen {
    std::uint32_t lo = 0, n = 0;
    std::array<double, 4> w{};
  };
  std::size_t fixed_weights(std::size_t index, std::size_t& lo, double* w) const;

  const InterpolantCoefficients* moving_;
  const InterpolantCoefficients* fixed_;
  EstimatorConfig config_;
  std::vector<std::size_t> samples_;
  std::vector<int> moving_bins_;
  std::vector<int> fixed_bins_;
  std::vector<FixedParzen> fixed_parzen_;
};

}  // namespace lor
