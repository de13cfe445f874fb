#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lor/histograms.hpp"
#include "lor/image.hpp"

namespace lor {

enum class MeasureKind { SSD, Lq, Hinge, Huber, Trunc, MI, NMI, CC, CR };

std::string to_string(MeasureKind k);
MeasureKind measure_kind_from_string(const std::string& s);

/// Lower bound used inside logarithms of empty bins.
inline constexpr double kProbabilityFloor = 1e-12;

struct MeasureSpec {
  MeasureKind kind = MeasureKind::NMI;
  double q = 2.0;       // exponent of Lq, Hinge, Huber and Trunc
  double k_loss = 0.1;  // threshold of Hinge, Huber and Trunc

  void validate() const;
  /// True for measures linear in the joint density (F(i,j) losses).
  bool is_linear() const noexcept;
  /// True when larger values mean better alignment (MI, NMI, CC, CR).
  bool is_similarity() const noexcept;
};

/// Pointwise loss F(i, j) of the linear measures.
double loss(const MeasureSpec& spec, double i, double j);

struct Entropies {
  double h_i = 0.0;
  double h_r = 0.0;
  double h_ir = 0.0;
};

struct CorrelationMoments {
  double mu_i = 0.0, mu_r = 0.0, sigma_i = 0.0, sigma_r = 0.0;
};

struct MeasureValue {
  double value = 0.0;      // in the usual orientation (MI larger = better)
  double minimized = 0.0;  // sign arranged so that smaller is better
  std::optional<Entropies> entropies;
  std::optional<CorrelationMoments> moments;
};

/// Shannon entropy of a normalised density p with bin width delta, taken on
/// the bin masses p * delta: -sum (p delta) ln (p delta), 0 ln 0 = 0.
double entropy(std::span<const double> p, double delta);

MeasureValue evaluate(const MeasureSpec& spec, const JointHistogram& h);

/// Correlation ratio of `target` explained by the segments of a label image
/// (labels are rounded to integers); per-segment histograms with M bins.
MeasureValue evaluate_cr(const ImageGrid& labels, const ImageGrid& target, std::size_t bins);

/// Both sides of the variance factorisation behind the correlation ratio:
/// 1 - sum_j w_j var_j / var and sum_j w_j (mu_j - mu)^2 / var.
struct CorrelationRatioForms {
  double within = 0.0;
  double between = 0.0;
};

CorrelationRatioForms correlation_ratio_forms(const ImageGrid& labels, const ImageGrid& target,
                                              std::size_t bins);

/// Sensitivity of the measure (usual orientation) to the joint histogram.
/// d_joint(m, n) is the derivative of value(H / sum H) with respect to
/// H(m, n), multiplied by sum H. It is invariant to rescaling H, sums to zero
/// when weighted by the bin masses, and for linear measures equals
/// F(i_m, j_n) - value.
struct HistogramGradient {
  std::size_t bins = 0;
  std::vector<double> d_joint;
};

HistogramGradient gradient_wrt_histogram(const MeasureSpec& spec, const JointHistogram& h);

}  // namespace lor
