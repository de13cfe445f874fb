#pragma once

#include <vector>

#include "lor/bspline.hpp"
#include "lor/histograms.hpp"
#include "lor/measures.hpp"
#include "lor/transform.hpp"

namespace lor {

/// Similarity objective. The regularisation term is fixed to zero.
struct ObjectiveConfig {
  MeasureSpec measure;
  EstimatorConfig estimator;
  /// Evaluate SSD directly on intensity pairs instead of through the joint
  /// histogram (only valid for MeasureKind::SSD).
  bool spatial_ssd = false;

  void validate() const;
};

/// Holds both images smoothed at the measurement scale and prefiltered, and
/// evaluates the measure (minimisation orientation) with its gradient with
/// respect to the transform parameters.
class Objective {
 public:
  Objective(ObjectiveConfig config, const ImageGrid& moving, const ImageGrid& fixed);
  // The engine points into the members, so the object stays put.
  Objective(const Objective&) = delete;
  Objective& operator=(const Objective&) = delete;

  const ObjectiveConfig& config() const noexcept { return config_; }
  const InterpolantCoefficients& moving() const noexcept { return moving_; }
  const InterpolantCoefficients& fixed() const noexcept { return fixed_; }

  /// Minimisation-oriented value (information measures negated).
  double value(const Transform& t) const;
  double value_and_gradient(const Transform& t, std::vector<double>& grad) const;

  /// Full measure report, including the usual-orientation value.
  MeasureValue measure(const Transform& t) const;
  JointHistogram joint(const Transform& t) const;

 private:
  double evaluate(const Transform& t, std::vector<double>* grad, MeasureValue* report) const;

  ObjectiveConfig config_;
  InterpolantCoefficients moving_;
  InterpolantCoefficients fixed_;
  JointEngine engine_;
};

}  // namespace lor
