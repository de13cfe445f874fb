#pragma once

#include <span>
#include <string>
#include <vector>

#include "lor/image.hpp"

namespace lor {

enum class TransformKind { Translation, Rigid, BSplineFFD };

std::string to_string(TransformKind k);
TransformKind transform_kind_from_string(const std::string& s);

/// Parametric map phi(x; params) from fixed-image voxel coordinates into
/// moving-image voxel coordinates.
///
/// Parameter layouts:
///   Translation  t (ndim)
///   Rigid        t (ndim), then the angle (2D) or rotation vector (3D);
///                rotation is about the domain centre c: phi = R (x - c) + c + t
///   BSplineFFD   displacement components, axis-major: params[a * nc + k] is
///                the axis-a displacement of control point k (x fastest)
class Transform {
 public:
  Transform() = default;

  static Transform translation(int ndim);
  static Transform rigid(const Extent& domain);
  /// Uniform cubic B-spline grid with `intervals` cells per axis over the
  /// domain [0, n-1]; control points extend one cell past each side.
  static Transform ffd(const Extent& domain, const std::array<std::size_t, 3>& intervals);

  TransformKind kind() const noexcept { return kind_; }
  int ndim() const noexcept { return ndim_; }
  std::size_t size() const noexcept { return params_.size(); }
  std::span<const double> params() const noexcept { return params_; }
  void set_params(std::span<const double> p);
  void set_param(std::size_t i, double v) { params_.at(i) = v; }

  /// FFD control grid dimensions (n_ctrl per axis) and spacing in voxels.
  const std::array<std::size_t, 3>& control_dims() const noexcept { return ctrl_; }
  const Vec3& control_spacing() const noexcept { return ctrl_spacing_; }

  Vec3 apply(const Vec3& p) const;

  /// grad[k] += sum_a v[a] * d phi_a(p) / d params[k].
  void accumulate_gradient(const Vec3& p, const Vec3& v, std::span<double> grad) const;

  /// Inverse map for translation and rigid transforms.
  Transform inverse() const;

 private:
  struct FfdStencil {
    std::array<std::array<std::size_t, 4>, 3> idx{};
    std::array<std::array<double, 4>, 3> w{};
  };
  FfdStencil ffd_stencil(const Vec3& p) const;
  std::array<double, 9> rotation() const;

  TransformKind kind_ = TransformKind::Translation;
  int ndim_ = 2;
  Vec3 center_{0.0, 0.0, 0.0};
  std::array<std::size_t, 3> ctrl_{1, 1, 1};
  Vec3 ctrl_spacing_{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> intervals_{1, 1, 1};
  std::vector<double> params_;
};

}  // namespace lor
