#include "lor/transform.hpp"

#include <algorithm>
#include <cmath>

#include "lor/bspline.hpp"
#include "lor/error.hpp"

namespace lor {

std::string to_string(TransformKind k) {
  switch (k) {
    case TransformKind::Translation: return "translation";
    case TransformKind::Rigid: return "rigid";
    case TransformKind::BSplineFFD: return "ffd";
  }
  return "unknown";
}

TransformKind transform_kind_from_string(const std::string& s) {
  if (s == "translation") return TransformKind::Translation;
  if (s == "rigid") return TransformKind::Rigid;
  if (s == "ffd" || s == "bspline_ffd") return TransformKind::BSplineFFD;
  throw Error(ErrorKind::InvalidArgument, "unknown transform kind '" + s + "'");
}

Transform Transform::translation(int ndim) {
  if (ndim != 2 && ndim != 3) throw Error(ErrorKind::InvalidArgument, "ndim must be 2 or 3");
  Transform t;
  t.kind_ = TransformKind::Translation;
  t.ndim_ = ndim;
  t.params_.assign(static_cast<std::size_t>(ndim), 0.0);
  return t;
}

Transform Transform::rigid(const Extent& domain) {
  Transform t;
  t.kind_ = TransformKind::Rigid;
  t.ndim_ = domain.ndim;
  for (int a = 0; a < domain.ndim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    t.center_[ua] = 0.5 * static_cast<double>(domain.n[ua] - 1);
  }
  t.params_.assign(domain.ndim == 2 ? 3 : 6, 0.0);
  return t;
}

Transform Transform::ffd(const Extent& domain, const std::array<std::size_t, 3>& intervals) {
  Transform t;
  t.kind_ = TransformKind::BSplineFFD;
  t.ndim_ = domain.ndim;
  std::size_t nc = 1;
  for (int a = 0; a < domain.ndim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (intervals[ua] == 0) throw Error(ErrorKind::InvalidArgument, "FFD needs >= 1 interval");
    t.intervals_[ua] = intervals[ua];
    t.ctrl_[ua] = intervals[ua] + 3;
    t.ctrl_spacing_[ua] =
        static_cast<double>(domain.n[ua] - 1) / static_cast<double>(intervals[ua]);
    nc *= t.ctrl_[ua];
  }
  t.params_.assign(nc * static_cast<std::size_t>(domain.ndim), 0.0);
  return t;
}

void Transform::set_params(std::span<const double> p) {
  if (p.size() != params_.size()) {
    throw Error(ErrorKind::InvalidArgument, "parameter count mismatch");
  }
  params_.assign(p.begin(), p.end());
}

Transform::FfdStencil Transform::ffd_stencil(const Vec3& p) const {
  FfdStencil s;
  for (int a = 0; a < ndim_; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const double u = p[ua] / ctrl_spacing_[ua];
    const auto last = static_cast<double>(intervals_[ua] - 1);
    const double cell = std::clamp(std::floor(u), 0.0, last);
    s.w[ua] = bspline::weights(u - cell);
    // Node cell-1 of the knot sequence is control point `cell`.
    for (std::size_t k = 0; k < 4; ++k) s.idx[ua][k] = static_cast<std::size_t>(cell) + k;
  }
  return s;
}

// Rodrigues' formula; row-major 3x3 (2D uses the upper-left block).
std::array<double, 9> Transform::rotation() const {
  if (ndim_ == 2) {
    const double th = params_[2];
    const double c = std::cos(th), s = std::sin(th);
    return {c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0};
  }
  const double wx = params_[3], wy = params_[4], wz = params_[5];
  const double th = std::sqrt(wx * wx + wy * wy + wz * wz);
  const std::array<double, 9> k{0.0, -wz, wy, wz, 0.0, -wx, -wy, wx, 0.0};
  double a = 1.0, b = 0.5;  // sin(th)/th and (1-cos th)/th^2
  if (th > 1e-8) {
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / (th * th);
  }
  std::array<double, 9> r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double kk = 0.0;
      for (int m = 0; m < 3; ++m) kk += k[static_cast<std::size_t>(3 * i + m)] *
                                        k[static_cast<std::size_t>(3 * m + j)];
      r[static_cast<std::size_t>(3 * i + j)] =
          (i == j ? 1.0 : 0.0) + a * k[static_cast<std::size_t>(3 * i + j)] + b * kk;
    }
  }
  return r;
}

Vec3 Transform::apply(const Vec3& p) const {
  switch (kind_) {
    case TransformKind::Translation: {
      Vec3 q = p;
      for (int a = 0; a < ndim_; ++a) q[static_cast<std::size_t>(a)] += params_[static_cast<std::size_t>(a)];
      return q;
    }
    case TransformKind::Rigid: {
      const auto r = rotation();
      const int n = ndim_;
      Vec3 d{p[0] - center_[0], p[1] - center_[1], n == 3 ? p[2] - center_[2] : 0.0};
      Vec3 q = p;
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += r[static_cast<std::size_t>(3 * i + j)] * d[static_cast<std::size_t>(j)];
        const auto ui = static_cast<std::size_t>(i);
        q[ui] = s + center_[ui] + params_[ui];
      }
      return q;
    }
    case TransformKind::BSplineFFD: {
      const FfdStencil s = ffd_stencil(p);
      const std::size_t nc = params_.size() / static_cast<std::size_t>(ndim_);
      Vec3 q = p;
      const std::size_t zn = ndim_ == 3 ? 4 : 1;
      for (std::size_t kz = 0; kz < zn; ++kz) {
        for (std::size_t ky = 0; ky < 4; ++ky) {
          const double wyz = s.w[1][ky] * (ndim_ == 3 ? s.w[2][kz] : 1.0);
          const std::size_t row =
              ctrl_[0] * (s.idx[1][ky] + ctrl_[1] * (ndim_ == 3 ? s.idx[2][kz] : 0));
          for (std::size_t kx = 0; kx < 4; ++kx) {
            const double w = wyz * s.w[0][kx];
            const std::size_t k = row + s.idx[0][kx];
            for (int a = 0; a < ndim_; ++a) {
              q[static_cast<std::size_t>(a)] += w * params_[static_cast<std::size_t>(a) * nc + k];
            }
          }
        }
      }
      return q;
    }
  }
  return p;
}

void Transform::accumulate_gradient(const Vec3& p, const Vec3& v, std::span<double> grad) const {
  switch (kind_) {
    case TransformKind::Translation:
      for (int a = 0; a < ndim_; ++a) grad[static_cast<std::size_t>(a)] += v[static_cast<std::size_t>(a)];
      return;
    case TransformKind::Rigid: {
      for (int a = 0; a < ndim_; ++a) grad[static_cast<std::size_t>(a)] += v[static_cast<std::size_t>(a)];
      const Vec3 d{p[0] - center_[0], p[1] - center_[1], ndim_ == 3 ? p[2] - center_[2] : 0.0};
      const auto r = rotation();
      if (ndim_ == 2) {
        // dR/dtheta = R * [[0,-1],[1,0]]
        const double q0 = -d[1], q1 = d[0];
        const double dx = r[0] * q0 + r[1] * q1;
        const double dy = r[3] * q0 + r[4] * q1;
        grad[2] += v[0] * dx + v[1] * dy;
        return;
      }
      // For the rotation vector w, dR/dw_k = (w_k [w]_x + [w x (I - R) e_k]_x) R / |w|^2 (generator e_k at w = 0).
      const double w0 = params_[3], w1 = params_[4], w2 = params_[5];
      const double th2 = w0 * w0 + w1 * w1 + w2 * w2;
      Vec3 rd{0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) rd[i] += r[3 * i + j] * d[j];
      }
      auto cross = [](const Vec3& a, const Vec3& b) {
        return Vec3{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
      };
      const Vec3 w{w0, w1, w2};
      for (std::size_t k = 0; k < 3; ++k) {
        Vec3 dk;
        if (th2 < 1e-16) {
          Vec3 e{0.0, 0.0, 0.0};
          e[k] = 1.0;
          dk = cross(e, rd);
        } else {
          Vec3 ime{-r[k], -r[3 + k], -r[6 + k]};  // (I - R) e_k
          ime[k] += 1.0;
          const Vec3 u = cross(w, ime);
          const Vec3 a = cross(w, rd);
          const Vec3 b = cross(u, rd);
          for (std::size_t i = 0; i < 3; ++i) dk[i] = (w[k] * a[i] + b[i]) / th2;
        }
        grad[3 + k] += v[0] * dk[0] + v[1] * dk[1] + v[2] * dk[2];
      }
      return;
    }
    case TransformKind::BSplineFFD: {
      const FfdStencil s = ffd_stencil(p);
      const std::size_t nc = params_.size() / static_cast<std::size_t>(ndim_);
      const std::size_t zn = ndim_ == 3 ? 4 : 1;
      for (std::size_t kz = 0; kz < zn; ++kz) {
        for (std::size_t ky = 0; ky < 4; ++ky) {
          const double wyz = s.w[1][ky] * (ndim_ == 3 ? s.w[2][kz] : 1.0);
          const std::size_t row =
              ctrl_[0] * (s.idx[1][ky] + ctrl_[1] * (ndim_ == 3 ? s.idx[2][kz] : 0));
          for (std::size_t kx = 0; kx < 4; ++kx) {
            const double w = wyz * s.w[0][kx];
            const std::size_t k = row + s.idx[0][kx];
            for (int a = 0; a < ndim_; ++a) {
              grad[static_cast<std::size_t>(a) * nc + k] += w * v[static_cast<std::size_t>(a)];
            }
          }
        }
      }
      return;
    }
  }
}

Transform Transform::inverse() const {
  Transform t = *this;
  switch (kind_) {
    case TransformKind::Translation:
      for (double& p : t.params_) p = -p;
      return t;
    case TransformKind::Rigid: {
      // phi^-1(y) = R^T (y - c - t) + c
      const auto r = rotation();
      const int n = ndim_;
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
          s += r[static_cast<std::size_t>(3 * j + i)] * params_[static_cast<std::size_t>(j)];
        }
        t.params_[static_cast<std::size_t>(i)] = -s;
      }
      for (std::size_t k = static_cast<std::size_t>(n); k < params_.size(); ++k) t.params_[k] = -params_[k];
      return t;
    }
    case TransformKind::BSplineFFD:
      throw Error(ErrorKind::InvalidArgument, "FFD transforms have no closed-form inverse");
  }
  return t;
}

}  // namespace lor
