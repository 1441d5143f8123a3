#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ljw/types.hpp"

namespace ljw {

/// A compact manifold M given extrinsically: points are ambient vectors in
/// R^N, T_xM is the image of the orthogonal projector P(x), and the
/// retraction is closest-point projection of x + v back onto M.
///
/// The ambient inner product restricted to T_xM is the Riemannian metric
/// used for Levi-Civita derivatives and transport.
class EmbeddedManifold {
 public:
  virtual ~EmbeddedManifold() = default;

  virtual int ambient_dim() const = 0;
  virtual int intrinsic_dim() const = 0;
  virtual std::string name() const = 0;

  virtual Mat projector(const Vec& x) const = 0;
  /// Closest point on M to an ambient point near M.
  virtual Vec closest_point(const Vec& z) const = 0;
  /// Jacobian of closest_point at z.
  virtual Mat closest_point_jacobian(const Vec& z) const = 0;
  /// Distance-like defect of x from M (0 on M).
  virtual double membership_residual(const Vec& x) const = 0;
  /// Ambient displacement from `from` to `to` (periodic tori wrap).
  virtual Vec displacement(const Vec& from, const Vec& to) const { return to - from; }
  /// Largest step |v| for which retract(x, v) is trusted.
  virtual double retraction_radius() const = 0;
  /// Maps a point of the unit cube [0,1)^intrinsic_dim onto M, uniformly in area.
  virtual Vec sample_point(std::span<const double> unit) const = 0;

  bool contains(const Vec& x, double tol = 1e-9) const { return membership_residual(x) <= tol; }
  Vec retract(const Vec& x, const Vec& v) const { return v.isZero(0.0) ? x : closest_point(x + v); }
  double distance(const Vec& x, const Vec& y) const { return displacement(x, y).norm(); }
  /// Orthonormal basis of T_xM as the columns of an N x n matrix.
  virtual Mat tangent_frame(const Vec& x) const;
};

/// A smooth vector field on M, evaluated in ambient coordinates.
///
/// `jacobian` is an optional closed-form ambient Jacobian; without it the
/// derivative backend uses central differences along retraction curves.
struct VectorField {
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;
  /// Number of continuous derivatives; 0 disables differentiation.
  int smoothness = 2;

  Vec operator()(const Vec& x) const { return value(x); }
  bool differentiable() const { return smoothness >= 1; }
};

/// Differentiation settings shared by geometry and connection code.
struct DiffConfig {
  /// Central difference step h = eps^(1/3) * scale.
  double scale = 1.0;
  double step() const;
};

/// Derivative at t = 0 of t -> fn(retract(x, t v)), by central differences.
/// The curve has velocity v at x, so this is the directional derivative of
/// fn along v. Works for any callable returning Vec or Mat.
template <class Fn>
auto curve_derivative(const EmbeddedManifold& m, const Vec& x, const Vec& v, Fn&& fn,
                      const DiffConfig& cfg = {}) -> decltype(fn(x)) {
  const double vn = v.norm();
  if (vn == 0.0) {
    auto f0 = fn(x);
    f0.setZero();
    return f0;
  }
  const double h = cfg.step() / vn;
  auto fp = fn(m.retract(x, h * v));
  auto fm = fn(m.retract(x, -h * v));
  return ((fp - fm) / (2.0 * h)).eval();
}

/// Halton-sequence point on M (bases 2, 3, 5), for deterministic sampling.
Vec quasi_random_point(const EmbeddedManifold& m, int index);

/// P(x) v. Throws DomainError when x is not on M.
Vec tangent_project(const EmbeddedManifold& m, const Vec& x, const Vec& v);

/// Ambient directional derivative DZ(x) v (not projected).
Vec directional_derivative(const EmbeddedManifold& m, const VectorField& z, const Vec& x,
                           const Vec& v, const DiffConfig& cfg = {});

/// Induced Levi-Civita derivative P(x) DZ(x) v.
Vec levi_civita_derivative(const EmbeddedManifold& m, const VectorField& z, const Vec& x,
                           const Vec& v, const DiffConfig& cfg = {});

/// [Z1, Z2](x) = DZ2(x) Z1(x) - DZ1(x) Z2(x).
Vec lie_bracket(const EmbeddedManifold& m, const VectorField& z1, const VectorField& z2,
                const Vec& x, const DiffConfig& cfg = {});

/// Discrete parallel transport of v0 along a sampled path: project onto the
/// next tangent space, then rescale to the previous norm.
std::vector<Vec> levi_civita_transport(const EmbeddedManifold& m, std::span<const Vec> path,
                                       const Vec& v0);

/// Linear isometry T_{from}M -> T_{to}M used to carry whole frames: the
/// orthogonal polar factor of P(to) restricted to T_{from}M. Returned as an
/// N x N ambient matrix that annihilates normals at `from`.
Mat transport_map(const EmbeddedManifold& m, const Vec& from, const Vec& to);
/// Same, with tangent frames at both points already at hand.
Mat transport_map(const EmbeddedManifold& m, const Vec& to, const Mat& frame_from, const Mat& frame_to);

/// Inverse of a linear map L: T_{x0}M -> T_{x1}M stored ambiently.
/// Result maps T_{x1}M -> T_{x0}M and annihilates normals at x1.
Mat tangent_inverse(const EmbeddedManifold& m, const Vec& x0, const Vec& x1, const Mat& map);

}  // namespace ljw
