#include "ljw/manifolds.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "ljw/errors.hpp"

namespace ljw {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  // fmod can return exactly 2 pi after the shift for tiny negative inputs.
  if (w >= kTwoPi) w -= kTwoPi;
  return w;
}

double wrap_symmetric(double a) {
  double w = std::remainder(a, kTwoPi);
  return w;
}

}  // namespace

UnitSphere::UnitSphere(int ambient_dim) : dim_(ambient_dim) {
  if (ambient_dim < 2 || ambient_dim > kMaxDim) {
    throw std::invalid_argument("UnitSphere: ambient dimension must be in [2, 3]");
  }
}

std::string UnitSphere::name() const { return "S" + std::to_string(dim_ - 1); }

Mat UnitSphere::projector(const Vec& x) const {
  Mat p = identity(dim_);
  p.noalias() -= x * x.transpose();
  return p;
}

Vec UnitSphere::closest_point(const Vec& z) const {
  const double n = z.norm();
  if (n == 0.0) throw DomainError("UnitSphere: closest point of the origin is undefined");
  return z / n;
}

Mat UnitSphere::closest_point_jacobian(const Vec& z) const {
  const double n = z.norm();
  if (n == 0.0) throw DomainError("UnitSphere: closest point of the origin is undefined");
  const Vec u = z / n;
  Mat j = identity(dim_);
  j.noalias() -= u * u.transpose();
  return j / n;
}

Mat UnitSphere::tangent_frame(const Vec& x) const {
  if (!contains(x, 1e-6)) throw DomainError("tangent_frame: point is not on the sphere");
  const Vec n = x / x.norm();
  Mat frame(dim_, dim_ - 1);
  if (dim_ == 2) {
    frame << -n[1], n[0];
    return frame;
  }
  // Branch-free orthonormal basis of n-perp (Duff et al. 2017).
  const double s = std::copysign(1.0, n[2]);
  const double a = -1.0 / (s + n[2]);
  const double b = n[0] * n[1] * a;
  frame << 1.0 + s * n[0] * n[0] * a, b,
           s * b, s + n[1] * n[1] * a,
           -s * n[0], -n[1];
  return frame;
}

double UnitSphere::membership_residual(const Vec& x) const {
  if (x.size() != dim_) return std::numeric_limits<double>::infinity();
  return std::abs(x.norm() - 1.0);
}

Vec UnitSphere::sample_point(std::span<const double> unit) const {
  Vec x(dim_);
  if (dim_ == 2) {
    const double phi = kTwoPi * unit[0];
    x << std::cos(phi), std::sin(phi);
    return x;
  }
  // Archimedes: z uniform in [-1, 1] gives uniform area on S^2.
  const double z = 2.0 * unit[0] - 1.0;
  const double phi = kTwoPi * unit[1];
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  x << r * std::cos(phi), r * std::sin(phi), z;
  return x;
}

FlatTorus::FlatTorus(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("FlatTorus: dimension must be in [1, 3]");
  }
}

std::string FlatTorus::name() const { return "T" + std::to_string(dim_); }

Mat FlatTorus::projector(const Vec&) const { return identity(dim_); }

Vec FlatTorus::closest_point(const Vec& z) const {
  Vec w(dim_);
  for (int i = 0; i < dim_; ++i) w[i] = wrap_angle(z[i]);
  return w;
}

Mat FlatTorus::closest_point_jacobian(const Vec&) const { return identity(dim_); }

double FlatTorus::membership_residual(const Vec& x) const {
  if (x.size() != dim_) return std::numeric_limits<double>::infinity();
  double r = 0.0;
  for (int i = 0; i < dim_; ++i) {
    if (!std::isfinite(x[i])) return std::numeric_limits<double>::infinity();
    if (x[i] < 0.0) r = std::max(r, -x[i]);
    if (x[i] >= kTwoPi) r = std::max(r, x[i] - kTwoPi);
  }
  return r;
}

Mat FlatTorus::tangent_frame(const Vec&) const { return identity(dim_); }

Vec FlatTorus::displacement(const Vec& from, const Vec& to) const {
  Vec d(dim_);
  for (int i = 0; i < dim_; ++i) d[i] = wrap_symmetric(to[i] - from[i]);
  return d;
}

Vec FlatTorus::sample_point(std::span<const double> unit) const {
  Vec x(dim_);
  for (int i = 0; i < dim_; ++i) x[i] = kTwoPi * unit[i];
  return x;
}

}  // namespace ljw
