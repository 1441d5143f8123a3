#pragma once

#include <functional>
#include <memory>
#include <string>

#include "ljw/geometry.hpp"

namespace ljw {

/// The pair (X, A) of dx = X(x) o dB + A(x) dt on an embedded manifold.
///
/// X(x) is stored ambiently as an N x m matrix whose columns are tangent at
/// x. The optional closed forms let Monte Carlo loops avoid finite
/// differences and SVDs; they are validated against the numerical routes
/// when a scenario is registered.
struct DiffusionSystem {
  std::string scenario_id;
  std::shared_ptr<const EmbeddedManifold> manifold;
  int noise_dim = 0;
  std::function<Mat(const Vec&)> coefficient;
  VectorField drift;

  /// Ambient Jacobian of x -> X(x) a, for fixed a in R^m.
  std::function<Mat(const Vec&, const Vec&)> coefficient_jacobian;
  /// e(x) = Y(x) X(x), the orthogonal projection of R^m onto (ker X(x))^perp.
  std::function<Mat(const Vec&)> noise_projector;
  /// Curvature map R(u1, u2) on I(X)_x as an N x N ambient matrix.
  std::function<Mat(const Vec&, const Vec&, const Vec&)> curvature;
  /// Ric#(u) in I(X)_x.
  std::function<Vec(const Vec&, const Vec&)> ricci;

  const EmbeddedManifold& space() const { return *manifold; }
  int ambient_dim() const { return manifold->ambient_dim(); }
  Mat coefficient_at(const Vec& x) const { return coefficient(x); }
  Vec drift_at(const Vec& x) const { return drift.value ? drift(x) : zeros(ambient_dim()); }

  /// Jacobian of x -> X(x) a; closed form when registered, else central
  /// differences along tangent directions.
  Mat contracted_jacobian(const Vec& x, const Vec& a, const DiffConfig& cfg = {}) const;
  /// Jacobian of the drift restricted to tangent directions.
  Mat drift_jacobian(const Vec& x, const DiffConfig& cfg = {}) const;
};

/// Image subbundle data at one point.
struct SubbundlePoint {
  Vec point;
  int rank = 0;
  /// Columns e_1..e_r: orthonormal basis of I(X)_x for the induced metric.
  Mat basis;
  /// Y(x) as an m x N matrix (Moore-Penrose pseudoinverse of X(x)).
  Mat adjoint;
  /// e(x) = Y(x) X(x), m x m.
  Mat projector;
  /// Singular values of X(x), descending.
  Vec singular_values;
};

struct RankConfig {
  /// Singular values below threshold * sigma_max are treated as zero.
  double threshold = 1e-8;
  /// Retained singular values must exceed gap * threshold * sigma_max;
  /// anything between the two bands is ambiguous.
  double gap = 1e3;
};

/// SVD of X(x); throws RankDegeneracyError when the rank cannot be decided.
SubbundlePoint image_subbundle(const DiffusionSystem& sys, const Vec& x, const RankConfig& cfg = {});

/// Y(x): I(X)_x -> R^m, stored as an m x N ambient matrix.
Mat adjoint_Y(const DiffusionSystem& sys, const Vec& x, const RankConfig& cfg = {});

/// e(x) = Y(x) X(x); closed form when the system registers one.
Mat noise_projector(const DiffusionSystem& sys, const Vec& x);

/// Induced metric <a, b>_x = <Y a, Y b> on I(X)_x.
double induced_metric(const DiffusionSystem& sys, const Vec& x, const Vec& a, const Vec& b);

/// Samples `count` quasi-random points and returns the common rank of X.
/// Throws RankDegeneracyError if the rank varies.
int check_constant_rank(const DiffusionSystem& sys, int count = 1000, const RankConfig& cfg = {});

/// True when the ambient metric restricted to I(X) equals the induced
/// metric at sampled points, i.e. the ambient metric extends it.
bool ambient_metric_extends(const DiffusionSystem& sys, int count = 64, double tol = 1e-9);

/// True when A(y) lies in I(X)_y at sampled points.
bool drift_in_image(const DiffusionSystem& sys, int count = 64, double tol = 1e-8);

/// True when a -> X(.) a is injective as a map into vector fields.
bool coefficient_injective(const DiffusionSystem& sys, int count = 16);

/// Evaluator for Y, the LeJan-Watanabe connection, its adjoint
/// semi-connection, and the curvature and Ricci contraction of the former.
///
/// Immutable after construction; safe for concurrent use.
class ConnectionOracle {
 public:
  struct Options {
    DiffConfig diff{};
    RankConfig rank{};
    /// Use registered closed forms for curvature and Ricci when present.
    bool prefer_closed_form = true;
    /// Residual above which a field is rejected as a non-section of I(X).
    double section_tol = 1e-6;
  };

  explicit ConnectionOracle(std::shared_ptr<const DiffusionSystem> sys);
  ConnectionOracle(std::shared_ptr<const DiffusionSystem> sys, Options opts);

  const DiffusionSystem& system() const { return *sys_; }
  const Options& options() const { return opts_; }

  SubbundlePoint subbundle(const Vec& x) const { return image_subbundle(*sys_, x, opts_.rank); }

  /// X(x) d(Y Z)(x) v for a section Z of I(X).
  Vec ljw_derivative(const VectorField& z, const Vec& x, const Vec& v) const;

  /// Adjoint semi-connection: LJW derivative of Z2 along Z1(x) minus [Z1, Z2](x).
  Vec adjoint_semi_derivative(const VectorField& z1, const VectorField& z2, const Vec& x) const;

  /// Curvature of the LJW connection as an N x N matrix acting on I(X)_x.
  /// Exactly antisymmetric in (u1, u2).
  Mat curvature(const Vec& x, const Vec& u1, const Vec& u2) const;

  /// Ric#(u) = sum_{i,j} <R(e_i, u) e_j, e_i>_x e_j.
  Vec ricci_sharp(const Vec& x, const Vec& u) const;

  /// Difference between the LJW and Levi-Civita derivatives of the section
  /// Z(y) = X(y) Y(x) z along v; tensorial in (v, z).
  Vec connection_difference(const Vec& x, const Vec& v, const Vec& z) const;

  /// Numerical curvature route, ignoring registered closed forms.
  Mat numerical_curvature(const Vec& x, const Vec& u1, const Vec& u2) const;
  Vec numerical_ricci(const Vec& x, const Vec& u) const;

 private:
  /// Directional derivatives of e(.) along an orthonormal tangent frame at x.
  std::vector<Mat> projector_derivatives(const Vec& x, const Mat& frame) const;

  std::shared_ptr<const DiffusionSystem> sys_;
  Options opts_;
};

}  // namespace ljw
