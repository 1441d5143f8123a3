#pragma once

#include "ljw/geometry.hpp"

namespace ljw {

/// Unit sphere S^{N-1} in R^N; retraction is normalisation.
class UnitSphere final : public EmbeddedManifold {
 public:
  explicit UnitSphere(int ambient_dim = 3);

  int ambient_dim() const override { return dim_; }
  int intrinsic_dim() const override { return dim_ - 1; }
  std::string name() const override;
  Mat projector(const Vec& x) const override;
  Vec closest_point(const Vec& z) const override;
  Mat closest_point_jacobian(const Vec& z) const override;
  double membership_residual(const Vec& x) const override;
  double retraction_radius() const override { return 0.5; }
  Mat tangent_frame(const Vec& x) const override;
  Vec sample_point(std::span<const double> unit) const override;

 private:
  int dim_;
};

/// Flat torus (R / 2 pi Z)^n in periodic coordinates, embedded trivially:
/// P = identity and the retraction wraps each coordinate into [0, 2 pi).
class FlatTorus final : public EmbeddedManifold {
 public:
  explicit FlatTorus(int dim);

  int ambient_dim() const override { return dim_; }
  int intrinsic_dim() const override { return dim_; }
  std::string name() const override;
  Mat projector(const Vec& x) const override;
  Vec closest_point(const Vec& z) const override;
  Mat closest_point_jacobian(const Vec& z) const override;
  double membership_residual(const Vec& x) const override;
  Vec displacement(const Vec& from, const Vec& to) const override;
  double retraction_radius() const override { return 1.0; }
  Mat tangent_frame(const Vec& x) const override;
  Vec sample_point(std::span<const double> unit) const override;

 private:
  int dim_;
};

}  // namespace ljw
