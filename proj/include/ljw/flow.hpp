#pragma once

#include <span>
#include <vector>

#include "ljw/connection.hpp"
#include "ljw/noise.hpp"

namespace ljw {

struct FlowOptions {
  /// Integrate the derivative flow alongside the points.
  bool derivative = true;
  /// Also store the inverse derivative flow (requires `derivative`).
  bool inverse = true;
};

/// One discretised realisation of the flow started at points.front().
///
/// derivative[k] is T_{x0} xi_{t_k} stored as an N x N ambient matrix that
/// maps T_{x0}M into T_{x_k}M and annihilates normals at x0;
/// inverse_derivative[k] maps back and annihilates normals at x_k.
struct FlowPath {
  TimeGrid grid;
  std::vector<Vec> points;
  std::vector<Mat> derivative;
  std::vector<Mat> inverse_derivative;
  /// Identifies the consumed DrivingNoise.
  std::uint64_t noise_seed = 0;
  std::uint64_t noise_index = 0;

  const Vec& start() const { return points.front(); }
  bool has_derivative() const { return !derivative.empty(); }
};

/// Point and derivative of the flow after a number of steps.
struct FlowState {
  Vec point;
  Mat derivative;
};

/// Stratonovich Heun predictor-corrector with retraction; the derivative
/// flow is the exact Jacobian of the same discrete map.
FlowPath integrate_flow(const DiffusionSystem& sys, const Vec& x0, const DrivingNoise& noise,
                        const FlowOptions& opts = {});

/// xi_{t_steps}(x0) and its derivative, re-integrated from x0.
FlowState flow_state(const DiffusionSystem& sys, const Vec& x0, const DrivingNoise& noise, int steps);

/// Flow driven by B + tau k.
FlowPath shifted_flow(const DiffusionSystem& sys, const Vec& x0, const DrivingNoise& noise,
                      const CameronMartinPath& k, double tau, const FlowOptions& opts = {});

enum class PerturbationMode {
  /// xi_t evaluated at the perturbed points by re-integration with the same
  /// noise (exact composition semantics, O(L^2) per path).
  Reference,
  /// First order in tau: H_t = retract(x, tau * int_0^t D_s^{-1} X(x_s) kdot_s ds).
  Linearized,
};

/// Solution H^tau of dH/dt = tau (T_H xi_t)^{-1} X(xi_t(H)) kdot_t, H_0 = x0,
/// on the grid of `noise`.
std::vector<Vec> perturbation_ode(const DiffusionSystem& sys, const Vec& x0,
                                  const DrivingNoise& noise, const CameronMartinPath& k, double tau,
                                  PerturbationMode mode = PerturbationMode::Reference);

/// sup_k dist(xi_{t_k}(H^tau_{t_k}(x0)), shifted-flow point at t_k).
double compose_check(const DiffusionSystem& sys, const Vec& x0, const DrivingNoise& noise,
                     const CameronMartinPath& k, double tau);

/// exp(tau sum <kdot_k, dB_k> - tau^2 |k|_H^2 / 2).
double girsanov_weight(const DrivingNoise& noise, const CameronMartinPath& k, double tau);

/// sum_k <kdot_k, dB_k>.
double stochastic_integral(const DrivingNoise& noise, const CameronMartinPath& k);

/// Martingale increments e(x_k) dB_k of the antidevelopment.
std::vector<Vec> antidevelopment_increments(const DiffusionSystem& sys, const FlowPath& path,
                                            const DrivingNoise& noise);

enum class FilterVariant {
  /// Adjoint semi-connection form: D^ v/dt = -1/2 Ric#(v) + LJW-grad A(v).
  SemiConnection,
  /// Levi-Civita form driven by grad X(v)(e o dB) + grad A(v) dt - 1/2 Ric#(v) dt.
  LeviCivita,
};

/// Filtered derivative flow W_k: T_{x0}M -> T_{x_k}M along a path.
struct FilteredFlow {
  FilterVariant variant = FilterVariant::LeviCivita;
  std::vector<Mat> maps;
  std::vector<Mat> inverses;
};

struct FilterOptions {
  bool inverse = true;
  /// Columns carried instead of the full map P(x0) (tangent at x0). The
  /// maps then hold W_k applied to these columns; inverses need the default.
  Mat initial;
  /// Run the sampled precondition checks (drift in I(X) for the
  /// semi-connection form, ambient metric extending the induced one).
  bool validate = true;
};

/// Throws PreconditionError / UnsupportedOperation when `variant` does not
/// apply to the system.
void validate_filter(const DiffusionSystem& sys, FilterVariant variant);

/// Integrates the filtered flow from the path points and the
/// antidevelopment increments only; raw noise is never seen.
FilteredFlow filtered_derivative_flow(const ConnectionOracle& oracle, std::span<const Vec> points,
                                      std::span<const Vec> increments, double dt,
                                      FilterVariant variant, const FilterOptions& opts = {});

inline FilteredFlow filtered_derivative_flow(const ConnectionOracle& oracle, const FlowPath& path,
                                             std::span<const Vec> increments, FilterVariant variant,
                                             const FilterOptions& opts = {}) {
  return filtered_derivative_flow(oracle, path.points, increments, path.grid.dt(), variant, opts);
}

}  // namespace ljw
