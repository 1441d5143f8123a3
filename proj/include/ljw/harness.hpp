#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ljw/connection.hpp"
#include "ljw/flow.hpp"
#include "ljw/stats.hpp"

namespace ljw {

/// F(sigma) = f(sigma_1(t_1), ..., sigma_q(t_p)) for paths sigma_j started at
/// q base points. Arguments are laid out as args[i * q + j] = sigma_j(t_i).
///
/// dF along a path-indexed vector field V is sum <grad_{i,j} f, V_{t_i}(x_j)>,
/// with `gradient` returning ambient gradients in the same layout.
struct CylindricalFunctional {
  std::string name;
  std::vector<double> times;
  int points = 1;
  std::function<double(std::span<const Vec>)> value;
  std::function<std::vector<Vec>(std::span<const Vec>)> gradient;

  std::size_t arity() const { return times.size() * static_cast<std::size_t>(points); }
  double operator()(std::span<const Vec> args) const { return value(args); }
  /// dF(V) for tangent directions laid out like the arguments.
  double derivative(std::span<const Vec> args, std::span<const Vec> directions) const;
};

/// Largest discrepancy between the gradient oracle and central differences
/// of f along tangent directions at `args`.
double gradient_check(const EmbeddedManifold& m, const CylindricalFunctional& f,
                      std::span<const Vec> args);

/// Monte Carlo configuration. Sample i uses the noise stream (seed, i).
struct McConfig {
  TimeGrid grid{};
  std::size_t paths = 100000;
  std::uint64_t seed = 42;
  int workers = 1;
  /// Keep per-sample pairs in the result (for CSV dumps).
  bool keep_samples = false;
};

struct HarnessResult {
  EstimatorResult estimate;
  std::vector<SamplePair> samples;
};

/// Path-space integration by parts: E dF(D int D^{-1} X kdot ds) against E F sum <kdot, dB>.
HarnessResult estimate_eq4(const DiffusionSystem& sys, const Vec& x0, const CylindricalFunctional& f,
                           const CameronMartinPath& k, const McConfig& cfg);

/// Filtered identity: the filtered flow W replaces D on the left; the right
/// integrates kdot against the antidevelopment increments e(x) dB.
HarnessResult estimate_eq9(const ConnectionOracle& oracle, const Vec& x0,
                           const CylindricalFunctional& f, const CameronMartinPath& k,
                           const McConfig& cfg, FilterVariant variant = FilterVariant::LeviCivita);

/// The filtered identity for several functionals on shared paths; result n
/// is bit-identical to the single-functional estimate of fs[n].
std::vector<HarnessResult> estimate_eq9(const ConnectionOracle& oracle, const Vec& x0,
                                        std::span<const CylindricalFunctional> fs,
                                        const CameronMartinPath& k, const McConfig& cfg,
                                        FilterVariant variant = FilterVariant::LeviCivita);

/// Identity on the path space of the diffeomorphism group, tested on
/// multi-point cylindrical functionals: one noise realisation drives the
/// flow from every base point. Requires a -> X(.) a injective.
HarnessResult estimate_eq5_multipoint(const DiffusionSystem& sys, std::span<const Vec> points,
                                      const CylindricalFunctional& f, const CameronMartinPath& k,
                                      const McConfig& cfg);

/// Paired estimate of E F(xi^tau) against E F(xi) * girsanov_weight(tau).
HarnessResult girsanov_reweight_check(const DiffusionSystem& sys, const Vec& x0,
                                      const CylindricalFunctional& f, const CameronMartinPath& k,
                                      double tau, const McConfig& cfg);

struct TauDerivativeResult {
  /// Central difference at tau_step against the unfiltered left side.
  HarnessResult full;
  /// Same at tau_step / 2.
  HarnessResult half;
  /// Richardson estimate |D(tau) - D(tau/2)| * 4/3 of the O(tau^2) bias.
  double bias_bound = 0.0;
  /// bias(tau) / bias(tau/2); about 4 for smooth problems.
  double richardson_ratio = 0.0;
};

/// (F(xi^{+tau}) - F(xi^{-tau})) / (2 tau) with common noise, compared with
/// the unfiltered left side per sample.
TauDerivativeResult tau_derivative_check(const DiffusionSystem& sys, const Vec& x0,
                                         const CylindricalFunctional& f,
                                         const CameronMartinPath& k, double tau_step,
                                         const McConfig& cfg);

/// Paired estimate of E[g(x_t) <D_t v0, u(x_t)>] against E[g(x_t) <W_t v0, u(x_t)>].
HarnessResult conditional_flow_check(const ConnectionOracle& oracle, const Vec& x0, const Vec& v0,
                                     const std::function<double(const Vec&)>& g,
                                     const VectorField& u, double t, const McConfig& cfg,
                                     FilterVariant variant = FilterVariant::LeviCivita);

/// Unfiltered left side against the filtered left side, per sample.
HarnessResult filtering_consistency(const ConnectionOracle& oracle, const Vec& x0,
                                   const CylindricalFunctional& f, const CameronMartinPath& k,
                                   const McConfig& cfg,
                                   FilterVariant variant = FilterVariant::LeviCivita);

/// Per-sample unfiltered pair for sample index i (exposed for tests).
SamplePair eq4_sample(const DiffusionSystem& sys, const Vec& x0, const CylindricalFunctional& f,
                      const CameronMartinPath& k, const McConfig& cfg, std::uint64_t index);

/// Per-sample filtered pair for sample index i (exposed for tests).
SamplePair eq9_sample(const ConnectionOracle& oracle, const Vec& x0, const CylindricalFunctional& f,
                      const CameronMartinPath& k, const McConfig& cfg, std::uint64_t index,
                      FilterVariant variant = FilterVariant::LeviCivita);

}  // namespace ljw
