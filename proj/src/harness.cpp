#include "ljw/harness.hpp"

#include <cmath>

#include "ljw/errors.hpp"
#include "ljw/parallel.hpp"

namespace ljw {

double CylindricalFunctional::derivative(std::span<const Vec> args,
                                         std::span<const Vec> directions) const {
  const std::vector<Vec> grad = gradient(args);
  double d = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) d += grad[i].dot(directions[i]);
  return d;
}

double gradient_check(const EmbeddedManifold& m, const CylindricalFunctional& f,
                      std::span<const Vec> args) {
  const std::vector<Vec> grad = f.gradient(args);
  std::vector<Vec> work(args.begin(), args.end());
  double worst = 0.0;
  for (std::size_t a = 0; a < args.size(); ++a) {
    const Mat frame = m.tangent_frame(args[a]);
    for (int c = 0; c < frame.cols(); ++c) {
      const Vec dir = frame.col(c);
      const double h = DiffConfig{}.step();
      work[a] = m.retract(args[a], h * dir);
      const double fp = f(work);
      work[a] = m.retract(args[a], -h * dir);
      const double fm = f(work);
      work[a] = args[a];
      worst = std::max(worst, std::abs((fp - fm) / (2.0 * h) - grad[a].dot(dir)));
    }
  }
  return worst;
}

namespace {

std::vector<int> grid_indices(const CylindricalFunctional& f, const TimeGrid& grid) {
  std::vector<int> idx;
  idx.reserve(f.times.size());
  for (double t : f.times) idx.push_back(grid.index_of(t));
  return idx;
}

void require_grid(const CameronMartinPath& k, const McConfig& cfg) {
  if (k.grid().steps != cfg.grid.steps || k.grid().horizon != cfg.grid.horizon) {
    throw GridError("Cameron-Martin path and Monte Carlo grid differ");
  }
}

// V_{t_i} = L_{t_i} int_0^{t_i} L_s^{-1} X(x_s) kdot_s ds (trapezoidal in s)
// for a linear flow L with stored inverses, at the requested grid indices.
std::vector<Vec> transported_integrals(const DiffusionSystem& sys, const std::vector<Vec>& points,
                                       const std::vector<Mat>& maps, const std::vector<Mat>& inverses,
                                       const CameronMartinPath& k, const std::vector<int>& indices) {
  const double dt = k.grid().dt();
  int last = 0;
  for (int i : indices) last = std::max(last, i);
  std::vector<Vec> integral(last + 1);
  Vec acc = zeros(sys.ambient_dim());
  integral[0] = acc;
  Mat x_left = last > 0 ? sys.coefficient(points[0]) : Mat();
  for (int j = 0; j < last; ++j) {
    const Vec& rate = k.rate(j);
    Mat x_right = sys.coefficient(points[j + 1]);
    acc += (0.5 * dt) * (inverses[j] * (x_left * rate) + inverses[j + 1] * (x_right * rate));
    integral[j + 1] = acc;
    x_left = std::move(x_right);
  }
  std::vector<Vec> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(maps[i] * integral[i]);
  return out;
}

std::vector<Vec> gather(const std::vector<Vec>& points, const std::vector<int>& indices) {
  std::vector<Vec> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(points[i]);
  return out;
}

HarnessResult finish(std::vector<SamplePair> samples, const McConfig& cfg) {
  HarnessResult r;
  r.estimate = paired_estimate(samples);
  if (cfg.keep_samples) r.samples = std::move(samples);
  return r;
}

// Multi-point kernel shared by the single- and multi-point estimators.
SamplePair multipoint_sample(const DiffusionSystem& sys, std::span<const Vec> base,
                             const CylindricalFunctional& f, const CameronMartinPath& k,
                             const McConfig& cfg, const std::vector<int>& indices,
                             std::uint64_t index) {
  const DrivingNoise noise = sample_noise(cfg.grid, sys.noise_dim, cfg.seed, index);
  const std::size_t q = base.size();
  const std::size_t p = indices.size();
  std::vector<Vec> args(p * q);
  std::vector<Vec> dirs(p * q);
  for (std::size_t j = 0; j < q; ++j) {
    const FlowPath path = integrate_flow(sys, base[j], noise);
    const std::vector<Vec> v =
        transported_integrals(sys, path.points, path.derivative, path.inverse_derivative, k, indices);
    for (std::size_t i = 0; i < p; ++i) {
      args[i * q + j] = path.points[indices[i]];
      dirs[i * q + j] = v[i];
    }
  }
  SamplePair s;
  s.lhs = f.derivative(args, dirs);
  s.rhs = f(args) * stochastic_integral(noise, k);
  return s;
}

}  // namespace

SamplePair eq4_sample(const DiffusionSystem& sys, const Vec& x0, const CylindricalFunctional& f,
                      const CameronMartinPath& k, const McConfig& cfg, std::uint64_t index) {
  return multipoint_sample(sys, std::span<const Vec>(&x0, 1), f, k, cfg, grid_indices(f, cfg.grid),
                           index);
}

HarnessResult estimate_eq5_multipoint(const DiffusionSystem& sys, std::span<const Vec> points,
                                      const CylindricalFunctional& f, const CameronMartinPath& k,
                                      const McConfig& cfg) {
  require_grid(k, cfg);
  if (static_cast<int>(points.size()) != f.points) {
    throw std::invalid_argument("estimate_eq5_multipoint: functional arity does not match base points");
  }
  if (points.size() > 1 && !coefficient_injective(sys)) {
    throw UnsupportedOperation("estimate_eq5_multipoint: a -> X(.)a is not injective for " +
                               sys.scenario_id);
  }
  const std::vector<int> indices = grid_indices(f, cfg.grid);
  auto samples = map_samples<SamplePair>(cfg.paths, cfg.workers, [&](std::size_t i) {
    return multipoint_sample(sys, points, f, k, cfg, indices, i);
  });
  return finish(std::move(samples), cfg);
}

HarnessResult estimate_eq4(const DiffusionSystem& sys, const Vec& x0, const CylindricalFunctional& f,
                           const CameronMartinPath& k, const McConfig& cfg) {
  if (f.points != 1) throw std::invalid_argument("estimate_eq4: functional must be single-point");
  return estimate_eq5_multipoint(sys, std::span<const Vec>(&x0, 1), f, k, cfg);
}

namespace {

struct FilteredSample {
  SamplePair pair;
  double unfiltered_lhs = 0.0;
};

// One path and its filtered flow, shared by every functional in `fs`.
std::vector<FilteredSample> filtered_samples(const ConnectionOracle& oracle, const Vec& x0,
                                             std::span<const CylindricalFunctional> fs,
                                             const CameronMartinPath& k, const McConfig& cfg,
                                             const std::vector<std::vector<int>>& indices,
                                             std::uint64_t index, FilterVariant variant,
                                             bool with_unfiltered) {
  const DiffusionSystem& sys = oracle.system();
  const DrivingNoise noise = sample_noise(cfg.grid, sys.noise_dim, cfg.seed, index);
  const FlowPath path = integrate_flow(sys, x0, noise, FlowOptions{with_unfiltered, with_unfiltered});
  const std::vector<Vec> incr = antidevelopment_increments(sys, path, noise);
  const FilteredFlow w =
      filtered_derivative_flow(oracle, path, incr, variant, FilterOptions{true, Mat(), false});
  double integral = 0.0;
  for (int j = 0; j < cfg.grid.steps; ++j) integral += k.rate(j).dot(incr[j]);
  std::vector<FilteredSample> out(fs.size());
  for (std::size_t n = 0; n < fs.size(); ++n) {
    const CylindricalFunctional& f = fs[n];
    const std::vector<Vec> args = gather(path.points, indices[n]);
    const std::vector<Vec> v = transported_integrals(sys, path.points, w.maps, w.inverses, k, indices[n]);
    FilteredSample& s = out[n];
    s.pair.lhs = f.derivative(args, v);
    s.pair.rhs = f(args) * integral;
    if (with_unfiltered) {
      const std::vector<Vec> d = transported_integrals(sys, path.points, path.derivative,
                                                       path.inverse_derivative, k, indices[n]);
      s.unfiltered_lhs = f.derivative(args, d);
    }
  }
  return out;
}

FilteredSample filtered_sample(const ConnectionOracle& oracle, const Vec& x0,
                               const CylindricalFunctional& f, const CameronMartinPath& k,
                               const McConfig& cfg, const std::vector<int>& indices,
                               std::uint64_t index, FilterVariant variant, bool with_unfiltered) {
  return filtered_samples(oracle, x0, std::span<const CylindricalFunctional>(&f, 1), k, cfg, {indices},
                          index, variant, with_unfiltered)
      .front();
}

}  // namespace

SamplePair eq9_sample(const ConnectionOracle& oracle, const Vec& x0, const CylindricalFunctional& f,
                      const CameronMartinPath& k, const McConfig& cfg, std::uint64_t index,
                      FilterVariant variant) {
  return filtered_sample(oracle, x0, f, k, cfg, grid_indices(f, cfg.grid), index, variant, false).pair;
}

std::vector<HarnessResult> estimate_eq9(const ConnectionOracle& oracle, const Vec& x0,
                                        std::span<const CylindricalFunctional> fs,
                                        const CameronMartinPath& k, const McConfig& cfg,
                                        FilterVariant variant) {
  require_grid(k, cfg);
  std::vector<std::vector<int>> indices;
  for (const auto& f : fs) {
    if (f.points != 1) throw std::invalid_argument("estimate_eq9: functional must be single-point");
    indices.push_back(grid_indices(f, cfg.grid));
  }
  validate_filter(oracle.system(), variant);
  auto per_path = map_samples<std::vector<FilteredSample>>(cfg.paths, cfg.workers, [&](std::size_t i) {
    return filtered_samples(oracle, x0, fs, k, cfg, indices, i, variant, false);
  });
  std::vector<HarnessResult> out;
  for (std::size_t n = 0; n < fs.size(); ++n) {
    std::vector<SamplePair> samples;
    samples.reserve(per_path.size());
    for (const auto& p : per_path) samples.push_back(p[n].pair);
    out.push_back(finish(std::move(samples), cfg));
  }
  return out;
}

HarnessResult estimate_eq9(const ConnectionOracle& oracle, const Vec& x0,
                           const CylindricalFunctional& f, const CameronMartinPath& k,
                           const McConfig& cfg, FilterVariant variant) {
  return std::move(
      estimate_eq9(oracle, x0, std::span<const CylindricalFunctional>(&f, 1), k, cfg, variant).front());
}

HarnessResult filtering_consistency(const ConnectionOracle& oracle, const Vec& x0,
                                   const CylindricalFunctional& f, const CameronMartinPath& k,
                                   const McConfig& cfg, FilterVariant variant) {
  require_grid(k, cfg);
  validate_filter(oracle.system(), variant);
  const std::vector<int> indices = grid_indices(f, cfg.grid);
  auto samples = map_samples<SamplePair>(cfg.paths, cfg.workers, [&](std::size_t i) {
    const FilteredSample s = filtered_sample(oracle, x0, f, k, cfg, indices, i, variant, true);
    return SamplePair{s.unfiltered_lhs, s.pair.lhs};
  });
  return finish(std::move(samples), cfg);
}

HarnessResult girsanov_reweight_check(const DiffusionSystem& sys, const Vec& x0,
                                      const CylindricalFunctional& f, const CameronMartinPath& k,
                                      double tau, const McConfig& cfg) {
  require_grid(k, cfg);
  const std::vector<int> indices = grid_indices(f, cfg.grid);
  const FlowOptions points_only{false, false};
  auto samples = map_samples<SamplePair>(cfg.paths, cfg.workers, [&](std::size_t i) {
    const DrivingNoise noise = sample_noise(cfg.grid, sys.noise_dim, cfg.seed, i);
    const FlowPath base = integrate_flow(sys, x0, noise, points_only);
    const FlowPath shifted = shifted_flow(sys, x0, noise, k, tau, points_only);
    return SamplePair{f(gather(shifted.points, indices)),
                      f(gather(base.points, indices)) * girsanov_weight(noise, k, tau)};
  });
  return finish(std::move(samples), cfg);
}

TauDerivativeResult tau_derivative_check(const DiffusionSystem& sys, const Vec& x0,
                                         const CylindricalFunctional& f,
                                         const CameronMartinPath& k, double tau_step,
                                         const McConfig& cfg) {
  require_grid(k, cfg);
  if (!(tau_step > 0.0)) throw std::invalid_argument("tau_derivative_check: tau_step must be positive");
  const std::vector<int> indices = grid_indices(f, cfg.grid);
  const FlowOptions points_only{false, false};
  struct Row {
    double full = 0.0;
    double half = 0.0;
    double lhs = 0.0;
  };
  auto rows = map_samples<Row>(cfg.paths, cfg.workers, [&](std::size_t i) {
    const DrivingNoise noise = sample_noise(cfg.grid, sys.noise_dim, cfg.seed, i);
    auto central = [&](double tau) {
      const FlowPath plus = shifted_flow(sys, x0, noise, k, tau, points_only);
      const FlowPath minus = shifted_flow(sys, x0, noise, k, -tau, points_only);
      return (f(gather(plus.points, indices)) - f(gather(minus.points, indices))) / (2.0 * tau);
    };
    Row r;
    r.full = central(tau_step);
    r.half = central(0.5 * tau_step);
    r.lhs = multipoint_sample(sys, std::span<const Vec>(&x0, 1), f, k, cfg, indices, i).lhs;
    return r;
  });
  std::vector<SamplePair> full(rows.size()), half(rows.size());
  std::vector<double> gap(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    full[i] = SamplePair{rows[i].full, rows[i].lhs};
    half[i] = SamplePair{rows[i].half, rows[i].lhs};
    gap[i] = rows[i].full - rows[i].half;
  }
  TauDerivativeResult out;
  out.full = finish(std::move(full), cfg);
  out.half = finish(std::move(half), cfg);
  out.bias_bound = std::abs(summarize(gap).mean) * 4.0 / 3.0;
  const double hb = out.half.estimate.paired.mean;
  out.richardson_ratio = hb != 0.0 ? out.full.estimate.paired.mean / hb : 0.0;
  return out;
}

HarnessResult conditional_flow_check(const ConnectionOracle& oracle, const Vec& x0, const Vec& v0,
                                     const std::function<double(const Vec&)>& g,
                                     const VectorField& u, double t, const McConfig& cfg,
                                     FilterVariant variant) {
  const DiffusionSystem& sys = oracle.system();
  validate_filter(sys, variant);
  const int idx = cfg.grid.index_of(t);
  auto samples = map_samples<SamplePair>(cfg.paths, cfg.workers, [&](std::size_t i) {
    if (v0.norm() == 0.0) return SamplePair{};
    const DrivingNoise noise = sample_noise(cfg.grid, sys.noise_dim, cfg.seed, i);
    const FlowPath path = integrate_flow(sys, x0, noise, FlowOptions{true, false});
    const std::vector<Vec> incr = antidevelopment_increments(sys, path, noise);
    FilterOptions fo{false, Mat(v0), false};
    const FilteredFlow w = filtered_derivative_flow(
        oracle, std::span<const Vec>(path.points.data(), idx + 1),
        std::span<const Vec>(incr.data(), idx), cfg.grid.dt(), variant, fo);
    const Vec& xt = path.points[idx];
    const double weight = g(xt);
    const Vec ut = u(xt);
    return SamplePair{weight * (path.derivative[idx] * v0).dot(ut),
                      weight * Vec(w.maps[idx].col(0)).dot(ut)};
  });
  return finish(std::move(samples), cfg);
}

}  // namespace ljw
