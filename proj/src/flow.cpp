#include "ljw/flow.hpp"

#include <cmath>

#include "ljw/errors.hpp"

namespace ljw {

namespace {

struct Step {
  Vec next;
  Mat jacobian;
};

// Stratonovich Heun step x -> x' with retraction, and optionally the
// Jacobian of that map (the discrete variational equation).
Step heun_step(const DiffusionSystem& sys, const Vec& x, const Vec& db, double h, bool with_jacobian) {
  const EmbeddedManifold& m = sys.space();
  const bool drifted = static_cast<bool>(sys.drift.value);
  const Mat xx = sys.coefficient(x);
  Vec move = xx * db;
  Vec ax;
  if (drifted) {
    ax = sys.drift(x);
    move += h * ax;
  }
  if (move.norm() > m.retraction_radius()) {
    throw StepSizeError("integrate_flow: predictor step leaves the retraction domain");
  }
  const Vec zp = x + move;
  const Vec y = m.closest_point(zp);
  const Mat xy = sys.coefficient(y);
  Vec z = x + 0.5 * ((xx + xy) * db);
  if (drifted) z += (0.5 * h) * (ax + sys.drift(y));
  Step out{m.closest_point(z), Mat()};
  if (!with_jacobian) return out;

  const int n = sys.ambient_dim();
  const Mat eye = identity(n);
  const Mat jgx = sys.contracted_jacobian(x, db);
  const Mat jgy = sys.contracted_jacobian(y, db);
  Mat dz;
  if (drifted) {
    const Mat jax = sys.drift_jacobian(x);
    const Mat dy = m.closest_point_jacobian(zp) * (eye + jgx + h * jax);
    dz = eye + 0.5 * (jgx + jgy * dy) + (0.5 * h) * (jax + sys.drift_jacobian(y) * dy);
  } else {
    const Mat dy = m.closest_point_jacobian(zp) * (eye + jgx);
    dz = eye + 0.5 * (jgx + jgy * dy);
  }
  out.jacobian = m.closest_point_jacobian(z) * dz;
  return out;
}

void require_on_manifold(const DiffusionSystem& sys, const Vec& x0) {
  if (!sys.space().contains(x0)) throw DomainError("flow: start point is not on the manifold");
}

// xi_t(H_t) and H_t for the perturbation ODE in reference mode.
struct Perturbed {
  std::vector<Vec> h_points;
  std::vector<Vec> composed;
};

Perturbed perturbation_reference(const DiffusionSystem& sys, const Vec& x0, const DrivingNoise& noise,
                                 const CameronMartinPath& k, double tau) {
  const EmbeddedManifold& m = sys.space();
  const double dt = noise.grid.dt();
  const int steps = noise.grid.steps;
  Perturbed out;
  out.h_points.reserve(steps + 1);
  out.composed.reserve(steps + 1);
  out.h_points.push_back(x0);
  out.composed.push_back(x0);

  // Right-hand side at (H, t_j) with the rate of step `rate_step`.
  auto rhs = [&](const Vec& h_point, int j, int rate_step, Vec* composed) -> Vec {
    const FlowState st = flow_state(sys, h_point, noise, j);
    if (composed) *composed = st.point;
    const Mat inv = tangent_inverse(m, h_point, st.point, st.derivative);
    return tau * (inv * (sys.coefficient(st.point) * k.rate(rate_step)));
  };

  Vec h = x0;
  for (int j = 0; j < steps; ++j) {
    if (std::abs(tau) * k.rate(j).norm() * dt > 0.25 * m.retraction_radius()) {
      throw StepSizeError("perturbation_ode: tau * |kdot| * dt too large");
    }
    const Vec f0 = rhs(h, j, j, nullptr);
    const Vec h_pred = m.retract(h, dt * f0);
    Vec composed_pred;
    const Vec f1 = rhs(h_pred, j + 1, j, &composed_pred);
    h = m.retract(h, 0.5 * dt * (f0 + m.projector(h) * f1));
    out.h_points.push_back(h);
    out.composed.push_back(flow_state(sys, h, noise, j + 1).point);
  }
  return out;
}

}  // namespace

FlowPath integrate_flow(const DiffusionSystem& sys, const Vec& x0, const DrivingNoise& noise,
                        const FlowOptions& opts) {
  require_on_manifold(sys, x0);
  if (noise.dim != sys.noise_dim) throw std::invalid_argument("integrate_flow: noise dimension mismatch");
  const EmbeddedManifold& m = sys.space();
  const int steps = noise.grid.steps;
  const double h = noise.grid.dt();
  FlowPath path;
  path.grid = noise.grid;
  path.noise_seed = noise.seed;
  path.noise_index = noise.index;
  path.points.reserve(steps + 1);
  path.points.push_back(x0);
  const bool with_inverse = opts.derivative && opts.inverse;
  if (opts.derivative) {
    path.derivative.reserve(steps + 1);
    path.derivative.push_back(m.projector(x0));
  }
  Mat frame0;
  if (with_inverse) {
    frame0 = m.tangent_frame(x0);
    path.inverse_derivative.reserve(steps + 1);
    path.inverse_derivative.push_back(m.projector(x0));
  }
  Vec x = x0;
  for (int k = 0; k < steps; ++k) {
    Step s = heun_step(sys, x, noise.increments[k], h, opts.derivative);
    x = std::move(s.next);
    path.points.push_back(x);
    if (opts.derivative) {
      path.derivative.push_back(s.jacobian * path.derivative.back());
      if (with_inverse) {
        const Mat frame = m.tangent_frame(x);
        const Mat core = frame.transpose() * path.derivative.back() * frame0;
        path.inverse_derivative.push_back(frame0 * small_inverse(core) * frame.transpose());
      }
    }
  }
  return path;
}

FlowState flow_state(const DiffusionSystem& sys, const Vec& x0, const DrivingNoise& noise, int steps) {
  require_on_manifold(sys, x0);
  const double h = noise.grid.dt();
  FlowState st{x0, sys.space().projector(x0)};
  for (int k = 0; k < steps; ++k) {
    Step s = heun_step(sys, st.point, noise.increments[k], h, true);
    st.point = std::move(s.next);
    st.derivative = s.jacobian * st.derivative;
  }
  return st;
}

FlowPath shifted_flow(const DiffusionSystem& sys, const Vec& x0, const DrivingNoise& noise,
                      const CameronMartinPath& k, double tau, const FlowOptions& opts) {
  return integrate_flow(sys, x0, shifted_noise(noise, k, tau), opts);
}

std::vector<Vec> perturbation_ode(const DiffusionSystem& sys, const Vec& x0,
                                  const DrivingNoise& noise, const CameronMartinPath& k, double tau,
                                  PerturbationMode mode) {
  require_on_manifold(sys, x0);
  if (k.grid().steps != noise.grid.steps) throw GridError("perturbation_ode: grids differ");
  const int steps = noise.grid.steps;
  if (tau == 0.0) return std::vector<Vec>(steps + 1, x0);
  if (mode == PerturbationMode::Reference) {
    return perturbation_reference(sys, x0, noise, k, tau).h_points;
  }
  const EmbeddedManifold& m = sys.space();
  const FlowPath path = integrate_flow(sys, x0, noise);
  const double dt = noise.grid.dt();
  std::vector<Vec> out;
  out.reserve(steps + 1);
  out.push_back(x0);
  Vec integral = zeros(sys.ambient_dim());
  for (int j = 0; j < steps; ++j) {
    const Vec left = path.inverse_derivative[j] * (sys.coefficient(path.points[j]) * k.rate(j));
    const Vec right =
        path.inverse_derivative[j + 1] * (sys.coefficient(path.points[j + 1]) * k.rate(j));
    integral += 0.5 * dt * (left + right);
    out.push_back(m.retract(x0, tau * integral));
  }
  return out;
}

double compose_check(const DiffusionSystem& sys, const Vec& x0, const DrivingNoise& noise,
                     const CameronMartinPath& k, double tau) {
  if (tau == 0.0) return 0.0;
  const Perturbed p = perturbation_reference(sys, x0, noise, k, tau);
  const FlowPath shifted = shifted_flow(sys, x0, noise, k, tau, FlowOptions{false, false});
  double sup = 0.0;
  for (std::size_t j = 0; j < p.composed.size(); ++j) {
    sup = std::max(sup, sys.space().distance(p.composed[j], shifted.points[j]));
  }
  return sup;
}

double stochastic_integral(const DrivingNoise& noise, const CameronMartinPath& k) {
  if (k.grid().steps != noise.grid.steps) throw GridError("stochastic_integral: grids differ");
  double s = 0.0;
  for (int j = 0; j < noise.grid.steps; ++j) s += k.rate(j).dot(noise.increments[j]);
  return s;
}

double girsanov_weight(const DrivingNoise& noise, const CameronMartinPath& k, double tau) {
  if (tau == 0.0) return 1.0;
  return std::exp(tau * stochastic_integral(noise, k) - 0.5 * tau * tau * k.energy());
}

std::vector<Vec> antidevelopment_increments(const DiffusionSystem& sys, const FlowPath& path,
                                            const DrivingNoise& noise) {
  std::vector<Vec> out;
  out.reserve(noise.grid.steps);
  for (int j = 0; j < noise.grid.steps; ++j) {
    out.push_back(noise_projector(sys, path.points[j]) * noise.increments[j]);
  }
  return out;
}

}  // namespace ljw
