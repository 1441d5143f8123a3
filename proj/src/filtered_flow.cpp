#include <cmath>
#include <stdexcept>

#include "ljw/errors.hpp"
#include "ljw/flow.hpp"

namespace ljw {

namespace {

Mat apply_columns(const Mat& w, const auto& fn) {
  Mat out(w.rows(), w.cols());
  for (int c = 0; c < w.cols(); ++c) out.col(c) = fn(Vec(w.col(c)));
  return out;
}

// Covariant slope of the Levi-Civita form over one step:
// grad X(v)(a) + dt grad A(v) - dt/2 Ric#(v), for each column v of w.
Mat levi_civita_slope(const ConnectionOracle& oracle, const Vec& x, const Mat& w, const Vec& a,
                      double dt) {
  const DiffusionSystem& sys = oracle.system();
  const Mat p = sys.space().projector(x);
  const Mat jac = sys.contracted_jacobian(x, a) + dt * sys.drift_jacobian(x);
  Mat s = p * (jac * w);
  s -= (0.5 * dt) * apply_columns(w, [&](const Vec& v) { return oracle.ricci_sharp(x, v); });
  return s;
}

// Slope of the adjoint semi-connection form, rewritten with the Levi-Civita
// derivative: D v = -G(v, X a) - dt G(v, A) + dt LJW-grad_v A - dt/2 Ric#(v),
// where G(v, z) is the LJW minus Levi-Civita derivative of the section
// extending z.
Mat semi_connection_slope(const ConnectionOracle& oracle, const Vec& x, const Mat& w, const Vec& a,
                          double dt) {
  const DiffusionSystem& sys = oracle.system();
  const Vec noise_dir = sys.coefficient(x) * a;
  const bool has_drift = static_cast<bool>(sys.drift.value);
  const Vec drift = sys.drift_at(x);
  return apply_columns(w, [&](const Vec& v) -> Vec {
    Vec s = -oracle.connection_difference(x, v, noise_dir);
    if (has_drift) {
      s -= dt * oracle.connection_difference(x, v, drift);
      s += dt * oracle.ljw_derivative(sys.drift, x, v);
    }
    s -= (0.5 * dt) * oracle.ricci_sharp(x, v);
    return s;
  });
}

}  // namespace

void validate_filter(const DiffusionSystem& sys, FilterVariant variant) {
  if (!ambient_metric_extends(sys)) {
    throw UnsupportedOperation(
        "filtered_derivative_flow: ambient metric does not extend the induced metric on I(X)");
  }
  if (variant == FilterVariant::SemiConnection && !drift_in_image(sys)) {
    throw PreconditionError(
        "filtered_derivative_flow: semi-connection form requires the drift to lie in I(X)");
  }
}

FilteredFlow filtered_derivative_flow(const ConnectionOracle& oracle, std::span<const Vec> points,
                                      std::span<const Vec> increments, double dt,
                                      FilterVariant variant, const FilterOptions& opts) {
  const DiffusionSystem& sys = oracle.system();
  const EmbeddedManifold& m = sys.space();
  if (points.size() != increments.size() + 1) {
    throw GridError("filtered_derivative_flow: need one increment per step");
  }
  if (opts.validate) validate_filter(sys, variant);

  auto slope = [&](const Vec& x, const Mat& w, const Vec& a) {
    return variant == FilterVariant::LeviCivita ? levi_civita_slope(oracle, x, w, a, dt)
                                                : semi_connection_slope(oracle, x, w, a, dt);
  };

  FilteredFlow out;
  out.variant = variant;
  out.maps.reserve(points.size());
  const Vec& x0 = points.front();
  if (opts.initial.size() > 0 && opts.inverse) {
    throw std::invalid_argument("filtered_derivative_flow: inverses need the full initial map");
  }
  Mat w = opts.initial.size() > 0 ? opts.initial : m.projector(x0);
  out.maps.push_back(w);
  const Mat frame0 = m.tangent_frame(x0);
  if (opts.inverse) {
    out.inverses.reserve(points.size());
    out.inverses.push_back(w);
  }
  Mat frame = frame0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const Vec& x = points[k];
    const Vec& x1 = points[k + 1];
    const Vec& a = increments[k];
    Mat frame1 = m.tangent_frame(x1);
    const Mat transport = transport_map(m, x1, frame, frame1);
    const Mat s0 = slope(x, w, a);
    const Mat w_pred = transport * (w + s0);
    const Vec a1 = noise_projector(sys, x1) * a;
    const Mat s1 = slope(x1, w_pred, a1);
    // The corrector slope lives at x1; project it back to T_xM before
    // averaging, then carry the update across with the isometric transport.
    w = transport * (w + 0.5 * (s0 + m.projector(x) * s1));
    out.maps.push_back(w);
    if (opts.inverse) {
      const Mat core = frame1.transpose() * w * frame0;
      out.inverses.push_back(frame0 * small_inverse(core) * frame1.transpose());
    }
    frame = std::move(frame1);
  }
  return out;
}

}  // namespace ljw
