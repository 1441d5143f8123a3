#include "ljw/scenarios.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "ljw/errors.hpp"
#include "ljw/manifolds.hpp"

namespace ljw {

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// --- sphere systems -------------------------------------------------------

Mat sphere_projector(const Vec& x) {
  Mat p = identity(3);
  p.noalias() -= x * x.transpose();
  return p;
}

// Jacobian of x -> a - <a, x> x.
Mat sphere_field_jacobian(const Vec& x, const Vec& a) {
  Mat j = -(x * a.transpose());
  j.diagonal().array() -= a.dot(x);
  return j;
}

std::shared_ptr<DiffusionSystem> sphere_gradient_system(std::string id) {
  auto sys = std::make_shared<DiffusionSystem>();
  sys->scenario_id = std::move(id);
  sys->manifold = std::make_shared<UnitSphere>(3);
  sys->noise_dim = 3;
  sys->coefficient = sphere_projector;
  sys->coefficient_jacobian = sphere_field_jacobian;
  sys->noise_projector = sphere_projector;
  sys->curvature = [](const Vec& x, const Vec& u1, const Vec& u2) -> Mat {
    const Mat p = sphere_projector(x);
    const Vec a = p * u1;
    const Vec b = p * u2;
    // R(u1, u2) w = <u2, w> u1 - <u1, w> u2 on the unit sphere.
    return a * b.transpose() - b * a.transpose();
  };
  sys->ricci = [](const Vec& x, const Vec& u) -> Vec { return sphere_projector(x) * u; };
  return sys;
}

// --- flat tori -----------------------------------------------------------

std::shared_ptr<DiffusionSystem> flat_system(std::string id, int dim, Mat coefficient,
                                             std::optional<Vec> drift) {
  auto sys = std::make_shared<DiffusionSystem>();
  sys->scenario_id = std::move(id);
  sys->manifold = std::make_shared<FlatTorus>(dim);
  sys->noise_dim = static_cast<int>(coefficient.cols());
  sys->coefficient = [coefficient](const Vec&) { return coefficient; };
  sys->coefficient_jacobian = [dim](const Vec&, const Vec&) -> Mat { return Mat::Zero(dim, dim); };
  const int m = sys->noise_dim;
  Eigen::JacobiSVD<Mat> svd(coefficient, Eigen::ComputeFullV);
  Mat e = Mat::Zero(m, m);
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] > 1e-12) e += svd.matrixV().col(i) * svd.matrixV().col(i).transpose();
  }
  sys->noise_projector = [e](const Vec&) { return e; };
  sys->curvature = [dim](const Vec&, const Vec&, const Vec&) -> Mat { return Mat::Zero(dim, dim); };
  sys->ricci = [dim](const Vec&, const Vec&) -> Vec { return zeros(dim); };
  if (drift) {
    const Vec a = *drift;
    sys->drift.value = [a](const Vec&) { return a; };
    sys->drift.jacobian = [dim](const Vec&) -> Mat { return Mat::Zero(dim, dim); };
  }
  return sys;
}

// --- functionals ---------------------------------------------------------

CylindricalFunctional sin_of_linear(std::string name, double t, Vec a) {
  CylindricalFunctional f;
  f.name = std::move(name);
  f.times = {t};
  f.value = [a](std::span<const Vec> x) { return std::sin(a.dot(x[0])); };
  f.gradient = [a](std::span<const Vec> x) {
    return std::vector<Vec>{std::cos(a.dot(x[0])) * a};
  };
  return f;
}

CylindricalFunctional linear(std::string name, double t, Vec a) {
  CylindricalFunctional f;
  f.name = std::move(name);
  f.times = {t};
  f.value = [a](std::span<const Vec> x) { return a.dot(x[0]); };
  f.gradient = [a](std::span<const Vec>) { return std::vector<Vec>{a}; };
  return f;
}

// <a, x(t1)> * <b, x(t2)>
CylindricalFunctional bilinear(std::string name, double t1, double t2, Vec a, Vec b) {
  CylindricalFunctional f;
  f.name = std::move(name);
  f.times = {t1, t2};
  f.value = [a, b](std::span<const Vec> x) { return a.dot(x[0]) * b.dot(x[1]); };
  f.gradient = [a, b](std::span<const Vec> x) {
    return std::vector<Vec>{b.dot(x[1]) * a, a.dot(x[0]) * b};
  };
  return f;
}

// cos(<a, x(t1)>) * sin(<b, x(t2)>)
CylindricalFunctional cos_sin(std::string name, double t1, double t2, Vec a, Vec b) {
  CylindricalFunctional f;
  f.name = std::move(name);
  f.times = {t1, t2};
  f.value = [a, b](std::span<const Vec> x) { return std::cos(a.dot(x[0])) * std::sin(b.dot(x[1])); };
  f.gradient = [a, b](std::span<const Vec> x) {
    const double ca = std::cos(a.dot(x[0]));
    const double sa = std::sin(a.dot(x[0]));
    const double cb = std::cos(b.dot(x[1]));
    const double sb = std::sin(b.dot(x[1]));
    return std::vector<Vec>{-sa * sb * a, ca * cb * b};
  };
  return f;
}

// Two base points at time t: <x_1(t), x_2(t)>.
CylindricalFunctional inner_product_two_point(double t) {
  CylindricalFunctional f;
  f.name = "inner-product-two-point";
  f.times = {t};
  f.points = 2;
  f.value = [](std::span<const Vec> x) { return x[0].dot(x[1]); };
  f.gradient = [](std::span<const Vec> x) { return std::vector<Vec>{x[1], x[0]}; };
  return f;
}

// Two base points at time t: sin(<a, x_1(t)> + <a, x_2(t)>).
CylindricalFunctional sin_sum_two_point(double t, Vec a) {
  CylindricalFunctional f;
  f.name = "sin-sum-two-point";
  f.times = {t};
  f.points = 2;
  f.value = [a](std::span<const Vec> x) { return std::sin(a.dot(x[0]) + a.dot(x[1])); };
  f.gradient = [a](std::span<const Vec> x) {
    const double c = std::cos(a.dot(x[0]) + a.dot(x[1]));
    return std::vector<Vec>{c * a, c * a};
  };
  return f;
}

VectorField constant_field(Vec c) {
  VectorField z;
  z.value = [c](const Vec&) { return c; };
  z.jacobian = [c](const Vec&) -> Mat { return Mat::Zero(c.size(), c.size()); };
  return z;
}

VectorField sphere_gradient_field(Vec a) {
  VectorField z;
  z.value = [a](const Vec& x) -> Vec { return a - a.dot(x) * x; };
  z.jacobian = [a](const Vec& x) -> Mat { return sphere_field_jacobian(x, a); };
  return z;
}

// --- catalog ---------------------------------------------------------------

Scenario circle_full() {
  Scenario s;
  s.id = "circle-full";
  s.description = "S^1 flat chart, X = d/dtheta (m = 1), A = 0; elliptic, additive noise";
  s.system = flat_system(s.id, 1, Mat::Constant(1, 1, 1.0), std::nullopt);
  s.start = vec({0.0});
  s.tangent = vec({1.0});
  s.k_direction = vec({1.0});
  s.functionals = {sin_of_linear("sin-end", 1.0, vec({1.0})),
                   cos_sin("cos-half-sin-end", 0.5, 1.0, vec({1.0}), vec({1.0}))};
  s.multipoint = sin_sum_two_point(1.0, vec({1.0}));
  s.multipoint_bases = {vec({0.0}), vec({1.0})};
  s.test_field = constant_field(vec({1.0}));
  s.ricci_eigenvalue = 0.0;
  s.eq4_closed_form = std::exp(-0.5);
  s.girsanov_closed_form = std::sin(1.0) * std::exp(-0.5);
  return s;
}

Scenario torus2_degenerate() {
  Scenario s;
  s.id = "torus2-degenerate";
  s.description = "T^2 flat chart, X e = e d/dx1 (m = 1), A = 0; rank 1, noise only along x1";
  Mat x(2, 1);
  x << 1.0, 0.0;
  s.system = flat_system(s.id, 2, x, std::nullopt);
  s.start = vec({0.5, 1.2});
  s.tangent = vec({1.0, 0.0});
  s.k_direction = vec({1.0});
  s.functionals = {sin_of_linear("sin-transverse-end", 1.0, vec({0.0, 1.0})),
                   sin_of_linear("sin-end", 1.0, vec({1.0, 0.0})),
                   cos_sin("cos-half-sin-sum-end", 0.5, 1.0, vec({1.0, 0.0}), vec({1.0, 1.0}))};
  s.multipoint = sin_sum_two_point(1.0, vec({1.0, 0.5}));
  s.multipoint_bases = {vec({0.5, 1.2}), vec({2.0, 4.0})};
  s.test_field = constant_field(vec({1.0, 0.5}));
  s.ricci_eigenvalue = 0.0;
  return s;
}

Scenario sphere2_gradient() {
  Scenario s;
  s.id = "sphere2-gradient";
  s.description = "unit S^2 in R^3, X(x) e = e - <e, x> x (m = 3), A = 0; Brownian motion, LJW = Levi-Civita";
  s.system = sphere_gradient_system(s.id);
  s.start = vec({1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0});
  s.tangent = vec({2.0 / 3.0, -2.0 / 3.0, 1.0 / 3.0});
  s.k_direction = vec({1.0, 0.0, 0.0});
  const Vec a = vec({0.6, 0.0, 0.8});
  const Vec b = vec({0.0, 1.0, 0.0});
  s.functionals = {linear("linear-end", 1.0, a), bilinear("bilinear-half-end", 0.5, 1.0, a, b),
                   sin_of_linear("sin-end", 1.0, 2.0 * b)};
  s.multipoint = inner_product_two_point(1.0);
  s.multipoint_bases = {s.start, -s.start};
  s.test_field = sphere_gradient_field(a);
  s.ricci_eigenvalue = 1.0;
  return s;
}

Scenario sphere2_drift() {
  Scenario s = sphere2_gradient();
  s.id = "sphere2-drift";
  s.description = "unit S^2, gradient noise plus drift A(x) = 0.5 P(x) (0,0,1); A lies in I(X)";
  auto sys = sphere_gradient_system(s.id);
  const Vec a = vec({0.0, 0.0, 1.0});
  static constexpr double c = 0.5;
  sys->drift.value = [a](const Vec& x) -> Vec { return c * (a - a.dot(x) * x); };
  sys->drift.jacobian = [a](const Vec& x) -> Mat { return c * sphere_field_jacobian(x, a); };
  s.system = sys;
  return s;
}

Scenario torus2_transverse_drift() {
  Scenario s;
  s.id = "torus2-transverse-drift";
  s.description = "T^2 flat chart, X e = e d/dx1 (m = 1), A = d/dx2; drift outside I(X)";
  Mat x(2, 1);
  x << 1.0, 0.0;
  s.system = flat_system(s.id, 2, x, vec({0.0, 1.0}));
  s.start = vec({0.5, 1.2});
  s.tangent = vec({1.0, 0.0});
  s.k_direction = vec({1.0});
  s.functionals = {sin_of_linear("sin-sum-end", 1.0, vec({1.0, 1.0})),
                   sin_of_linear("sin-transverse-end", 1.0, vec({0.0, 1.0})),
                   cos_sin("cos-half-sin-sum-end", 0.5, 1.0, vec({1.0, 0.0}), vec({1.0, 1.0}))};
  s.multipoint = sin_sum_two_point(1.0, vec({1.0, 0.5}));
  s.multipoint_bases = {vec({0.5, 1.2}), vec({2.0, 4.0})};
  s.test_field = constant_field(vec({1.0, 0.5}));
  s.ricci_eigenvalue = 0.0;
  return s;
}

void fail_validation(const Scenario& s, const std::string& what) {
  throw std::logic_error("scenario " + s.id + ": " + what);
}

// Startup validation of every registered closed form.
void validate(Scenario& s) {
  const DiffusionSystem& sys = *s.system;
  s.rank = check_constant_rank(sys, 1000);
  ConnectionOracle::Options numeric;
  numeric.prefer_closed_form = false;
  const ConnectionOracle oracle(s.system, numeric);
  for (int i = 0; i < 8; ++i) {
    const Vec x = quasi_random_point(sys.space(), 17 * i + 3);
    const SubbundlePoint sb = image_subbundle(sys, x);
    if ((sys.noise_projector(x) - sb.projector).cwiseAbs().maxCoeff() > 1e-9) {
      fail_validation(s, "closed-form noise projector disagrees with the SVD route");
    }
    const Mat frame = sys.space().tangent_frame(x);
    const Vec u1 = frame.col(0);
    const Vec u2 = frame.col(frame.cols() - 1);
    const Mat rc = sys.curvature(x, u1, u2) * sb.basis;
    const Mat rn = oracle.numerical_curvature(x, u1, u2) * sb.basis;
    if ((rc - rn).cwiseAbs().maxCoeff() > 1e-5) fail_validation(s, "closed-form curvature disagrees");
    if ((sys.ricci(x, u1) - oracle.numerical_ricci(x, u1)).norm() > 1e-5) {
      fail_validation(s, "closed-form Ricci disagrees");
    }
    const Vec a = Vec::Constant(sys.noise_dim, 0.7);
    const Mat jc = sys.coefficient_jacobian(x, a) * frame;
    DiffusionSystem plain = sys;
    plain.coefficient_jacobian = nullptr;
    const Mat jn = plain.contracted_jacobian(x, a) * frame;
    if ((jc - jn).cwiseAbs().maxCoeff() > 1e-6) fail_validation(s, "closed-form X Jacobian disagrees");
  }
  auto check_gradient = [&](const CylindricalFunctional& f, const std::vector<Vec>& base) {
    std::vector<Vec> args;
    for (std::size_t i = 0; i < f.times.size(); ++i) {
      for (const Vec& b : base) args.push_back(b);
    }
    if (gradient_check(sys.space(), f, args) > 1e-6) fail_validation(s, "gradient of " + f.name);
  };
  for (const auto& f : s.functionals) check_gradient(f, {s.start});
  check_gradient(s.multipoint, s.multipoint_bases);
}

std::vector<Scenario> build_catalog() {
  std::vector<Scenario> out{circle_full(), torus2_degenerate(), sphere2_gradient(), sphere2_drift(),
                            torus2_transverse_drift()};
  for (Scenario& s : out) validate(s);
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

const std::vector<Scenario>& scenario_catalog() {
  static const std::vector<Scenario> catalog = build_catalog();
  return catalog;
}

std::string nearest_match(std::string_view query, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(query, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

const Scenario& find_scenario(std::string_view id) {
  const auto& catalog = scenario_catalog();
  std::vector<std::string> ids;
  for (const Scenario& s : catalog) {
    if (s.id == id) return s;
    ids.push_back(s.id);
  }
  throw NotFoundError("unknown scenario '" + std::string(id) + "'; did you mean '" +
                      nearest_match(id, ids) + "'?");
}

std::string catalog_text() {
  std::ostringstream out;
  for (const Scenario& s : scenario_catalog()) out << s.id << "  " << s.description << "\n";
  return out.str();
}

}  // namespace ljw
