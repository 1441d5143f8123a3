#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ljw/errors.hpp"
#include "ljw/geometry.hpp"
#include "ljw/manifolds.hpp"
#include "oracles.hpp"

using namespace ljw;

namespace {

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Projected field Z(x) = P(x) a on the unit sphere.
VectorField sphere_field(const UnitSphere& s, const Vec& a) {
  return VectorField{[&s, a](const Vec& x) -> Vec { return s.projector(x) * a; }, {}, 2};
}

VectorField constant_field(const Vec& c) {
  return VectorField{[c](const Vec&) -> Vec { return c; }, {}, 2};
}

// Great-circle arc from p to q (orthogonal unit vectors) with angular step h.
std::vector<Vec> arc(const Vec& p, const Vec& q, double h) {
  const int steps = static_cast<int>(std::ceil(0.5 * std::numbers::pi / h));
  std::vector<Vec> out;
  for (int i = 0; i <= steps; ++i) {
    const double t = 0.5 * std::numbers::pi * i / steps;
    out.push_back(std::cos(t) * p + std::sin(t) * q);
  }
  return out;
}

}  // namespace

TEST_CASE("tangent projection on the sphere and the flat torus") {
  UnitSphere s2(3);
  FlatTorus t2(2);
  CHECK((tangent_project(s2, v3(0, 0, 1), v3(1, 2, 3)) - v3(1, 2, 0)).norm() < 1e-15);
  CHECK(tangent_project(s2, v3(0, 0, 1), v3(0, 0, 0)).norm() == 0.0);
  CHECK((tangent_project(t2, v2(0.3, 5.0), v2(-1.5, 2.0)) - v2(-1.5, 2.0)).norm() == 0.0);

  const Vec x = v3(1, 2, 2) / 3.0;
  const Vec once = tangent_project(s2, x, v3(0.3, -1.0, 2.0));
  CHECK((tangent_project(s2, x, once) - once).norm() < 1e-15);

  CHECK_THROWS_AS(tangent_project(s2, v3(0, 0, 2), v3(1, 0, 0)), DomainError);
}

TEST_CASE("projector is a rank-n orthogonal projection at sampled points") {
  UnitSphere s1(2), s2(3);
  FlatTorus t2(2);
  for (const EmbeddedManifold* m : {static_cast<const EmbeddedManifold*>(&s1),
                                    static_cast<const EmbeddedManifold*>(&s2),
                                    static_cast<const EmbeddedManifold*>(&t2)}) {
    for (int i = 0; i < 100; ++i) {
      const Vec x = quasi_random_point(*m, i);
      REQUIRE(m->contains(x));
      const Mat p = m->projector(x);
      CHECK((p * p - p).norm() <= 1e-10);
      CHECK((p - p.transpose()).norm() <= 1e-10);
      const Eigen::MatrixXd pd = p;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(pd);
      svd.setThreshold(1e-10);
      CHECK(svd.rank() == m->intrinsic_dim());

      const Mat frame = m->tangent_frame(x);
      CHECK((frame.transpose() * frame - identity(m->intrinsic_dim())).norm() < 1e-12);
      CHECK((p * frame - frame).norm() < 1e-12);

      CHECK(m->retract(x, zeros(m->ambient_dim())) == x);
      const Vec v = 0.1 * frame.col(0);
      CHECK(m->contains(m->retract(x, v)));
    }
  }
}

TEST_CASE("flat torus wraps coordinates and measures periodic distance") {
  FlatTorus t2(2);
  const Vec y = t2.retract(v2(6.2, 0.1), v2(0.2, -0.3));
  CHECK(y[0] == doctest::Approx(6.4 - 2.0 * std::numbers::pi));
  CHECK(y[1] == doctest::Approx(2.0 * std::numbers::pi - 0.2));
  CHECK(t2.distance(v2(0.05, 1.0), v2(2.0 * std::numbers::pi - 0.05, 1.0)) == doctest::Approx(0.1));
}

TEST_CASE("Levi-Civita derivative") {
  UnitSphere s2(3);
  FlatTorus t2(2);

  SUBCASE("constant field on the flat torus") {
    CHECK(levi_civita_derivative(t2, constant_field(v2(1.0, -2.0)), v2(1.0, 2.0), v2(0.3, 0.7)).norm() <
          1e-12);
  }

  SUBCASE("projected constant field on the sphere against a Richardson oracle") {
    const Vec a = v3(0.6, -0.2, 0.8);
    const VectorField z = sphere_field(s2, a);
    for (int i = 0; i < 20; ++i) {
      const Vec x = quasi_random_point(s2, i);
      const Vec v = s2.tangent_frame(x) * v2(std::cos(i), std::sin(i));
      const Vec got = levi_civita_derivative(s2, z, x, v);
      CHECK((got + a.dot(x) * v).norm() < 1e-8);

      const Eigen::Vector3d xe = Eigen::VectorXd(x), ve = Eigen::VectorXd(v), ae = Eigen::VectorXd(a);
      const Eigen::VectorXd dz = oracle::richardson([&](double t) -> Eigen::VectorXd {
        const Eigen::Vector3d y = (xe + t * ve).normalized();
        return ae - ae.dot(y) * y;
      });
      const Eigen::VectorXd expected = dz - xe.dot(dz) * xe;
      CHECK((Eigen::VectorXd(got) - expected).norm() < 1e-7);
    }
  }

  SUBCASE("zero direction") {
    CHECK(levi_civita_derivative(s2, sphere_field(s2, v3(1, 0, 0)), v3(0, 0, 1), v3(0, 0, 0)).norm() ==
          0.0);
  }

  SUBCASE("non-differentiable field") {
    VectorField z = constant_field(v2(1.0, 0.0));
    z.smoothness = 0;
    CHECK_THROWS_AS(levi_civita_derivative(t2, z, v2(1.0, 1.0), v2(1.0, 0.0)), UnsupportedOperation);
  }
}

TEST_CASE("Levi-Civita transport") {
  UnitSphere s2(3);
  FlatTorus t2(2);

  SUBCASE("constant path") {
    const Vec x = v3(0, 0, 1);
    const std::vector<Vec> path(10, x);
    for (const Vec& v : levi_civita_transport(s2, path, v3(0.3, -0.4, 0.0))) {
      CHECK((v - v3(0.3, -0.4, 0.0)).norm() < 1e-15);
    }
  }

  SUBCASE("flat torus keeps components") {
    std::vector<Vec> path;
    for (int i = 0; i < 50; ++i) path.push_back(t2.retract(v2(1.0, 2.0), v2(0.1 * i, -0.05 * i)));
    for (const Vec& v : levi_civita_transport(t2, path, v2(0.7, -1.1))) {
      CHECK((v - v2(0.7, -1.1)).norm() < 1e-15);
    }
  }

  SUBCASE("holonomy around the octant triangle equals its spherical excess") {
    const double h = 1e-3;
    const Vec n = v3(0, 0, 1), e1 = v3(1, 0, 0), e2 = v3(0, 1, 0);
    std::vector<Vec> loop = arc(n, e1, h);
    for (const auto& legs : {arc(e1, e2, h), arc(e2, n, h)}) loop.insert(loop.end(), legs.begin() + 1, legs.end());
    const Vec v0 = v3(1, 0, 0);
    const std::vector<Vec> moved = levi_civita_transport(s2, loop, v0);
    const Vec vt = moved.back();
    const Eigen::Vector3d a0 = Eigen::VectorXd(v0), at = Eigen::VectorXd(vt);
    const double angle = std::atan2(std::abs(a0.cross(at).dot(Eigen::Vector3d(0, 0, 1))), a0.dot(at));
    // Interior angles are all pi/2, so the excess is 3 pi/2 - pi.
    const double excess = 3.0 * std::numbers::pi / 2.0 - std::numbers::pi;
    CHECK(std::abs(angle - excess) <= 1e-3);
    CHECK(vt.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("transport preserves inner products up to the step size") {
    std::vector<Vec> path = arc(v3(0, 0, 1), v3(0.6, 0.8, 0.0), 1e-3);
    const Vec a = v3(1, 0, 0), b = v3(0.3, 0.9, 0.0);
    const auto ta = levi_civita_transport(s2, path, a);
    const auto tb = levi_civita_transport(s2, path, b);
    double worst = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) worst = std::max(worst, std::abs(ta[i].dot(tb[i]) - a.dot(b)));
    CHECK(worst < 5e-3);
  }

  SUBCASE("points too far apart") {
    const std::vector<Vec> path{v3(0, 0, 1), v3(1, 0, 0)};
    CHECK_THROWS_AS(levi_civita_transport(s2, path, v3(1, 0, 0)), StepSizeError);
  }
}

TEST_CASE("frame transport is a linear isometry between tangent spaces") {
  UnitSphere s2(3);
  const Vec x = v3(1, 2, 2) / 3.0;
  const Vec y = s2.retract(x, v3(0.1, -0.05, 0.0));
  const Mat t = transport_map(s2, x, y);
  const Mat fx = s2.tangent_frame(x);
  const Mat fy = s2.tangent_frame(y);
  const Mat core = fy.transpose() * t * fx;
  CHECK((core.transpose() * core - identity(2)).norm() < 1e-12);
  CHECK((t * x).norm() < 1e-12);
  CHECK((s2.projector(y) * t - t).norm() < 1e-12);

  const Mat inv = tangent_inverse(s2, x, y, t);
  CHECK((inv * t - s2.projector(x)).norm() < 1e-12);
}

TEST_CASE("Lie bracket") {
  UnitSphere s2(3);
  FlatTorus t2(2);
  const Vec a = v3(0.6, 0.0, 0.8), b = v3(0.0, 1.0, 0.0);
  const VectorField za = sphere_field(s2, a), zb = sphere_field(s2, b);

  CHECK(lie_bracket(t2, constant_field(v2(1, 0)), constant_field(v2(0, 1)), v2(2.0, 3.0)).norm() < 1e-12);

  for (int i = 0; i < 20; ++i) {
    const Vec x = quasi_random_point(s2, i);
    CHECK(lie_bracket(s2, za, za, x).norm() < 1e-9);
    const Vec got = lie_bracket(s2, za, zb, x);
    const Mat p = s2.projector(x);
    const Vec expected = a.dot(x) * (p * b) - b.dot(x) * (p * a);
    CHECK((got - expected).norm() < 1e-8);
    CHECK(((identity(3) - p) * got).norm() < 1e-8);

    // Finite-difference bracket oracle: ambient directional derivatives of
    // the extended fields y -> a - <a, y> y / |y|^2 along straight lines.
    const Eigen::Vector3d xe = Eigen::VectorXd(x);
    auto field = [](const Eigen::Vector3d& c) {
      return [c](const Eigen::Vector3d& y) -> Eigen::VectorXd { return c - c.dot(y) * y / y.squaredNorm(); };
    };
    const auto fa = field(Eigen::VectorXd(a)), fb = field(Eigen::VectorXd(b));
    const Eigen::Vector3d va = fa(xe), vb = fb(xe);
    const Eigen::VectorXd db_a = oracle::richardson([&](double t) { return fb(xe + t * va); });
    const Eigen::VectorXd da_b = oracle::richardson([&](double t) { return fa(xe + t * vb); });
    CHECK((Eigen::VectorXd(got) - (db_a - da_b)).norm() < 1e-7);
  }
}

TEST_CASE("Levi-Civita connection is metric and torsion free at sampled points") {
  UnitSphere s2(3);
  const Vec a = v3(0.6, 0.0, 0.8), b = v3(0.1, 1.0, -0.3);
  const VectorField z1 = sphere_field(s2, a), z2 = sphere_field(s2, b);
  for (int i = 0; i < 100; ++i) {
    const Vec x = quasi_random_point(s2, i);
    const Vec v = s2.tangent_frame(x).col(i % 2);
    const double lhs = curve_derivative(s2, x, v, [&](const Vec& y) -> Vec {
                         return Vec::Constant(1, z1(y).dot(z2(y)));
                       })[0];
    const double rhs = levi_civita_derivative(s2, z1, x, v).dot(z2(x)) +
                       z1(x).dot(levi_civita_derivative(s2, z2, x, v));
    CHECK(std::abs(lhs - rhs) <= 1e-6);

    const Vec torsion = levi_civita_derivative(s2, z2, x, z1(x)) -
                        levi_civita_derivative(s2, z1, x, z2(x)) - lie_bracket(s2, z1, z2, x);
    CHECK(torsion.norm() <= 1e-6);
  }
}
