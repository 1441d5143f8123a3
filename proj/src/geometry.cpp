#include "ljw/geometry.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "ljw/errors.hpp"

namespace ljw {

double DiffConfig::step() const {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * scale;
}

Mat EmbeddedManifold::tangent_frame(const Vec& x) const {
  const int big_n = ambient_dim();
  const int n = intrinsic_dim();
  const Mat p = projector(x);
  Mat frame(big_n, n);
  int found = 0;
  // Greedy Gram-Schmidt over projected coordinate axes, always taking the
  // candidate with the largest residual so the frame is well conditioned.
  std::array<bool, kMaxDim> used{};
  while (found < n) {
    int best = -1;
    double best_norm = 0.0;
    Vec best_vec;
    for (int i = 0; i < big_n; ++i) {
      if (used[i]) continue;
      Vec c = p.col(i);
      for (int j = 0; j < found; ++j) c -= frame.col(j).dot(c) * frame.col(j);
      const double cn = c.norm();
      if (cn > best_norm) {
        best_norm = cn;
        best = i;
        best_vec = c;
      }
    }
    if (best < 0 || best_norm < 1e-8) {
      throw DomainError("tangent_frame: projector rank below intrinsic dimension");
    }
    used[best] = true;
    frame.col(found++) = best_vec / best_norm;
  }
  return frame;
}

namespace {

double radical_inverse(int index, int base) {
  double f = 1.0;
  double r = 0.0;
  for (int i = index; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

}  // namespace

Vec quasi_random_point(const EmbeddedManifold& m, int index) {
  static constexpr std::array<int, kMaxDim> kBases{2, 3, 5};
  std::array<double, kMaxDim> unit{};
  for (int d = 0; d < m.intrinsic_dim(); ++d) unit[d] = radical_inverse(index + 1, kBases[d]);
  return m.sample_point(std::span<const double>(unit.data(), m.intrinsic_dim()));
}

Vec tangent_project(const EmbeddedManifold& m, const Vec& x, const Vec& v) {
  if (!m.contains(x)) throw DomainError("tangent_project: point is not on the manifold");
  return m.projector(x) * v;
}

Vec directional_derivative(const EmbeddedManifold& m, const VectorField& z, const Vec& x,
                           const Vec& v, const DiffConfig& cfg) {
  if (!z.differentiable()) {
    throw UnsupportedOperation("vector field is flagged as not differentiable");
  }
  if (z.jacobian) return z.jacobian(x) * v;
  return curve_derivative(m, x, v, z.value, cfg);
}

Vec levi_civita_derivative(const EmbeddedManifold& m, const VectorField& z, const Vec& x,
                           const Vec& v, const DiffConfig& cfg) {
  return m.projector(x) * directional_derivative(m, z, x, v, cfg);
}

Vec lie_bracket(const EmbeddedManifold& m, const VectorField& z1, const VectorField& z2,
                const Vec& x, const DiffConfig& cfg) {
  return directional_derivative(m, z2, x, z1(x), cfg) - directional_derivative(m, z1, x, z2(x), cfg);
}

std::vector<Vec> levi_civita_transport(const EmbeddedManifold& m, std::span<const Vec> path,
                                       const Vec& v0) {
  std::vector<Vec> out;
  if (path.empty()) return out;
  out.reserve(path.size());
  out.push_back(m.projector(path[0]) * v0);
  for (std::size_t k = 1; k < path.size(); ++k) {
    if (m.distance(path[k - 1], path[k]) > m.retraction_radius()) {
      throw StepSizeError("levi_civita_transport: consecutive points are too far apart");
    }
    const Vec& prev = out.back();
    Vec next = m.projector(path[k]) * prev;
    const double pn = prev.norm();
    const double nn = next.norm();
    if (pn > 0.0) {
      if (nn == 0.0) throw StepSizeError("levi_civita_transport: vector projected to zero");
      next *= pn / nn;
    }
    out.push_back(std::move(next));
  }
  return out;
}

namespace {

// Orthogonal polar factor of a small square matrix.
Mat polar_factor(const Mat& b) {
  if (b.rows() == 1) return Mat::Constant(1, 1, b(0, 0) >= 0.0 ? 1.0 : -1.0);
  if (b.rows() == 2) {
    const double a = b(0, 0), c = b(1, 0), bb = b(0, 1), d = b(1, 1);
    const bool proper = a * d - bb * c >= 0.0;
    const double p = proper ? a + d : a - d;
    const double q = proper ? c - bb : c + bb;
    const double r = std::hypot(p, q);
    if (r > 0.0) {
      Mat out(2, 2);
      if (proper) {
        out << p / r, -q / r, q / r, p / r;
      } else {
        out << p / r, q / r, q / r, -p / r;
      }
      return out;
    }
  }
  Eigen::JacobiSVD<Mat> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace

Mat transport_map(const EmbeddedManifold& m, const Vec& to, const Mat& frame_from, const Mat& frame_to) {
  const Mat b = frame_to.transpose() * m.projector(to) * frame_from;
  return frame_to * polar_factor(b) * frame_from.transpose();
}

Mat transport_map(const EmbeddedManifold& m, const Vec& from, const Vec& to) {
  return transport_map(m, to, m.tangent_frame(from), m.tangent_frame(to));
}

Mat tangent_inverse(const EmbeddedManifold& m, const Vec& x0, const Vec& x1, const Mat& map) {
  const Mat e0 = m.tangent_frame(x0);
  const Mat e1 = m.tangent_frame(x1);
  const Mat core = e1.transpose() * map * e0;
  return e0 * small_inverse(core) * e1.transpose();
}

}  // namespace ljw
