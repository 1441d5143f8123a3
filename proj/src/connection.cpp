#include "ljw/connection.hpp"

#include <cmath>
#include <sstream>

#include "ljw/errors.hpp"

namespace ljw {

Mat DiffusionSystem::contracted_jacobian(const Vec& x, const Vec& a, const DiffConfig& cfg) const {
  if (coefficient_jacobian) return coefficient_jacobian(x, a);
  const Mat frame = manifold->tangent_frame(x);
  Mat j = Mat::Zero(ambient_dim(), ambient_dim());
  for (int k = 0; k < frame.cols(); ++k) {
    const Vec dk = curve_derivative(
        *manifold, x, frame.col(k), [&](const Vec& y) -> Vec { return coefficient(y) * a; }, cfg);
    j += dk * frame.col(k).transpose();
  }
  return j;
}

Mat DiffusionSystem::drift_jacobian(const Vec& x, const DiffConfig& cfg) const {
  const int n = ambient_dim();
  if (!drift.value) return Mat::Zero(n, n);
  if (drift.jacobian) return drift.jacobian(x);
  const Mat frame = manifold->tangent_frame(x);
  Mat j = Mat::Zero(n, n);
  for (int k = 0; k < frame.cols(); ++k) {
    j += curve_derivative(*manifold, x, frame.col(k), drift.value, cfg) * frame.col(k).transpose();
  }
  return j;
}

SubbundlePoint image_subbundle(const DiffusionSystem& sys, const Vec& x, const RankConfig& cfg) {
  const Mat xm = sys.coefficient(x);
  Eigen::JacobiSVD<Mat> svd(xm, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec s = svd.singularValues();
  SubbundlePoint out;
  out.point = x;
  out.singular_values = s;
  const double smax = s.size() > 0 ? s[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i) {
    const double ratio = smax > 0.0 ? s[i] / smax : 0.0;
    if (ratio >= cfg.threshold) {
      if (ratio < cfg.gap * cfg.threshold) {
        std::ostringstream msg;
        msg << "image_subbundle: singular value ratio " << ratio << " lies inside the ambiguity band";
        throw RankDegeneracyError(msg.str());
      }
      ++rank;
    }
  }
  out.rank = rank;
  const Mat& u = svd.matrixU();
  const Mat& v = svd.matrixV();
  const int big_n = static_cast<int>(xm.rows());
  const int m = static_cast<int>(xm.cols());
  out.basis = Mat(big_n, rank);
  out.adjoint = Mat::Zero(m, big_n);
  out.projector = Mat::Zero(m, m);
  for (int i = 0; i < rank; ++i) {
    out.basis.col(i) = s[i] * u.col(i);
    out.adjoint += v.col(i) * u.col(i).transpose() / s[i];
    out.projector += v.col(i) * v.col(i).transpose();
  }
  return out;
}

Mat adjoint_Y(const DiffusionSystem& sys, const Vec& x, const RankConfig& cfg) {
  return image_subbundle(sys, x, cfg).adjoint;
}

Mat noise_projector(const DiffusionSystem& sys, const Vec& x) {
  if (sys.noise_projector) return sys.noise_projector(x);
  return image_subbundle(sys, x).projector;
}

double induced_metric(const DiffusionSystem& sys, const Vec& x, const Vec& a, const Vec& b) {
  const Mat y = adjoint_Y(sys, x);
  return (y * a).dot(y * b);
}

int check_constant_rank(const DiffusionSystem& sys, int count, const RankConfig& cfg) {
  int rank = -1;
  for (int i = 0; i < count; ++i) {
    const Vec x = quasi_random_point(sys.space(), i);
    const int r = image_subbundle(sys, x, cfg).rank;
    if (rank < 0) {
      rank = r;
    } else if (r != rank) {
      std::ostringstream msg;
      msg << "check_constant_rank: rank " << r << " at sample " << i << " differs from " << rank;
      throw RankDegeneracyError(msg.str());
    }
  }
  return rank;
}

bool ambient_metric_extends(const DiffusionSystem& sys, int count, double tol) {
  for (int i = 0; i < count; ++i) {
    const Vec x = quasi_random_point(sys.space(), i);
    const Mat b = image_subbundle(sys, x).basis;
    const Mat gram = b.transpose() * b;
    if ((gram - Mat::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

bool drift_in_image(const DiffusionSystem& sys, int count, double tol) {
  if (!sys.drift.value) return true;
  for (int i = 0; i < count; ++i) {
    const Vec x = quasi_random_point(sys.space(), i);
    const SubbundlePoint sb = image_subbundle(sys, x);
    const Vec a = sys.drift(x);
    const Vec back = sys.coefficient(x) * (sb.adjoint * a);
    if ((a - back).norm() > tol * std::max(1.0, a.norm())) return false;
  }
  return true;
}

bool coefficient_injective(const DiffusionSystem& sys, int count) {
  const int m = sys.noise_dim;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < count; ++i) {
    const Vec x = quasi_random_point(sys.space(), i);
    const Mat xm = sys.coefficient(x);
    gram += (xm.transpose() * xm).cast<double>();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double lmax = eig.eigenvalues().maxCoeff();
  return lmax > 0.0 && eig.eigenvalues().minCoeff() > 1e-8 * lmax;
}

ConnectionOracle::ConnectionOracle(std::shared_ptr<const DiffusionSystem> sys)
    : ConnectionOracle(std::move(sys), Options{}) {}

ConnectionOracle::ConnectionOracle(std::shared_ptr<const DiffusionSystem> sys, Options opts)
    : sys_(std::move(sys)), opts_(opts) {
  if (!sys_ || !sys_->manifold || !sys_->coefficient) {
    throw std::invalid_argument("ConnectionOracle: incomplete diffusion system");
  }
}

Vec ConnectionOracle::ljw_derivative(const VectorField& z, const Vec& x, const Vec& v) const {
  const SubbundlePoint sb = subbundle(x);
  const Mat xm = sys_->coefficient(x);
  const Vec zx = z(x);
  if ((zx - xm * (sb.adjoint * zx)).norm() > opts_.section_tol * std::max(1.0, zx.norm())) {
    throw DomainError("ljw_derivative: field is not a section of the image subbundle");
  }
  const Vec d = curve_derivative(
      sys_->space(), x, v,
      [&](const Vec& y) -> Vec { return adjoint_Y(*sys_, y, opts_.rank) * z(y); }, opts_.diff);
  return xm * d;
}

Vec ConnectionOracle::adjoint_semi_derivative(const VectorField& z1, const VectorField& z2,
                                              const Vec& x) const {
  return ljw_derivative(z2, x, z1(x)) - lie_bracket(sys_->space(), z1, z2, x, opts_.diff);
}

std::vector<Mat> ConnectionOracle::projector_derivatives(const Vec& x, const Mat& frame) const {
  std::vector<Mat> out;
  out.reserve(frame.cols());
  for (int k = 0; k < frame.cols(); ++k) {
    out.push_back(curve_derivative(
        sys_->space(), x, frame.col(k),
        [&](const Vec& y) -> Mat { return image_subbundle(*sys_, y, opts_.rank).projector; },
        opts_.diff));
  }
  return out;
}

Mat ConnectionOracle::numerical_curvature(const Vec& x, const Vec& u1, const Vec& u2) const {
  // Along commuting chart fields the LJW curvature reduces to
  // R(u1, u2) = X [de(u1), de(u2)] Y, with e = Y X.
  const Mat frame = sys_->space().tangent_frame(x);
  const std::vector<Mat> de = projector_derivatives(x, frame);
  const Vec c1 = frame.transpose() * u1;
  const Vec c2 = frame.transpose() * u2;
  const int m = sys_->noise_dim;
  Mat a = Mat::Zero(m, m);
  Mat b = Mat::Zero(m, m);
  for (int k = 0; k < frame.cols(); ++k) {
    a += c1[k] * de[k];
    b += c2[k] * de[k];
  }
  const Mat comm = a * b - b * a;
  const SubbundlePoint sb = subbundle(x);
  return sys_->coefficient(x) * comm * sb.adjoint;
}

Mat ConnectionOracle::curvature(const Vec& x, const Vec& u1, const Vec& u2) const {
  if (opts_.prefer_closed_form && sys_->curvature) return sys_->curvature(x, u1, u2);
  return numerical_curvature(x, u1, u2);
}

Vec ConnectionOracle::numerical_ricci(const Vec& x, const Vec& u) const {
  const SubbundlePoint sb = subbundle(x);
  const Mat frame = sys_->space().tangent_frame(x);
  const std::vector<Mat> de = projector_derivatives(x, frame);
  const Mat xm = sys_->coefficient(x);
  const int m = sys_->noise_dim;
  auto de_along = [&](const Vec& w) {
    const Vec c = frame.transpose() * w;
    Mat d = Mat::Zero(m, m);
    for (int k = 0; k < frame.cols(); ++k) d += c[k] * de[k];
    return d;
  };
  const Mat du = de_along(u);
  Vec out = zeros(sys_->ambient_dim());
  for (int j = 0; j < sb.rank; ++j) {
    const Vec ej = sb.basis.col(j);
    double coeff = 0.0;
    for (int i = 0; i < sb.rank; ++i) {
      const Vec ei = sb.basis.col(i);
      const Mat di = de_along(ei);
      const Vec r = xm * ((di * du - du * di) * (sb.adjoint * ej));
      coeff += (sb.adjoint * r).dot(sb.adjoint * ei);
    }
    out += coeff * ej;
  }
  return out;
}

Vec ConnectionOracle::ricci_sharp(const Vec& x, const Vec& u) const {
  if (opts_.prefer_closed_form && sys_->ricci) return sys_->ricci(x, u);
  if (!(opts_.prefer_closed_form && sys_->curvature)) return numerical_ricci(x, u);
  const SubbundlePoint sb = subbundle(x);
  Vec out = zeros(sys_->ambient_dim());
  for (int j = 0; j < sb.rank; ++j) {
    const Vec ej = sb.basis.col(j);
    double coeff = 0.0;
    for (int i = 0; i < sb.rank; ++i) {
      const Vec ei = sb.basis.col(i);
      const Vec r = curvature(x, ei, u) * ej;
      coeff += (sb.adjoint * r).dot(sb.adjoint * ei);
    }
    out += coeff * ej;
  }
  return out;
}

Vec ConnectionOracle::connection_difference(const Vec& x, const Vec& v, const Vec& z) const {
  const Mat y = adjoint_Y(*sys_, x, opts_.rank);
  const Vec c = y * z;
  const Mat xm = sys_->coefficient(x);
  const Vec de_c = curve_derivative(
      sys_->space(), x, v, [&](const Vec& p) -> Vec { return noise_projector(*sys_, p) * c; },
      opts_.diff);
  const Vec ljw = xm * de_c;
  const Vec lc = sys_->space().projector(x) * (sys_->contracted_jacobian(x, c, opts_.diff) * v);
  return ljw - lc;
}

}  // namespace ljw
