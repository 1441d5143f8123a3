#pragma once

#include <Eigen/Dense>

namespace ljw {

// Every shipped scenario lives in an ambient space of dimension <= 3 and is
// driven by at most 3 Brownian motions, so small vectors and matrices are
// stack allocated with a fixed capacity.
inline constexpr int kMaxDim = 3;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline Vec zeros(int n) { return Vec::Zero(n); }
inline Mat identity(int n) { return Mat::Identity(n, n); }

/// Inverse of a square matrix of size <= 3 by cofactors.
inline Mat small_inverse(const Mat& a) {
  switch (a.rows()) {
    case 1: return Mat::Constant(1, 1, 1.0 / a(0, 0));
    case 2: return Eigen::Matrix2d(a).inverse();
    case 3: return Eigen::Matrix3d(a).inverse();
    default: return Mat(0, 0);
  }
}

}  // namespace ljw
