#include "evt/se3.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace evt {

namespace {
constexpr double kSmallAngle = 1e-8;  // Taylor fallback threshold [rad]
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return s;
}

Mat3 so3_exp(const Vec3& omega) {
  const double angle = omega.norm();
  const Mat3 W = skew(omega);
  if (angle < kSmallAngle) {
    return Mat3::Identity() + W + 0.5 * W * W;
  }
  const double a2 = angle * angle;
  return Mat3::Identity() + std::sin(angle) / angle * W + (1.0 - std::cos(angle)) / a2 * W * W;
}

Mat3 so3_left_jacobian(const Vec3& omega) {
  const double angle = omega.norm();
  const Mat3 W = skew(omega);
  if (angle < kSmallAngle) {
    return Mat3::Identity() + 0.5 * W + W * W / 6.0;
  }
  const double a2 = angle * angle;
  const double a3 = a2 * angle;
  return Mat3::Identity() + (1.0 - std::cos(angle)) / a2 * W + (angle - std::sin(angle)) / a3 * W * W;
}

PoseSE3::PoseSE3() : theta_(Vec6::Zero()), T_(Mat4::Identity()) {}

PoseSE3 PoseSE3::exp(const Vec6& theta) {
  if (!theta.allFinite()) throw std::invalid_argument("exp: non-finite tangent vector");
  const Vec3 rho = theta.head<3>();
  const Vec3 omega = theta.tail<3>();
  Mat4 T = Mat4::Identity();
  T.block<3, 3>(0, 0) = so3_exp(omega);
  T.block<3, 1>(0, 3) = so3_left_jacobian(omega) * rho;
  return PoseSE3(theta, T);
}

PoseSE3 PoseSE3::from_matrix(const Mat4& T) {
  const Mat3 R = T.block<3, 3>(0, 0);
  if ((R * R.transpose() - Mat3::Identity()).norm() > 1e-6 || std::abs(R.determinant() - 1.0) > 1e-6) {
    throw std::invalid_argument("from_matrix: rotation block is not a proper rotation");
  }
  Mat4 Tn = Mat4::Identity();
  Tn.block<3, 3>(0, 0) = R;
  Tn.block<3, 1>(0, 3) = T.block<3, 1>(0, 3);
  return PoseSE3(log_map(Tn), Tn);
}

PoseSE3 PoseSE3::inverse() const {
  Mat4 Ti = Mat4::Identity();
  const Mat3 Rt = rotation().transpose();
  Ti.block<3, 3>(0, 0) = Rt;
  Ti.block<3, 1>(0, 3) = -Rt * translation();
  return PoseSE3(log_map(Ti), Ti);
}

PoseSE3 PoseSE3::operator*(const PoseSE3& rhs) const {
  Mat4 T = T_ * rhs.T_;
  // Re-orthonormalize the rotation block so long composition chains do
  // not drift away from SO(3).
  Eigen::JacobiSVD<Mat3> svd(T.block<3, 3>(0, 0), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 R = svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0.0) {
    Mat3 U = svd.matrixU();
    U.col(2) *= -1.0;
    R = U * svd.matrixV().transpose();
  }
  T.block<3, 3>(0, 0) = R;
  T.row(3) << 0, 0, 0, 1;
  return PoseSE3(log_map(T), T);
}

Vec6 log_map(const Mat4& T) {
  const Mat3 R = T.block<3, 3>(0, 0);
  const Vec3 t = T.block<3, 1>(0, 3);
  const Eigen::AngleAxisd aa(R);
  const Vec3 omega = aa.angle() * aa.axis();
  Vec6 theta;
  // V is invertible for angles < pi; solving avoids the closed-form
  // inverse's poor conditioning near the boundary.
  theta.head<3>() = so3_left_jacobian(omega).lu().solve(t);
  theta.tail<3>() = omega;
  return theta;
}

}  // namespace evt
