#pragma once

#include "evt/types.hpp"

namespace evt {

// Tangent convention used everywhere in this library:
//   theta = [t_x, t_y, t_z, w_x, w_y, w_z]
// translation part first, rotation part second. exp() applies the
// increment about the origin of the frame the pose maps FROM, i.e.
// composing T * exp(delta) perturbs on the source-frame side.

Mat3 skew(const Vec3& v);

/// Rodrigues formula with a Taylor fallback below 1e-8 rad.
Mat3 so3_exp(const Vec3& omega);

/// Left Jacobian V of SO(3): translation block of the SE(3) exponential.
Mat3 so3_left_jacobian(const Vec3& omega);

/// Rigid transform storing both the 6-vector tangent coordinates and the
/// 4x4 homogeneous matrix they map to.
class PoseSE3 {
 public:
  PoseSE3();  // identity

  /// SE(3) exponential map.
  static PoseSE3 exp(const Vec6& theta);

  /// Wraps an existing rigid transform; recovers theta via the log map.
  /// Throws std::invalid_argument when the rotation block is not
  /// orthonormal with determinant +1 (tolerance 1e-6).
  static PoseSE3 from_matrix(const Mat4& T);

  const Vec6& theta() const { return theta_; }
  const Mat4& matrix() const { return T_; }
  Mat3 rotation() const { return T_.block<3, 3>(0, 0); }
  Vec3 translation() const { return T_.block<3, 1>(0, 3); }

  PoseSE3 inverse() const;
  PoseSE3 operator*(const PoseSE3& rhs) const;

  /// Applies the transform to a point.
  Vec3 transform(const Vec3& p) const { return rotation() * p + translation(); }

 private:
  PoseSE3(const Vec6& theta, const Mat4& T) : theta_(theta), T_(T) {}

  Vec6 theta_;
  Mat4 T_;
};

/// SE(3) log map: inverse of PoseSE3::exp for rotation angles < pi.
Vec6 log_map(const Mat4& T);

}  // namespace evt
