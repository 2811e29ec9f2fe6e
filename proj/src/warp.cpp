#include "evt/warp.hpp"

namespace evt {

std::optional<Vec2> warp(const Vec2& x, double d, const PoseSE3& T_cur_ref,
                         const CameraIntrinsics& K) {
  const Vec3 P = back_project(x, d, K);
  const Vec3 Q = T_cur_ref.transform(P);
  if (!(Q.z() > 0.0)) return std::nullopt;
  return project(Q, K);
}

Mat26 warp_jacobian(const Vec2& x, double d, const CameraIntrinsics& K) {
  const Vec3 P = back_project(x, d, K);
  const double iz = 1.0 / P.z();
  const double iz2 = iz * iz;
  Eigen::Matrix<double, 2, 3> Jpi;
  Jpi << K.fx * iz, 0.0, -K.fx * P.x() * iz2,
         0.0, K.fy * iz, -K.fy * P.y() * iz2;
  Eigen::Matrix<double, 3, 6> Jpoint;
  Jpoint.leftCols<3>() = Mat3::Identity();
  Jpoint.rightCols<3>() = -skew(P);
  return Jpi * Jpoint;
}

TemplateView make_template(const SemiDenseMap& map, const PoseSE3& T_ref_world,
                           const CameraIntrinsics& K) {
  TemplateView view;
  view.reference_pose = T_ref_world;
  view.points.reserve(map.points.size());
  for (const MapPoint& mp : map.points) {
    const Vec3 P = T_ref_world.transform(mp.position);
    if (!(P.z() > 0.0)) continue;
    const Vec2 px = project(P, K);
    if (!K.contains(px)) continue;
    view.points.push_back({px, P.z()});
  }
  return view;
}

PreparedTemplate PreparedTemplate::build(TemplateView view, const CameraIntrinsics& K) {
  PreparedTemplate prepared;
  prepared.jacobians.reserve(view.points.size());
  for (const TemplatePoint& p : view.points) {
    prepared.jacobians.push_back(warp_jacobian(p.pixel, p.depth, K));
  }
  prepared.view = std::move(view);
  return prepared;
}

}  // namespace evt
