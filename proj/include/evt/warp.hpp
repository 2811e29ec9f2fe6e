#pragma once

#include <optional>
#include <vector>

#include "evt/camera.hpp"
#include "evt/se3.hpp"
#include "evt/types.hpp"

namespace evt {

/// 3D point of the semi-dense map, world frame, meters.
struct MapPoint {
  Vec3 position;
};

struct SemiDenseMap {
  std::vector<MapPoint> points;
};

/// Template entry: pixel in the reference image plus its depth there.
struct TemplatePoint {
  Vec2 pixel;
  double depth;
};

/// Projection of the semi-dense map into a reference camera.
struct TemplateView {
  PoseSE3 reference_pose;  // world -> reference camera
  std::vector<TemplatePoint> points;
};

/// Transfers a template entry into the current frame:
/// pi(T_cur_ref * pi^-1(x, d)). Returns nullopt when the transformed
/// point falls behind the camera; callers drop the residual.
std::optional<Vec2> warp(const Vec2& x, double d, const PoseSE3& T_cur_ref,
                         const CameraIntrinsics& K);

/// 2x6 Jacobian of the warp with respect to the tangent increment,
/// evaluated at zero increment. Depends only on the template entry, so it
/// can be computed once per template and reused every iteration.
Mat26 warp_jacobian(const Vec2& x, double d, const CameraIntrinsics& K);

/// Projects the world-frame map into the reference camera, keeping points
/// that land inside the image with positive depth.
TemplateView make_template(const SemiDenseMap& map, const PoseSE3& T_ref_world,
                           const CameraIntrinsics& K);

/// Template plus per-point warp Jacobians, ready for alignment.
struct PreparedTemplate {
  TemplateView view;
  std::vector<Mat26> jacobians;

  static PreparedTemplate build(TemplateView view, const CameraIntrinsics& K);
};

}  // namespace evt
