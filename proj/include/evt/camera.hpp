#pragma once

#include <filesystem>

#include "evt/types.hpp"

namespace evt {

/// Pinhole camera with zero distortion. Inputs are assumed rectified.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws std::invalid_argument unless fx,fy > 0 and the principal
  /// point lies strictly inside the sensor.
  void validate() const;

  /// True when p lies in the sampled area [0, width-1] x [0, height-1].
  bool contains(const Vec2& p) const {
    return p.x() >= 0.0 && p.x() <= width - 1.0 && p.y() >= 0.0 && p.y() <= height - 1.0;
  }

  /// Calibration file: one ASCII line "fx fy cx cy width height".
  static CameraIntrinsics load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Projects a camera-frame point onto the image plane.
/// Throws std::domain_error when P.z <= 0. The result may lie outside
/// the image bounds; callers filter.
Vec2 project(const Vec3& P, const CameraIntrinsics& K);

/// Back-projects pixel x at depth d into the camera frame; the returned
/// point has z == d. Throws std::domain_error when d <= 0.
Vec3 back_project(const Vec2& x, double d, const CameraIntrinsics& K);

}  // namespace evt
