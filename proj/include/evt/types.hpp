#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace evt {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat26 = Eigen::Matrix<double, 2, 6>;
using Mat66 = Eigen::Matrix<double, 6, 6>;

/// Timestamps are integer microseconds throughout the library; the text
/// formats use seconds and are converted on the way in/out.
using Timestamp = std::int64_t;

inline constexpr double kMicrosecondsPerSecond = 1e6;

inline Timestamp seconds_to_us(double s) {
  return static_cast<Timestamp>(std::llround(s * kMicrosecondsPerSecond));
}

inline double us_to_seconds(Timestamp t) {
  return static_cast<double>(t) / kMicrosecondsPerSecond;
}

}  // namespace evt
