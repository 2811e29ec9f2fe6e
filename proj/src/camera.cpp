#include "evt/camera.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "evt/errors.hpp"

namespace evt {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("resolution must be positive");
  if (!(cx > 0.0 && cx < width)) throw std::invalid_argument("cx outside sensor");
  if (!(cy > 0.0 && cy < height)) throw std::invalid_argument("cy outside sensor");
}

CameraIntrinsics CameraIntrinsics::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open calibration file: " + path.string());
  CameraIntrinsics K;
  in >> K.fx >> K.fy >> K.cx >> K.cy >> K.width >> K.height;
  if (!in) throw ParseError("calibration file must contain 'fx fy cx cy width height': " + path.string());
  K.validate();
  return K;
}

void CameraIntrinsics::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write calibration file: " + path.string());
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.9f %.9f %.9f %.9f %d %d\n", fx, fy, cx, cy, width, height);
  out << buf;
}

Vec2 project(const Vec3& P, const CameraIntrinsics& K) {
  if (!(P.z() > 0.0)) throw std::domain_error("project: point has non-positive depth");
  return {K.fx * P.x() / P.z() + K.cx, K.fy * P.y() / P.z() + K.cy};
}

Vec3 back_project(const Vec2& x, double d, const CameraIntrinsics& K) {
  if (!(d > 0.0)) throw std::domain_error("back_project: non-positive depth");
  return {(x.x() - K.cx) / K.fx * d, (x.y() - K.cy) / K.fy * d, d};
}

}  // namespace evt
