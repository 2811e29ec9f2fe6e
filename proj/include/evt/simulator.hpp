#pragma once

#include <optional>
#include <string>
#include <utility>

#include "evt/camera.hpp"
#include "evt/evaluation_types.hpp"
#include "evt/event.hpp"
#include "evt/warp.hpp"

namespace evt {

enum class SceneKind { Office, Poster, Checkerboard };
enum class MotionKind { Planar, SixDof };

SceneKind scene_from_string(const std::string& s);
MotionKind motion_from_string(const std::string& s);
const char* to_string(SceneKind k);
const char* to_string(MotionKind k);

/// Plain intensity grid in [0,1], row-major.
struct ImageGrid {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  ImageGrid() = default;
  ImageGrid(int w, int h) : width(w), height(h), v(static_cast<std::size_t>(w) * h, 0.0) {}
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
};

/// Textured wall. The texture spans extent_x_m x extent_y_m meters,
/// centered on the optical axis of the initial camera, at plane_depth_m
/// in front of it. Texture values stay well above zero so log intensity
/// is always defined.
struct SyntheticScene {
  ImageGrid texture;
  double extent_x_m = 6.0;
  double extent_y_m = 4.5;
  double plane_depth_m = 4.0;

  /// Bilinear sample at physical wall coordinates (meters, origin at the
  /// wall center), clamped to the texture edge.
  double sample(double wx, double wy) const;
};

SyntheticScene make_scene(SceneKind kind, std::uint64_t seed);

struct TrajectorySpec {
  MotionKind kind = MotionKind::Planar;
  double duration_s = 2.0;
  double speed_mps = 0.0;  // 0 selects the per-kind default (0.3 planar / 1.0 six-dof)
  std::uint64_t seed = 1;
  /// Optional frozen interval [begin, end] in seconds: the pose holds
  /// exactly constant inside it and ramps in/out smoothly.
  std::optional<std::pair<double, double>> static_interval_s;
};

/// Smooth (C2) seeded band-limited trajectory, anchored at the identity
/// at t = 0. Planar motion translates parallel to the wall and rotates
/// about the optical axis only; the amplitudes are normalized so the mean
/// speed hits the requested scale.
class TrajectorySampler {
 public:
  explicit TrajectorySampler(const TrajectorySpec& spec);

  /// Camera-in-world pose. Throws std::domain_error outside [0, duration].
  PoseSE3 pose_at(double t_s) const;

  const TrajectorySpec& spec() const { return spec_; }

 private:
  Vec6 coordinates_at(double t_s) const;  // (tx,ty,tz, roll,pitch,yaw)
  double warped_time(double t_s) const;

  TrajectorySpec spec_;
  double speed_ = 0.0;
  double amp_scale_ = 1.0;
  // Per-coordinate sinusoid banks.
  struct Wave {
    double amplitude, freq_hz, phase;
  };
  std::vector<Wave> waves_[6];
};

/// Per-pixel threshold-crossing contrast model of an ideal, noise-free
/// event camera.
struct ContrastModel {
  double threshold = 0.1;      // log-intensity step per event
  Timestamp refractory_us = 0;

  void validate() const;
};

/// Renders the wall as seen from the given camera pose: each pixel ray is
/// intersected with the plane and the texture sampled bilinearly.
ImageGrid render_intensity(const SyntheticScene& scene, const PoseSE3& cam_in_world,
                           const CameraIntrinsics& K);

struct SimulatedSequence {
  EventStream events;
  Trajectory ground_truth;  // camera-in-world, at the pose sampling rate
};

/// Samples the trajectory at sample_rate_hz and emits an event whenever a
/// pixel's log intensity crosses a multiple of the contrast threshold
/// since that pixel's previous event, with timestamps interpolated
/// linearly inside the step. Deterministic given the scene and spec.
/// Throws std::runtime_error when more than 1% of per-pixel steps exceed
/// three thresholds (the sampling rate is too low for interpolation).
SimulatedSequence generate_events(const SyntheticScene& scene, const TrajectorySampler& trajectory,
                                  const ContrastModel& model, const CameraIntrinsics& K,
                                  double sample_rate_hz = 1000.0);

/// Back-projects the wall at every reference pixel whose rendered-image
/// gradient magnitude exceeds gradient_floor, producing a world-frame
/// semi-dense map with exact ray/plane depths and its template view.
/// max_points > 0 keeps only the strongest-gradient points.
std::pair<SemiDenseMap, TemplateView> ground_truth_map(const SyntheticScene& scene,
                                                       const CameraIntrinsics& K,
                                                       const PoseSE3& reference_cam_in_world,
                                                       double gradient_floor,
                                                       int max_points = 0);

/// Map file: one "X Y Z" line per world point.
void save_map(const std::filesystem::path& path, const SemiDenseMap& map);
SemiDenseMap load_map(const std::filesystem::path& path);

}  // namespace evt
