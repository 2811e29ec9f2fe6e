#include "evt/simulator.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "evt/errors.hpp"
#include "evt/parallel.hpp"

namespace evt {

SceneKind scene_from_string(const std::string& s) {
  if (s == "office") return SceneKind::Office;
  if (s == "poster") return SceneKind::Poster;
  if (s == "checkerboard") return SceneKind::Checkerboard;
  throw std::invalid_argument("unknown scene: " + s);
}

MotionKind motion_from_string(const std::string& s) {
  if (s == "planar") return MotionKind::Planar;
  if (s == "6dof") return MotionKind::SixDof;
  throw std::invalid_argument("unknown motion: " + s);
}

const char* to_string(SceneKind k) {
  switch (k) {
    case SceneKind::Office: return "office";
    case SceneKind::Poster: return "poster";
    case SceneKind::Checkerboard: return "checkerboard";
  }
  return "?";
}

const char* to_string(MotionKind k) {
  return k == MotionKind::Planar ? "planar" : "6dof";
}

double SyntheticScene::sample(double wx, double wy) const {
  const double u = (wx / extent_x_m + 0.5) * (texture.width - 1);
  const double v = (wy / extent_y_m + 0.5) * (texture.height - 1);
  const double x = std::clamp(u, 0.0, texture.width - 1.0);
  const double y = std::clamp(v, 0.0, texture.height - 1.0);
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, texture.width - 1);
  const int y1 = std::min(y0 + 1, texture.height - 1);
  const double fx = x - x0, fy = y - y0;
  return (1.0 - fy) * ((1.0 - fx) * texture.at(x0, y0) + fx * texture.at(x1, y0)) +
         fy * ((1.0 - fx) * texture.at(x0, y1) + fx * texture.at(x1, y1));
}

namespace {

constexpr int kTexWidth = 1024;
constexpr int kTexHeight = 768;
constexpr double kTexLo = 0.15;
constexpr double kTexHi = 0.95;

// Texture-space optics emulation: smoothing the wall texture keeps each
// pixel's intensity transition wider than the pixel pitch, so event
// firing stays continuous while an edge sweeps past (point-sampled hard
// edges would pulse pixel by pixel and drag the time surface behind the
// true edge).
void smooth_texture(ImageGrid& tex, double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + r];
  }
  for (double& v : k) v /= sum;
  ImageGrid tmp(tex.width, tex.height);
  for (int y = 0; y < tex.height; ++y) {
    for (int x = 0; x < tex.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tex.at(std::clamp(x + i, 0, tex.width - 1), y);
      tmp.at(x, y) = acc;
    }
  }
  for (int y = 0; y < tex.height; ++y) {
    for (int x = 0; x < tex.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.at(x, std::clamp(y + i, 0, tex.height - 1));
      tex.at(x, y) = acc;
    }
  }
}

ImageGrid checkerboard_texture(std::uint64_t seed) {
  // 0.5 m squares on the 6 x 4.5 m wall.
  ImageGrid tex(kTexWidth, kTexHeight);
  std::mt19937_64 rng(seed);
  const int phase = static_cast<int>(rng() % 2);
  const double sq_px = kTexWidth / 12.0;
  for (int y = 0; y < kTexHeight; ++y) {
    for (int x = 0; x < kTexWidth; ++x) {
      const int cx = static_cast<int>(x / sq_px);
      const int cy = static_cast<int>(y / sq_px);
      tex.at(x, y) = ((cx + cy + phase) % 2 == 0) ? kTexLo : kTexHi;
    }
  }
  return tex;
}

ImageGrid poster_texture(std::uint64_t seed) {
  // Multi-octave value noise: natural-image-like structure with enough
  // high-frequency content to survive the optics smoothing.
  ImageGrid tex(kTexWidth, kTexHeight);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int octaves[] = {8, 16, 32, 64};
  const double weights[] = {0.7, 1.0, 0.9, 0.6};
  for (int o = 0; o < 4; ++o) {
    const int gw = octaves[o] + 1, gh = octaves[o] + 1;
    std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
    for (double& g : grid) g = uni(rng);
    for (int y = 0; y < kTexHeight; ++y) {
      for (int x = 0; x < kTexWidth; ++x) {
        const double gx = static_cast<double>(x) / (kTexWidth - 1) * (gw - 1);
        const double gy = static_cast<double>(y) / (kTexHeight - 1) * (gh - 1);
        const int x0 = std::min(static_cast<int>(gx), gw - 2);
        const int y0 = std::min(static_cast<int>(gy), gh - 2);
        const double fx = gx - x0, fy = gy - y0;
        const double s = (1 - fy) * ((1 - fx) * grid[y0 * gw + x0] + fx * grid[y0 * gw + x0 + 1]) +
                         fy * ((1 - fx) * grid[(y0 + 1) * gw + x0] + fx * grid[(y0 + 1) * gw + x0 + 1]);
        tex.at(x, y) += weights[o] * s;
      }
    }
  }
  double lo = 1e9, hi = -1e9;
  for (double v : tex.v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Posterize into flat regions: the level-set boundaries of the noise
  // become sharp, naturally-shaped edges.
  const int levels = 5;
  for (double& v : tex.v) {
    const double u = (v - lo) / (hi - lo);
    const double q = std::min(static_cast<double>(levels - 1), std::floor(u * levels)) / (levels - 1);
    v = kTexLo + (0.85 * q + 0.15 * u) * (kTexHi - kTexLo);
  }
  return tex;
}

ImageGrid office_texture(std::uint64_t seed) {
  // Cluttered rectangles with borders over a mid-grey background:
  // shelves, monitors, posters.
  ImageGrid tex(kTexWidth, kTexHeight);
  for (double& v : tex.v) v = 0.45;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int n_rects = 28;
  const int unit = std::max(1, kTexWidth / 512);
  for (int r = 0; r < n_rects; ++r) {
    const int w = (20 + static_cast<int>(uni(rng) * 120)) * unit;
    const int h = (20 + static_cast<int>(uni(rng) * 100)) * unit;
    const int x0 = static_cast<int>(uni(rng) * (kTexWidth - w));
    const int y0 = static_cast<int>(uni(rng) * (kTexHeight - h));
    const double fill = kTexLo + uni(rng) * (kTexHi - kTexLo);
    const double border = uni(rng) < 0.5 ? kTexLo : kTexHi;
    const int bw = 3 * unit;
    for (int y = y0; y < y0 + h; ++y) {
      for (int x = x0; x < x0 + w; ++x) {
        const bool edge =
            (x - x0 < bw) || (x0 + w - 1 - x < bw) || (y - y0 < bw) || (y0 + h - 1 - y < bw);
        tex.at(x, y) = edge ? border : fill;
      }
    }
  }
  return tex;
}

}  // namespace

SyntheticScene make_scene(SceneKind kind, std::uint64_t seed) {
  SyntheticScene scene;
  switch (kind) {
    case SceneKind::Checkerboard: scene.texture = checkerboard_texture(seed); break;
    case SceneKind::Poster: scene.texture = poster_texture(seed); break;
    case SceneKind::Office: scene.texture = office_texture(seed); break;
  }
  smooth_texture(scene.texture, 2.5);
  return scene;
}

// ---------------------------------------------------------------------------
// Trajectory

namespace {

// Smoothstep ramp integral helpers for the frozen interval: s(t) advances
// at unit rate outside the interval, is constant inside, and blends with
// C1 ramps of width kRampWidth on both sides (so poses stay C2 in t).
constexpr double kRampWidth = 0.15;  // seconds

// Integral of the smoothstep 3u^2 - 2u^3 from 0 to u.
double smoothstep_integral(double u) { return u * u * u - 0.5 * u * u * u * u; }

}  // namespace

TrajectorySampler::TrajectorySampler(const TrajectorySpec& spec) : spec_(spec) {
  if (!(spec.duration_s > 0.0)) throw std::invalid_argument("trajectory duration must be positive");
  if (spec.static_interval_s) {
    const auto [b, e] = *spec.static_interval_s;
    if (!(b >= kRampWidth && e > b && e + kRampWidth <= spec.duration_s)) {
      throw std::invalid_argument("static interval must leave room for the blend ramps");
    }
  }
  const double default_speed = spec.kind == MotionKind::Planar ? 0.3 : 1.0;
  speed_ = spec.speed_mps > 0.0 ? spec.speed_mps : default_speed;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  // Band-limited sinusoid banks per coordinate. Rotation rates are kept
  // low so the slow regime stays translation-dominated (fast rotation
  // sweeps the periphery at many pixels per decay constant and starves
  // the time surface), and they scale with the speed so a near-zero
  // speed freezes the rig completely.
  const double rot_amp =
      (spec.kind == MotionKind::Planar ? 0.02 : 0.05) * (speed_ / default_speed);
  for (int c = 0; c < 6; ++c) {
    const bool is_rotation = c >= 3;
    const bool active = spec.kind == MotionKind::SixDof
                            ? true
                            : (c == 0 || c == 1 || c == 5);  // x, y, yaw about z
    if (!active) continue;
    const int n_waves = 3;
    for (int w = 0; w < n_waves; ++w) {
      Wave wave;
      wave.freq_hz = 0.2 + uni(rng) * 1.0;
      wave.phase = uni(rng) * 2.0 * M_PI;
      wave.amplitude = (0.5 + uni(rng)) * (is_rotation ? rot_amp : 1.0);
      waves_[c].push_back(wave);
    }
  }

  // Normalize translation amplitudes so the mean speed over the run
  // matches speed_. Uses the un-warped clock; the frozen interval then
  // lowers the realized mean, which stays within the accepted band.
  const int probes = 2000;
  double mean_speed = 0.0;
  const double dt = spec.duration_s / probes;
  amp_scale_ = 1.0;
  for (int i = 0; i < probes; ++i) {
    const double t0 = i * dt, t1 = (i + 1) * dt;
    Vec3 p0, p1;
    for (int c = 0; c < 3; ++c) {
      double v0 = 0.0, v1 = 0.0;
      for (const Wave& w : waves_[c]) {
        v0 += w.amplitude * (std::sin(2.0 * M_PI * w.freq_hz * t0 + w.phase) - std::sin(w.phase));
        v1 += w.amplitude * (std::sin(2.0 * M_PI * w.freq_hz * t1 + w.phase) - std::sin(w.phase));
      }
      p0[c] = v0;
      p1[c] = v1;
    }
    mean_speed += (p1 - p0).norm() / dt;
  }
  mean_speed /= probes;
  if (mean_speed > 1e-12) amp_scale_ = speed_ / mean_speed;
}

double TrajectorySampler::warped_time(double t_s) const {
  if (!spec_.static_interval_s) return t_s;
  const double b = spec_.static_interval_s->first;
  const double e = spec_.static_interval_s->second;
  const double w = kRampWidth;
  // velocity factor: 1 before b-w, smoothstep down to 0 at b, 0 inside
  // [b, e], smoothstep back to 1 at e+w.
  auto advance = [&](double t) {
    double s = std::min(t, b - w);
    if (t <= b - w) return s;
    const double u1 = std::clamp((t - (b - w)) / w, 0.0, 1.0);
    s += w * (u1 - smoothstep_integral(u1));
    if (t <= e) return s;
    const double u2 = std::clamp((t - e) / w, 0.0, 1.0);
    s += w * smoothstep_integral(u2);
    if (t <= e + w) return s;
    return s + (t - (e + w));
  };
  return advance(t_s);
}

Vec6 TrajectorySampler::coordinates_at(double t_s) const {
  const double s = warped_time(t_s);
  Vec6 c = Vec6::Zero();
  for (int i = 0; i < 6; ++i) {
    for (const Wave& w : waves_[i]) {
      c[i] += w.amplitude * (std::sin(2.0 * M_PI * w.freq_hz * s + w.phase) - std::sin(w.phase));
    }
    if (i < 3) c[i] *= amp_scale_;
  }
  return c;
}

PoseSE3 TrajectorySampler::pose_at(double t_s) const {
  if (t_s < 0.0 || t_s > spec_.duration_s + 1e-12) {
    throw std::domain_error("pose_at: time outside trajectory duration");
  }
  const Vec6 c = coordinates_at(t_s);
  Mat4 T = Mat4::Identity();
  if (spec_.kind == MotionKind::Planar) {
    // SE(2) embedded in the wall-parallel plane: translation (x, y) and
    // rotation about the optical axis. The out-of-plane entries are
    // exactly zero by construction.
    const double yaw = c[5];
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    T(0, 0) = cy; T(0, 1) = -sy;
    T(1, 0) = sy; T(1, 1) = cy;
    T(0, 3) = c[0];
    T(1, 3) = c[1];
  } else {
    const Mat3 R = (Eigen::AngleAxisd(c[5], Vec3::UnitZ()) *
                    Eigen::AngleAxisd(c[4], Vec3::UnitY()) *
                    Eigen::AngleAxisd(c[3], Vec3::UnitX()))
                       .toRotationMatrix();
    T.block<3, 3>(0, 0) = R;
    T.block<3, 1>(0, 3) = c.head<3>();
  }
  return PoseSE3::from_matrix(T);
}

// ---------------------------------------------------------------------------
// Rendering and event generation

void ContrastModel::validate() const {
  if (!(threshold > 0.0)) throw std::invalid_argument("contrast threshold must be positive");
  if (refractory_us < 0) throw std::invalid_argument("refractory period must be non-negative");
}

namespace {

// Renders log intensity straight into `out` (size width*height).
void render_log_intensity(const SyntheticScene& scene, const PoseSE3& cam_in_world,
                          const CameraIntrinsics& K, std::vector<double>& out) {
  const Mat3 R = cam_in_world.rotation();
  const Vec3 o = cam_in_world.translation();
  const double plane_z = scene.plane_depth_m;
  const int w = K.width, h = K.height;
#ifdef EVT_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) if (par::enabled())
#endif
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec3 ray((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
      const Vec3 d = R * ray;
      double value = kTexLo;
      if (d.z() > 1e-9) {
        const double s = (plane_z - o.z()) / d.z();
        if (s > 0.0) {
          const Vec3 W = o + s * d;
          value = scene.sample(W.x(), W.y());
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = std::log(value);
    }
  }
}

}  // namespace

ImageGrid render_intensity(const SyntheticScene& scene, const PoseSE3& cam_in_world,
                           const CameraIntrinsics& K) {
  ImageGrid img(K.width, K.height);
  std::vector<double> logs(img.v.size());
  render_log_intensity(scene, cam_in_world, K, logs);
  for (std::size_t i = 0; i < logs.size(); ++i) img.v[i] = std::exp(logs[i]);
  return img;
}

SimulatedSequence generate_events(const SyntheticScene& scene, const TrajectorySampler& trajectory,
                                  const ContrastModel& model, const CameraIntrinsics& K,
                                  double sample_rate_hz) {
  model.validate();
  K.validate();
  if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");

  const int w = K.width, h = K.height;
  const std::size_t n_px = static_cast<std::size_t>(w) * h;
  const double duration = trajectory.spec().duration_s;
  const int steps = static_cast<int>(std::floor(duration * sample_rate_hz));
  const double dt = 1.0 / sample_rate_hz;
  const double C = model.threshold;

  std::vector<double> log_prev(n_px), log_cur(n_px);
  std::vector<double> ref_level(n_px);
  // initial value keeps t - last_event >= refractory for the first event
  // without overflowing
  std::vector<Timestamp> last_event(n_px, -(model.refractory_us + 1));
  std::vector<std::vector<Event>> row_events(h);

  render_log_intensity(scene, trajectory.pose_at(0.0), K, log_prev);
  ref_level = log_prev;

  Trajectory gt;
  gt.push_back({0, trajectory.pose_at(0.0)});

  std::vector<long> row_violations(h, 0);

  for (int k = 1; k <= steps; ++k) {
    const double t0 = (k - 1) * dt;
    const double t1 = k * dt;
    const PoseSE3 pose_k = trajectory.pose_at(t1);
    render_log_intensity(scene, pose_k, K, log_cur);
    gt.push_back({seconds_to_us(t1), pose_k});

#ifdef EVT_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) if (par::enabled())
#endif
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const double l0 = log_prev[i];
        const double l1 = log_cur[i];
        if (std::abs(l1 - l0) >= 3.0 * C) ++row_violations[y];
        double& ref = ref_level[i];
        while (std::abs(l1 - ref) >= C) {
          const int sign = l1 > ref ? 1 : -1;
          ref += sign * C;
          double f = 1.0;
          if (std::abs(l1 - l0) > 1e-15) f = std::clamp((ref - l0) / (l1 - l0), 0.0, 1.0);
          const Timestamp t = seconds_to_us(t0 + f * dt);
          if (t - last_event[i] >= model.refractory_us) {
            row_events[y].push_back({t, static_cast<std::uint16_t>(x),
                                     static_cast<std::uint16_t>(y),
                                     static_cast<std::int8_t>(sign)});
            last_event[i] = t;
          }
        }
      }
    }
    std::swap(log_prev, log_cur);
  }

  long violations = 0;
  for (long v : row_violations) violations += v;
  const long total = static_cast<long>(n_px) * steps;
  if (total > 0 && violations > total / 100) {
    throw std::runtime_error(
        "generate_events: log-intensity steps exceed 3x threshold on more than 1% of pixels; "
        "increase the sampling rate");
  }

  std::vector<Event> events;
  std::size_t count = 0;
  for (const auto& row : row_events) count += row.size();
  events.reserve(count);
  for (auto& row : row_events) {
    events.insert(events.end(), row.begin(), row.end());
    row.clear();
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });

  return {EventStream(w, h, std::move(events)), std::move(gt)};
}

std::pair<SemiDenseMap, TemplateView> ground_truth_map(const SyntheticScene& scene,
                                                       const CameraIntrinsics& K,
                                                       const PoseSE3& reference_cam_in_world,
                                                       double gradient_floor,
                                                       int max_points) {
  const ImageGrid img = render_intensity(scene, reference_cam_in_world, K);
  const Mat3 R = reference_cam_in_world.rotation();
  const Vec3 o = reference_cam_in_world.translation();

  struct Candidate {
    int x, y;
    double grad;
  };
  std::vector<Candidate> candidates;
  for (int y = 1; y < K.height - 1; ++y) {
    for (int x = 1; x < K.width - 1; ++x) {
      const double gx = (img.at(x + 1, y) - img.at(x - 1, y)) * 0.5;
      const double gy = (img.at(x, y + 1) - img.at(x, y - 1)) * 0.5;
      const double g = std::sqrt(gx * gx + gy * gy);
      if (g >= gradient_floor) candidates.push_back({x, y, g});
    }
  }
  if (max_points > 0 && static_cast<int>(candidates.size()) > max_points) {
    std::nth_element(candidates.begin(), candidates.begin() + max_points, candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.grad > b.grad; });
    candidates.resize(max_points);
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
  }

  SemiDenseMap map;
  TemplateView view;
  view.reference_pose = reference_cam_in_world.inverse();
  for (const Candidate& c : candidates) {
    const Vec3 ray((c.x - K.cx) / K.fx, (c.y - K.cy) / K.fy, 1.0);
    const Vec3 d = R * ray;
    if (!(d.z() > 1e-9)) continue;
    const double s = (scene.plane_depth_m - o.z()) / d.z();
    if (!(s > 0.0)) continue;
    map.points.push_back({o + s * d});
    // Depth along the optical axis equals s because the ray has unit z in
    // the camera frame.
    view.points.push_back({Vec2(c.x, c.y), s});
  }
  return {std::move(map), std::move(view)};
}

void save_map(const std::filesystem::path& path, const SemiDenseMap& map) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot write map file: " + path.string());
  for (const MapPoint& p : map.points) {
    std::fprintf(f, "%.9f %.9f %.9f\n", p.position.x(), p.position.y(), p.position.z());
  }
  std::fclose(f);
}

SemiDenseMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open map file: " + path.string());
  SemiDenseMap map;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    Vec3 p;
    if (!(ss >> p.x() >> p.y() >> p.z())) throw ParseError("malformed map line", line_no);
    if (!p.allFinite()) throw ParseError("non-finite map point", line_no);
    map.points.push_back({p});
  }
  return map;
}

}  // namespace evt
