// Micro-benchmark of the OpenMP kernels against their serial paths:
// time-surface rendering, Gaussian blur, alignment linearization, and
// synthetic event generation.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "evt/parallel.hpp"
#include "evt/representations.hpp"
#include "evt/simulator.hpp"
#include "evt/tracker.hpp"

using namespace evt;
using Clock = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& f, int reps) {
  f();  // warm up
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / reps;
}

void row(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-24s %10.3f ms %10.3f ms %8.2fx\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms);
}

}  // namespace

int main() {
  const CameraIntrinsics K{200.0, 200.0, 173.0, 130.0, 346, 260};
  const RepresentationConfig repr;
  const TrackerConfig tracker;

  TimeSurfaceState state(K.width, K.height);
  std::vector<Event> events;
  for (int i = 0; i < 200000; ++i) {
    events.push_back({Timestamp(i), std::uint16_t(i * 131 % K.width),
                      std::uint16_t(i * 57 % K.height), 1});
  }
  state.update(events);

  EventFrame noisy(K.width, K.height, 0, FrameKind::NegativeTimeSurface);
  for (std::size_t i = 0; i < noisy.values.size(); ++i) noisy.values[i] = (i * 37) % 256;

  TemplateView view;
  for (int y = 4; y < K.height - 4; y += 2) {
    for (int x = 4; x < K.width - 4; x += 3) view.points.push_back({Vec2(x, y), 3.0});
  }
  const PreparedTemplate tpl = PreparedTemplate::build(view, K);

  const SyntheticScene scene = make_scene(SceneKind::Checkerboard, 7);
  TrajectorySpec spec;
  spec.kind = MotionKind::Planar;
  spec.duration_s = 0.2;
  spec.seed = 7;
  const TrajectorySampler sampler(spec);
  const CameraIntrinsics smallK{200.0, 200.0, 120.0, 90.0, 240, 180};

  struct Bench {
    const char* name;
    std::function<void()> body;
    int reps;
  };
  const Bench benches[] = {
      {"render_time_surface", [&] { (void)render_time_surface(state, 300000, repr); }, 50},
      {"gaussian_blur", [&] { (void)gaussian_blur(noisy, repr); }, 50},
      {"linearize", [&] { (void)linearize(noisy, tpl, PoseSE3(), K, tracker); }, 20},
      {"generate_events",
       [&] { (void)generate_events(scene, sampler, ContrastModel{}, smallK); }, 2},
  };

  std::printf("%-24s %13s %13s %9s   (%d threads)\n", "kernel", "serial", "parallel", "speedup",
              par::max_threads());
  for (const Bench& b : benches) {
    par::set_max_threads(1);
    const double serial = time_ms(b.body, b.reps);
    par::set_max_threads(0);
    const double parallel = time_ms(b.body, b.reps);
    row(b.name, serial, parallel);
  }
  return 0;
}
