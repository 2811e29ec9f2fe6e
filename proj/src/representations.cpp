#include "evt/representations.hpp"

#include <cmath>
#include <stdexcept>

#include "evt/parallel.hpp"

namespace evt {

void RepresentationConfig::validate() const {
  if (!(delta_ms > 0.0)) throw std::invalid_argument("delta must be positive");
  if (em_event_count <= 0) throw std::invalid_argument("em_event_count must be positive");
  if (!(ts_period_ms > 0.0)) throw std::invalid_argument("ts_period must be positive");
  if (blur_kernel < 1 || blur_kernel % 2 == 0) throw std::invalid_argument("blur_kernel must be odd");
  if (!(blur_sigma > 0.0)) throw std::invalid_argument("blur_sigma must be positive");
}

TimeSurfaceState::TimeSurfaceState(int width, int height)
    : width_(width), height_(height), t_last_(static_cast<std::size_t>(width) * height, -1) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("TimeSurfaceState: bad resolution");
}

void TimeSurfaceState::update(std::span<const Event> events) {
  for (const Event& e : events) {
    if (e.x >= width_ || e.y >= height_) throw std::invalid_argument("update: event out of bounds");
    Timestamp& slot = t_last_[static_cast<std::size_t>(e.y) * width_ + e.x];
    if (e.t > slot) slot = e.t;
    if (e.t > latest_) latest_ = e.t;
  }
}

EventFrame render_time_surface(const TimeSurfaceState& state, Timestamp t,
                               const RepresentationConfig& cfg) {
  if (t < state.latest()) throw std::domain_error("render_time_surface: t precedes the latest event");
  EventFrame frame(state.width(), state.height(), t, FrameKind::TimeSurface);
  const double delta_us = cfg.delta_ms * 1e3;
  const int w = state.width(), h = state.height();
#ifdef EVT_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) if (par::enabled())
#endif
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Timestamp last = state.last_at(x, y);
      if (last < 0) continue;  // never fired -> 0
      const double age_us = static_cast<double>(t - last);
      frame.at(x, y) = std::round(255.0 * std::exp(-age_us / delta_us));
    }
  }
  return frame;
}

EventFrame render_event_map(std::span<const Event> events, int width, int height) {
  if (events.empty()) throw std::invalid_argument("render_event_map: empty event batch");
  EventFrame frame(width, height, events.back().t, FrameKind::EventMap);
  for (const Event& e : events) {
    if (e.x >= width || e.y >= height) throw std::invalid_argument("render_event_map: event out of bounds");
    frame.at(e.x, e.y) = 255.0;
  }
  return frame;
}

EventFrame gaussian_blur(const EventFrame& frame, const RepresentationConfig& cfg) {
  return gaussian_blur(frame, cfg.blur_kernel, cfg.blur_sigma);
}

}  // namespace evt
