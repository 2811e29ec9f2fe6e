#pragma once

#include <span>

#include "evt/event.hpp"
#include "evt/frame.hpp"

namespace evt {

/// Parameters of the image-type representations. Defaults follow the
/// standard operating point: 30 ms decay, 4000-event maps, 10 ms
/// synchronous triggers, 5-tap blur.
struct RepresentationConfig {
  double delta_ms = 30.0;      // exponential decay rate of the time surface
  int em_event_count = 4000;   // events aggregated per event map
  double ts_period_ms = 10.0;  // synchronous time-surface trigger period
  int blur_kernel = 5;
  double blur_sigma = 1.0;

  void validate() const;
};

/// Per-pixel timestamp of the most recent event. -1 means "never fired".
class TimeSurfaceState {
 public:
  TimeSurfaceState(int width, int height);

  /// Folds a sorted batch of in-bounds events into the state; each pixel
  /// keeps the max of its previous timestamp and the new ones.
  void update(std::span<const Event> events);

  int width() const { return width_; }
  int height() const { return height_; }
  Timestamp last_at(int x, int y) const { return t_last_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const Timestamp> raw() const { return t_last_; }

  /// Largest timestamp folded in so far; -1 when nothing fired yet.
  Timestamp latest() const { return latest_; }

 private:
  int width_;
  int height_;
  Timestamp latest_ = -1;
  std::vector<Timestamp> t_last_;
};

/// Renders the time surface at time t: each fired pixel gets
/// round(255 * exp(-(t - t_last)/delta)); never-fired pixels are 0.
/// Throws std::domain_error when t precedes the latest folded event.
EventFrame render_time_surface(const TimeSurfaceState& state, Timestamp t,
                               const RepresentationConfig& cfg);

/// Renders the binary event map of a batch: 255 where at least one event
/// fired, 0 elsewhere. trigger_time is the batch's last timestamp.
/// Throws std::invalid_argument on an empty batch.
EventFrame render_event_map(std::span<const Event> events, int width, int height);

/// gaussian_blur with the kernel taken from the config.
EventFrame gaussian_blur(const EventFrame& frame, const RepresentationConfig& cfg);

}  // namespace evt
