#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "evt/types.hpp"

namespace evt {

enum class FrameKind { TimeSurface, EventMap, NegativeTimeSurface, NegativeEventMap };

bool is_negative(FrameKind k);
const char* to_string(FrameKind k);

/// Image-type event representation. Values live on the [0, 255] scale but
/// are stored at full double precision; only the raw event map is exactly
/// binary.
struct EventFrame {
  int width = 0;
  int height = 0;
  Timestamp trigger_time = 0;
  FrameKind kind = FrameKind::TimeSurface;
  std::vector<double> values;  // row-major, index y * width + x

  EventFrame() = default;
  EventFrame(int w, int h, Timestamp t, FrameKind k)
      : width(w), height(h), trigger_time(t), kind(k), values(static_cast<std::size_t>(w) * h, 0.0) {}

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Per-pixel 255 - value. Only TS and EM frames may be negated; negating
/// an already-negative frame throws std::invalid_argument.
EventFrame negate(const EventFrame& frame);

/// Separable Gaussian blur with clamped border replication, kernel
/// normalized to sum 1. Accepts only negative frames (the tracker never
/// blurs raw representations). kernel must be odd.
EventFrame gaussian_blur(const EventFrame& frame, int kernel, double sigma);

/// Bilinear interpolation of the four neighbors; exact at integer
/// coordinates. nullopt outside [0, width-1] x [0, height-1].
std::optional<double> bilinear_sample(const EventFrame& frame, const Vec2& p);

/// Central differences of bilinear samples at step 1 pixel. nullopt when
/// p is within 1 pixel of the border.
std::optional<Vec2> image_gradient(const EventFrame& frame, const Vec2& p);

/// Portable graymap dump for visual inspection (binary P5 or ASCII P2).
/// Values are clamped to [0,255] and rounded.
void write_pgm(const std::filesystem::path& path, const EventFrame& frame, bool binary = true);

}  // namespace evt
