#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evt/types.hpp"

namespace evt {

/// One brightness-change event. Polarity is +1 or -1.
struct Event {
  Timestamp t;
  std::uint16_t x;
  std::uint16_t y;
  std::int8_t polarity;
};

/// Immutable, time-sorted event sequence bound to a sensor resolution.
class EventStream {
 public:
  EventStream() = default;

  /// Throws std::invalid_argument when events are unsorted or out of
  /// bounds for the given resolution.
  EventStream(int width, int height, std::vector<Event> events);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const Event& operator[](std::size_t i) const { return events_[i]; }
  std::span<const Event> all() const { return events_; }
  const Event& front() const { return events_.front(); }
  const Event& back() const { return events_.back(); }

  /// The up-to-n events immediately preceding (inclusive) t.
  std::span<const Event> last_n(Timestamp t, std::size_t n) const;

  /// All events with t0 < t <= t1.
  std::span<const Event> in_window(Timestamp t0, Timestamp t1) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Event> events_;
};

}  // namespace evt
