#include "evt/event.hpp"

#include <algorithm>
#include <stdexcept>

namespace evt {

EventStream::EventStream(int width, int height, std::vector<Event> events)
    : width_(width), height_(height), events_(std::move(events)) {
  if (width_ <= 0 || height_ <= 0) throw std::invalid_argument("EventStream: bad resolution");
  Timestamp prev = std::numeric_limits<Timestamp>::min();
  for (const Event& e : events_) {
    if (e.t < prev) throw std::invalid_argument("EventStream: timestamps not sorted");
    if (e.x >= width_ || e.y >= height_) throw std::invalid_argument("EventStream: event out of bounds");
    prev = e.t;
  }
}

std::span<const Event> EventStream::last_n(Timestamp t, std::size_t n) const {
  if (n == 0) throw std::invalid_argument("last_n: n must be positive");
  auto end = std::upper_bound(events_.begin(), events_.end(), t,
                              [](Timestamp v, const Event& e) { return v < e.t; });
  const std::size_t count = static_cast<std::size_t>(end - events_.begin());
  const std::size_t take = std::min(count, n);
  return {events_.data() + (count - take), take};
}

std::span<const Event> EventStream::in_window(Timestamp t0, Timestamp t1) const {
  if (t0 > t1) throw std::invalid_argument("in_window: t0 > t1");
  auto lo = std::upper_bound(events_.begin(), events_.end(), t0,
                             [](Timestamp v, const Event& e) { return v < e.t; });
  auto hi = std::upper_bound(events_.begin(), events_.end(), t1,
                             [](Timestamp v, const Event& e) { return v < e.t; });
  return {events_.data() + (lo - events_.begin()), static_cast<std::size_t>(hi - lo)};
}

}  // namespace evt
