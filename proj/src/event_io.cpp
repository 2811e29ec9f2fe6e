#include "evt/event_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "evt/errors.hpp"

namespace evt {

EventStream parse_events(const std::filesystem::path& path, int width, int height) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open event file: " + path.string());

  std::vector<Event> events;
  std::string line;
  long line_no = 0;
  Timestamp prev = std::numeric_limits<Timestamp>::min();
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream ss(line);
    double t_sec;
    long x, y, p;
    if (!(ss >> t_sec >> x >> y >> p)) throw ParseError("malformed event line", line_no);
    std::string rest;
    if (ss >> rest) throw ParseError("trailing tokens on event line", line_no);
    if (!std::isfinite(t_sec)) throw ParseError("non-finite timestamp", line_no);
    if (x < 0 || x >= width || y < 0 || y >= height) throw ParseError("event pixel out of bounds", line_no);
    if (p != 0 && p != 1) throw ParseError("polarity must be 0 or 1", line_no);

    const Timestamp t = seconds_to_us(t_sec);
    if (t < prev) throw ParseError("timestamps not sorted", line_no);
    prev = t;
    events.push_back({t, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
                      static_cast<std::int8_t>(p == 1 ? 1 : -1)});
  }
  return EventStream(width, height, std::move(events));
}

void write_events(const std::filesystem::path& path, const EventStream& stream) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot write event file: " + path.string());
  for (const Event& e : stream.all()) {
    std::fprintf(f, "%.6f %u %u %d\n", us_to_seconds(e.t), unsigned(e.x), unsigned(e.y),
                 e.polarity > 0 ? 1 : 0);
  }
  std::fclose(f);
}

}  // namespace evt
