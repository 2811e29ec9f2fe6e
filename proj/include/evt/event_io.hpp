#pragma once

#include <filesystem>

#include "evt/event.hpp"

namespace evt {

/// Reads an ASCII event file: one event per line, "t_sec x y p" with
/// p in {0,1} (0 is stored as polarity -1). '#' starts a comment line.
/// Throws ParseError (with line number) on malformed lines, out-of-bounds
/// pixels, or timestamps that go backwards.
EventStream parse_events(const std::filesystem::path& path, int width, int height);

/// Writes the inverse format of parse_events, timestamps with
/// microsecond precision. Output is byte-stable for identical streams.
void write_events(const std::filesystem::path& path, const EventStream& stream);

}  // namespace evt
