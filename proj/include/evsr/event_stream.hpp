// Copyright 2026 The evsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EVSR_EVENT_STREAM_HPP
#define EVSR_EVENT_STREAM_HPP

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evsr
{
/// Integer microseconds. All stored time is integral.
using TimeUs = std::int64_t;

enum class Polarity : std::int8_t { Off = -1, On = 1 };

inline constexpr std::int8_t sign(Polarity p) { return static_cast<std::int8_t>(p); }

struct Event
{
  TimeUs t = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int8_t p = 1;

  bool operator==(const Event &) const = default;
};

/// Canonical total order: (t, y, x, p) ascending.
inline bool canonical_less(const Event & a, const Event & b)
{
  if (a.t != b.t) return a.t < b.t;
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.p < b.p;
}

/// Half-open interval [t0, t1).
struct TimeWindow
{
  TimeUs t0 = 0;
  TimeUs t1 = 0;

  TimeUs length() const { return t1 - t0; }
  bool contains(TimeUs t) const { return t >= t0 && t < t1; }
};

/// Immutable, validated, canonically ordered event stream.
class EventStream
{
public:
  EventStream() = default;

  /// Validates every event against the geometry and sorts canonically.
  /// Throws ArgumentError on any invariant violation.
  EventStream(int width, int height, TimeUs duration, std::vector<Event> events = {});

  int width() const { return width_; }
  int height() const { return height_; }
  TimeUs duration() const { return duration_; }
  std::span<const Event> events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  bool same_geometry(const EventStream & other) const
  {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool operator==(const EventStream &) const = default;

private:
  int width_ = 1;
  int height_ = 1;
  TimeUs duration_ = 0;
  std::vector<Event> events_;
};

// Text format (.evt): "width height duration_us" header, then "t_us,x,y,p" per line.
EventStream parse_text(std::string_view text);
std::string format_text(const EventStream & stream);

// Binary format (.evsr), little-endian, 16-byte header + 10-byte records.
inline constexpr std::size_t kBinaryHeaderSize = 16;
inline constexpr std::size_t kBinaryRecordSize = 10;
std::vector<std::uint8_t> write_binary(const EventStream & stream);
EventStream read_binary(std::span<const std::uint8_t> bytes);

/// Loads .evsr as binary and anything else as text.
EventStream load_stream(const std::filesystem::path & path);
void save_stream(const std::filesystem::path & path, const EventStream & stream);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path & path);
void write_file_bytes(const std::filesystem::path & path, std::span<const std::uint8_t> bytes);

/// Events with t0 <= t < t1, re-based so the window starts at 0.
EventStream slice(const EventStream & stream, TimeWindow window);

/// (ON events, OFF events); both keep geometry and duration.
std::pair<EventStream, EventStream> split_polarity(const EventStream & stream);

/// Union in canonical order; duration is the maximum input duration.
EventStream merge(std::span<const EventStream> streams);
EventStream merge(std::initializer_list<EventStream> streams);

/// Maps (x, y) -> (x / k, y / k); geometry shrinks by k, events are all kept.
EventStream downsample_spatial(const EventStream & stream, int factor);

/// Same events shifted forward by `offset` on a timeline of the given duration.
EventStream shift_time(const EventStream & stream, TimeUs offset, TimeUs duration);

}  // namespace evsr

#endif  // EVSR_EVENT_STREAM_HPP
