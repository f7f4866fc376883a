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

#include "evsr/event_stream.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "evsr/errors.hpp"

namespace evsr
{
namespace
{
constexpr std::uint8_t kMagic[4] = {0x45, 0x56, 0x53, 0x52};  // "EVSR"

void check_geometry(int width, int height)
{
  if (width <= 0 || height <= 0 || width > 0xFFFF || height > 0xFFFF) {
    throw ArgumentError("sensor geometry must be within [1, 65535]");
  }
}

std::string_view trim(std::string_view s)
{
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view s, T & out)
{
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto * end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

void put_u16(std::vector<std::uint8_t> & out, std::uint16_t v)
{
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t> & out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get_u16(const std::uint8_t * p)
{
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t * p)
{
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

EventStream::EventStream(int width, int height, TimeUs duration, std::vector<Event> events)
: width_(width), height_(height), duration_(duration), events_(std::move(events))
{
  check_geometry(width, height);
  if (duration < 0) throw ArgumentError("duration must be non-negative");
  for (const auto & e : events_) {
    if (e.t < 0) throw ArgumentError("negative timestamp");
    if (e.t > duration) throw ArgumentError("timestamp beyond duration");
    if (e.x >= width) throw ArgumentError("x out of range");
    if (e.y >= height) throw ArgumentError("y out of range");
    if (e.p != 1 && e.p != -1) throw ArgumentError("polarity must be +1 or -1");
  }
  if (!std::is_sorted(events_.begin(), events_.end(), canonical_less)) {
    std::sort(events_.begin(), events_.end(), canonical_less);
  }
}

EventStream parse_text(std::string_view text)
{
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  long long width = 0, height = 0;
  TimeUs duration = 0;
  std::vector<Event> events;

  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;

    if (!have_header) {
      std::istringstream in{std::string(line)};
      std::string extra;
      if (!(in >> width >> height >> duration) || (in >> extra)) {
        throw ParseError(line_no, "expected header \"width height duration_us\"");
      }
      if (width <= 0 || height <= 0 || width > 0xFFFF || height > 0xFFFF) {
        throw ParseError(line_no, "sensor geometry must be within [1, 65535]");
      }
      if (duration < 0) throw ParseError(line_no, "negative duration");
      have_header = true;
      continue;
    }

    std::string_view fields[4];
    std::size_t start = 0;
    int n = 0;
    for (; n < 4; ++n) {
      const auto comma = line.find(',', start);
      if (n < 3 && comma == std::string_view::npos) break;
      fields[n] = line.substr(start, n < 3 ? comma - start : std::string_view::npos);
      start = comma + 1;
    }
    if (n != 4 || fields[3].find(',') != std::string_view::npos) {
      throw ParseError(line_no, "expected \"t_us,x,y,p\"");
    }
    long long t = 0, x = 0, y = 0, p = 0;
    if (!parse_number(fields[0], t) || !parse_number(fields[1], x) ||
        !parse_number(fields[2], y) || !parse_number(fields[3], p))
    {
      throw ParseError(line_no, "non-numeric field");
    }
    if (t < 0 || t > duration) throw ParseError(line_no, "t out of range");
    if (x < 0 || x >= width) throw ParseError(line_no, "x out of range");
    if (y < 0 || y >= height) throw ParseError(line_no, "y out of range");
    if (p != 1 && p != -1) throw ParseError(line_no, "polarity must be 1 or -1");
    events.push_back(
      {t, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), static_cast<std::int8_t>(p)});
  }
  if (!have_header) throw ParseError(line_no == 0 ? 1 : line_no, "missing header");
  return EventStream(static_cast<int>(width), static_cast<int>(height), duration, std::move(events));
}

std::string format_text(const EventStream & stream)
{
  std::string out;
  out.reserve(24 + stream.size() * 20);
  out += std::to_string(stream.width()) + ' ' + std::to_string(stream.height()) + ' ' +
         std::to_string(stream.duration()) + '\n';
  for (const auto & e : stream.events()) {
    out += std::to_string(e.t);
    out += ',';
    out += std::to_string(e.x);
    out += ',';
    out += std::to_string(e.y);
    out += ',';
    out += std::to_string(static_cast<int>(e.p));
    out += '\n';
  }
  return out;
}

std::vector<std::uint8_t> write_binary(const EventStream & stream)
{
  constexpr auto u32max = std::numeric_limits<std::uint32_t>::max();
  if (stream.duration() > static_cast<TimeUs>(u32max)) {
    throw ArgumentError("duration does not fit the binary format");
  }
  if (stream.size() > u32max) throw ArgumentError("too many events for the binary format");
  std::vector<std::uint8_t> out;
  out.reserve(kBinaryHeaderSize + stream.size() * kBinaryRecordSize);
  for (std::uint8_t b : kMagic) out.push_back(b);
  put_u16(out, static_cast<std::uint16_t>(stream.width()));
  put_u16(out, static_cast<std::uint16_t>(stream.height()));
  put_u32(out, static_cast<std::uint32_t>(stream.duration()));
  put_u32(out, static_cast<std::uint32_t>(stream.size()));
  for (const auto & e : stream.events()) {
    put_u32(out, static_cast<std::uint32_t>(e.t));
    put_u16(out, e.x);
    put_u16(out, e.y);
    out.push_back(static_cast<std::uint8_t>(e.p));
    out.push_back(0);
  }
  return out;
}

EventStream read_binary(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw FormatError("bad magic");
  }
  if (bytes.size() < kBinaryHeaderSize) throw FormatError("truncated header");
  const auto * p = bytes.data();
  const int width = get_u16(p + 4);
  const int height = get_u16(p + 6);
  const TimeUs duration = get_u32(p + 8);
  const std::uint64_t count = get_u32(p + 12);
  if (width == 0 || height == 0) throw FormatError("zero sensor geometry");
  const std::uint64_t expected = kBinaryHeaderSize + count * kBinaryRecordSize;
  if (bytes.size() < expected) throw FormatError("truncated record");
  if (bytes.size() > expected) throw FormatError("trailing bytes after last record");

  std::vector<Event> events;
  events.reserve(count);
  const std::uint8_t * r = p + kBinaryHeaderSize;
  for (std::uint64_t i = 0; i < count; ++i, r += kBinaryRecordSize) {
    Event e;
    e.t = get_u32(r);
    e.x = get_u16(r + 4);
    e.y = get_u16(r + 6);
    e.p = static_cast<std::int8_t>(r[8]);
    if (r[9] != 0) throw FormatError("nonzero pad byte");
    if (e.t > duration) throw FormatError("timestamp beyond duration");
    if (e.x >= width || e.y >= height) throw FormatError("coordinate out of range");
    if (e.p != 1 && e.p != -1) throw FormatError("invalid polarity");
    if (!events.empty() && canonical_less(e, events.back())) throw FormatError("unsorted payload");
    events.push_back(e);
  }
  return EventStream(width, height, duration, std::move(events));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path & path, std::span<const std::uint8_t> bytes)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed: " + path.string());
}

EventStream load_stream(const std::filesystem::path & path)
{
  const auto bytes = read_file_bytes(path);
  if (path.extension() == ".evsr") return read_binary(bytes);
  return parse_text(std::string_view(reinterpret_cast<const char *>(bytes.data()), bytes.size()));
}

void save_stream(const std::filesystem::path & path, const EventStream & stream)
{
  if (path.extension() == ".evsr") {
    write_file_bytes(path, write_binary(stream));
    return;
  }
  const auto text = format_text(stream);
  write_file_bytes(
    path, std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

EventStream slice(const EventStream & stream, TimeWindow window)
{
  if (window.t0 >= window.t1) throw ArgumentError("window must satisfy t0 < t1");
  if (window.t0 < 0 || window.t1 > stream.duration()) {
    throw ArgumentError("window outside [0, duration]");
  }
  const auto ev = stream.events();
  const auto lo = std::partition_point(ev.begin(), ev.end(), [&](const Event & e) { return e.t < window.t0; });
  const auto hi = std::partition_point(lo, ev.end(), [&](const Event & e) { return e.t < window.t1; });
  std::vector<Event> out(lo, hi);
  for (auto & e : out) e.t -= window.t0;
  return EventStream(stream.width(), stream.height(), window.length(), std::move(out));
}

std::pair<EventStream, EventStream> split_polarity(const EventStream & stream)
{
  std::vector<Event> on, off;
  for (const auto & e : stream.events()) (e.p > 0 ? on : off).push_back(e);
  return {
    EventStream(stream.width(), stream.height(), stream.duration(), std::move(on)),
    EventStream(stream.width(), stream.height(), stream.duration(), std::move(off))};
}

EventStream merge(std::span<const EventStream> streams)
{
  if (streams.empty()) throw ArgumentError("merge needs at least one stream");
  TimeUs duration = 0;
  std::size_t total = 0;
  for (const auto & s : streams) {
    if (!s.same_geometry(streams.front())) throw ArgumentError("geometry mismatch in merge");
    duration = std::max(duration, s.duration());
    total += s.size();
  }
  std::vector<Event> events;
  events.reserve(total);
  for (const auto & s : streams) events.insert(events.end(), s.events().begin(), s.events().end());
  return EventStream(streams.front().width(), streams.front().height(), duration, std::move(events));
}

EventStream merge(std::initializer_list<EventStream> streams)
{
  return merge(std::span<const EventStream>(streams.begin(), streams.size()));
}

EventStream downsample_spatial(const EventStream & stream, int factor)
{
  if (factor < 2) throw ArgumentError("downsample factor must be >= 2");
  if (stream.width() % factor != 0 || stream.height() % factor != 0) {
    throw ArgumentError("sensor geometry not divisible by downsample factor");
  }
  std::vector<Event> events(stream.events().begin(), stream.events().end());
  for (auto & e : events) {
    e.x = static_cast<std::uint16_t>(e.x / factor);
    e.y = static_cast<std::uint16_t>(e.y / factor);
  }
  return EventStream(
    stream.width() / factor, stream.height() / factor, stream.duration(), std::move(events));
}

EventStream shift_time(const EventStream & stream, TimeUs offset, TimeUs duration)
{
  std::vector<Event> events(stream.events().begin(), stream.events().end());
  for (auto & e : events) e.t += offset;
  return EventStream(stream.width(), stream.height(), duration, std::move(events));
}

}  // namespace evsr
