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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "evsr/errors.hpp"
#include "evsr/event_stream.hpp"

using namespace evsr;

namespace
{
EventStream random_stream(std::mt19937_64 & gen, int w, int h, TimeUs duration, std::size_t n)
{
  std::uniform_int_distribution<int> xd(0, w - 1), yd(0, h - 1), pd(0, 1);
  std::uniform_int_distribution<TimeUs> td(0, duration);
  std::vector<Event> ev;
  for (std::size_t i = 0; i < n; ++i) {
    ev.push_back({td(gen), static_cast<std::uint16_t>(xd(gen)), static_cast<std::uint16_t>(yd(gen)),
                  static_cast<std::int8_t>(pd(gen) ? 1 : -1)});
  }
  return EventStream(w, h, duration, ev);
}

}  // namespace

TEST_CASE("construction validates and sorts canonically")
{
  EventStream s(4, 4, 100, {{50, 1, 2, 1}, {10, 3, 0, -1}, {10, 0, 1, 1}, {10, 0, 1, -1}});
  const std::vector<Event> expected{{10, 3, 0, -1}, {10, 0, 1, -1}, {10, 0, 1, 1}, {50, 1, 2, 1}};
  CHECK(std::vector<Event>(s.events().begin(), s.events().end()) == expected);

  CHECK_THROWS_AS(EventStream(4, 4, 100, {{101, 0, 0, 1}}), ArgumentError);
  CHECK_THROWS_AS(EventStream(4, 4, 100, {{-1, 0, 0, 1}}), ArgumentError);
  CHECK_THROWS_AS(EventStream(4, 4, 100, {{0, 4, 0, 1}}), ArgumentError);
  CHECK_THROWS_AS(EventStream(4, 4, 100, {{0, 0, 4, 1}}), ArgumentError);
  CHECK_THROWS_AS(EventStream(4, 4, 100, {{0, 0, 0, 0}}), ArgumentError);
  CHECK_THROWS_AS(EventStream(0, 4, 100), ArgumentError);
  CHECK_NOTHROW(EventStream(4, 4, 100, {{100, 0, 0, 1}}));
}

TEST_CASE("any permutation of an event multiset serializes identically")
{
  std::mt19937_64 gen(3);
  const auto s = random_stream(gen, 16, 8, 1000, 300);
  std::vector<Event> shuffled(s.events().begin(), s.events().end());
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  CHECK(write_binary(EventStream(16, 8, 1000, shuffled)) == write_binary(s));
}

TEST_CASE("parse_text")
{
  SUBCASE("single event")
  {
    const auto s = parse_text("128 128 200000\n1000,3,4,1\n");
    CHECK(s.width() == 128);
    CHECK(s.height() == 128);
    CHECK(s.duration() == 200000);
    REQUIRE(s.size() == 1);
    CHECK(s.events()[0] == Event{1000, 3, 4, 1});
  }
  SUBCASE("header only")
  {
    CHECK(parse_text("128 128 200000\n").empty());
  }
  SUBCASE("errors carry the line number")
  {
    try {
      parse_text("128 128 200000\n1000,3,4,1\n1000,200,4,1\n");
      FAIL("expected a parse error");
    } catch (const ParseError & e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()) == "line 3: x out of range");
    }
    CHECK_THROWS_AS(parse_text(""), ParseError);
    CHECK_THROWS_AS(parse_text("4 4 10\n1,1,1,0\n"), ParseError);
    CHECK_THROWS_AS(parse_text("4 4 10\n1,1,1\n"), ParseError);
    CHECK_THROWS_AS(parse_text("4 4 10\n1,1,1,1,1\n"), ParseError);
    CHECK_THROWS_AS(parse_text("4 4 10\na,1,1,1\n"), ParseError);
    CHECK_THROWS_AS(parse_text("4 4 10\n11,1,1,1\n"), ParseError);
    CHECK_THROWS_AS(parse_text("4 4\n"), ParseError);
  }
  SUBCASE("format round trip")
  {
    std::mt19937_64 gen(11);
    const auto s = random_stream(gen, 32, 20, 5000, 200);
    CHECK(parse_text(format_text(s)) == s);
  }
}

TEST_CASE("binary layout")
{
  SUBCASE("empty stream is a bare header")
  {
    const auto bytes = write_binary(EventStream(128, 128, 200000));
    const std::vector<std::uint8_t> expected{
      'E', 'V', 'S', 'R', 0x80, 0x00, 0x80, 0x00, 0x40, 0x0D, 0x03, 0x00, 0x00, 0x00, 0x00, 0x00};
    CHECK(bytes == expected);
  }
  SUBCASE("one record")
  {
    const auto bytes = write_binary(EventStream(300, 2, 70000, {{66000, 258, 1, -1}}));
    const std::vector<std::uint8_t> expected{
      'E', 'V', 'S', 'R', 0x2C, 0x01, 0x02, 0x00, 0x70, 0x11, 0x01, 0x00, 0x01, 0x00, 0x00, 0x00,
      0xD0, 0x01, 0x01, 0x00, 0x02, 0x01, 0x01, 0x00, 0xFF, 0x00};
    CHECK(bytes == expected);
    CHECK(read_binary(bytes).events()[0] == Event{66000, 258, 1, -1});
  }
  SUBCASE("round trip both ways")
  {
    std::mt19937_64 gen(5);
    for (int i = 0; i < 20; ++i) {
      const auto s = random_stream(gen, 1 + i * 7, 1 + i * 3, 1 + i * 1000, static_cast<std::size_t>(i * 13));
      const auto bytes = write_binary(s);
      CHECK(bytes.size() == kBinaryHeaderSize + s.size() * kBinaryRecordSize);
      CHECK(read_binary(bytes) == s);
      CHECK(write_binary(read_binary(bytes)) == bytes);
    }
  }
}

TEST_CASE("binary errors")
{
  const auto good = write_binary(EventStream(4, 4, 100, {{1, 0, 0, 1}, {2, 1, 1, -1}}));
  auto expect_format = [](std::vector<std::uint8_t> bytes, const std::string & msg) {
    try {
      read_binary(bytes);
      FAIL("expected a format error");
    } catch (const FormatError & e) {
      CHECK(std::string(e.what()) == msg);
    }
  };
  auto bad = good;
  bad[0] = 'X';
  bad[1] = 'X';
  bad[2] = 'X';
  bad[3] = 'X';
  expect_format(bad, "bad magic");
  expect_format(std::vector<std::uint8_t>(good.begin(), good.end() - 1), "truncated record");
  bad = good;
  bad.push_back(0);
  expect_format(bad, "trailing bytes after last record");
  bad = good;
  bad[16 + 9] = 1;
  expect_format(bad, "nonzero pad byte");
  bad = good;
  std::swap_ranges(bad.begin() + 16, bad.begin() + 26, bad.begin() + 26);
  expect_format(bad, "unsorted payload");
  bad = good;
  bad[16 + 8] = 0;
  expect_format(bad, "invalid polarity");
}

TEST_CASE("file helpers pick the format by extension")
{
  const auto dir = std::filesystem::temp_directory_path() / "evsr_test_event_stream";
  std::filesystem::create_directories(dir);
  const EventStream s(8, 8, 1000, {{5, 1, 2, 1}, {7, 3, 3, -1}});
  save_stream(dir / "a.evsr", s);
  save_stream(dir / "a.evt", s);
  CHECK(load_stream(dir / "a.evsr") == s);
  CHECK(load_stream(dir / "a.evt") == s);
  CHECK(read_file_bytes(dir / "a.evsr") == write_binary(s));
  CHECK_THROWS_AS(load_stream(dir / "missing.evsr"), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("slice")
{
  const EventStream s(2, 2, 100, {{10, 0, 0, 1}, {50, 1, 0, 1}, {90, 0, 1, -1}});
  CHECK(slice(s, {0, 100}) == EventStream(2, 2, 100, {{10, 0, 0, 1}, {50, 1, 0, 1}, {90, 0, 1, -1}}));
  CHECK(slice(s, {40, 100}) == EventStream(2, 2, 60, {{10, 1, 0, 1}, {50, 0, 1, -1}}));
  CHECK_THROWS_AS(slice(s, {100, 100}), ArgumentError);
  CHECK_THROWS_AS(slice(s, {0, 101}), ArgumentError);
}

TEST_CASE("split and merge")
{
  std::mt19937_64 gen(9);
  const auto s = random_stream(gen, 8, 8, 10000, 500);
  const auto [on, off] = split_polarity(s);
  CHECK(on.size() + off.size() == s.size());
  CHECK(std::all_of(on.events().begin(), on.events().end(), [](const Event & e) { return e.p == 1; }));
  CHECK(std::all_of(off.events().begin(), off.events().end(), [](const Event & e) { return e.p == -1; }));
  CHECK(merge({on, off}) == s);
  CHECK(merge({s, EventStream(8, 8, 0)}) == s);
  CHECK_THROWS_AS(merge({s, EventStream(4, 8, 0)}), ArgumentError);

  SUBCASE("slices re-based by their origin merge back")
  {
    std::vector<EventStream> parts;
    for (TimeUs t0 = 0; t0 < 10000; t0 += 3000) {
      const TimeUs t1 = std::min<TimeUs>(10000, t0 + 3000);
      parts.push_back(shift_time(slice(s, {t0, t1}), t0, s.duration()));
    }
    // slice drops events stamped exactly at the duration
    std::vector<Event> kept;
    for (const auto & e : s.events()) {
      if (e.t < s.duration()) kept.push_back(e);
    }
    CHECK(merge(parts) == EventStream(8, 8, 10000, kept));
  }
  SUBCASE("all ON")
  {
    const EventStream all_on(2, 2, 10, {{1, 0, 0, 1}, {2, 1, 1, 1}});
    const auto [a, b] = split_polarity(all_on);
    CHECK(a == all_on);
    CHECK(b.empty());
  }
}

TEST_CASE("downsample_spatial")
{
  const EventStream s(8, 8, 10, {{1, 5, 7, 1}, {2, 4, 6, -1}, {3, 0, 0, 1}});
  const auto d = downsample_spatial(s, 2);
  CHECK(d.width() == 4);
  CHECK(d.height() == 4);
  CHECK(d == EventStream(4, 4, 10, {{1, 2, 3, 1}, {2, 2, 3, -1}, {3, 0, 0, 1}}));
  CHECK_THROWS_AS(downsample_spatial(EventStream(128, 128, 10), 3), ArgumentError);
  CHECK_THROWS_AS(downsample_spatial(s, 1), ArgumentError);
  CHECK(downsample_spatial(EventStream(128, 128, 10, {{1, 127, 127, 1}}), 2).size() == 1);
}
