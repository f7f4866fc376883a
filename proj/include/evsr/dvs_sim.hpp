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

#ifndef EVSR_DVS_SIM_HPP
#define EVSR_DVS_SIM_HPP

#include <cstdint>
#include <string>
#include <string_view>

#include "evsr/event_stream.hpp"

namespace evsr
{
enum class SceneKind { Uniform, ExpRamp, MovingBar, MovingDisk };

SceneKind parse_scene_kind(std::string_view name);
std::string_view to_string(SceneKind kind);

/// Parameters of the analytic scenes. Fields irrelevant to a kind are ignored.
struct SceneParams
{
  double k = 10.0;          ///< exp_ramp growth rate, 1/s
  double speed = 64.0;      ///< px/s along +x, objects wrap around the sensor
  double bar_width = 8.0;   ///< px
  double radius = 8.0;      ///< px
  double contrast = 1.0;    ///< foreground = 1 + contrast over a background of 1
  double x0 = 0.0;          ///< bar left edge / disk centre at t = 0
  double y0 = -1.0;         ///< disk centre row; negative means sensor middle
};

/// Strictly positive analytic luminance field I(x, y, t).
///
/// Objects are anti-aliased by pixel-area coverage so every pixel trace is
/// continuous and piecewise smooth in t.
class IntensityScene
{
public:
  IntensityScene(SceneKind kind, int width, int height, TimeUs duration, SceneParams params);

  SceneKind kind() const { return kind_; }
  int width() const { return width_; }
  int height() const { return height_; }
  TimeUs duration() const { return duration_; }
  const SceneParams & params() const { return params_; }

  /// Luminance at pixel (x, y) and time t (microseconds, real-valued).
  double intensity(int x, int y, double t_us) const;

private:
  SceneKind kind_;
  int width_;
  int height_;
  TimeUs duration_;
  SceneParams params_;
};

IntensityScene make_scene(
  SceneKind kind, int width, int height, TimeUs duration, const SceneParams & params = {});

struct SimConfig
{
  double theta = 0.1;       ///< log-intensity contrast threshold
  TimeUs time_step = 100;   ///< sampling interval of the log-intensity tracker
  TimeUs jitter_us = 0;     ///< optional uniform timestamp jitter, +-jitter_us
  unsigned threads = 1;
};

/// Temporal-contrast pixel model. Each pixel tracks ln I at time_step
/// resolution and emits an event every time the log change since the last
/// event reaches theta; the reference then moves by exactly +-theta so the
/// long-run rate equals (1/theta) d ln I / dt. Crossing times are linearly
/// interpolated inside the step.
EventStream simulate(const IntensityScene & scene, const SimConfig & config, std::uint64_t seed);

}  // namespace evsr

#endif  // EVSR_DVS_SIM_HPP
