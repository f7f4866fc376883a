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

#include "evsr/dvs_sim.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "evsr/errors.hpp"
#include "evsr/parallel.hpp"
#include "evsr/rng.hpp"

namespace evsr
{
namespace
{
// Absorbs rounding in ln(exp(x)) so crossings that land exactly on a step
// boundary are not lost.
constexpr double kCrossingSlack = 1e-9;

double overlap(double a0, double a1, double b0, double b1)
{
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

double wrap(double v, double period)
{
  double r = std::fmod(v, period);
  return r < 0 ? r + period : r;
}

}  // namespace

SceneKind parse_scene_kind(std::string_view name)
{
  if (name == "uniform") return SceneKind::Uniform;
  if (name == "exp_ramp") return SceneKind::ExpRamp;
  if (name == "moving_bar") return SceneKind::MovingBar;
  if (name == "moving_disk") return SceneKind::MovingDisk;
  throw ArgumentError("unknown scene kind: " + std::string(name));
}

std::string_view to_string(SceneKind kind)
{
  switch (kind) {
    case SceneKind::Uniform: return "uniform";
    case SceneKind::ExpRamp: return "exp_ramp";
    case SceneKind::MovingBar: return "moving_bar";
    case SceneKind::MovingDisk: return "moving_disk";
  }
  return "unknown";
}

IntensityScene::IntensityScene(
  SceneKind kind, int width, int height, TimeUs duration, SceneParams params)
: kind_(kind), width_(width), height_(height), duration_(duration), params_(params)
{
  if (width <= 0 || height <= 0) throw ArgumentError("scene geometry must be positive");
  if (duration <= 0) throw ArgumentError("scene duration must be positive");
  switch (kind) {
    case SceneKind::Uniform:
      break;
    case SceneKind::ExpRamp:
      if (!std::isfinite(params.k)) throw ArgumentError("exp_ramp rate must be finite");
      break;
    case SceneKind::MovingBar:
      if (!(params.speed > 0)) throw ArgumentError("speed must be positive");
      if (!(params.contrast > 0)) throw ArgumentError("contrast must be positive");
      if (!(params.bar_width > 0)) throw ArgumentError("bar width must be positive");
      break;
    case SceneKind::MovingDisk:
      if (!(params.speed > 0)) throw ArgumentError("speed must be positive");
      if (!(params.contrast > 0)) throw ArgumentError("contrast must be positive");
      if (!(params.radius > 0)) throw ArgumentError("radius must be positive");
      break;
  }
}

double IntensityScene::intensity(int x, int y, double t_us) const
{
  const double t_s = t_us * 1e-6;
  switch (kind_) {
    case SceneKind::Uniform:
      return 1.0;
    case SceneKind::ExpRamp:
      return std::exp(params_.k * t_s);
    case SceneKind::MovingBar: {
      const double w = static_cast<double>(width_);
      if (params_.bar_width >= w) return 1.0 + params_.contrast;
      const double a = wrap(params_.x0 + params_.speed * t_s, w);
      double cover = 0.0;
      for (int m = -1; m <= 1; ++m) {
        cover += overlap(x, x + 1.0, a + m * w, a + params_.bar_width + m * w);
      }
      return 1.0 + params_.contrast * std::min(cover, 1.0);
    }
    case SceneKind::MovingDisk: {
      const double w = static_cast<double>(width_);
      const double cx = wrap(params_.x0 + params_.speed * t_s, w);
      const double cy = params_.y0 < 0 ? 0.5 * height_ : params_.y0;
      double dx = wrap(x + 0.5 - cx, w);
      if (dx > 0.5 * w) dx -= w;
      const double dy = y + 0.5 - cy;
      const double dist = std::sqrt(dx * dx + dy * dy);
      const double cover = std::clamp(params_.radius + 0.5 - dist, 0.0, 1.0);
      return 1.0 + params_.contrast * cover;
    }
  }
  return 1.0;
}

IntensityScene make_scene(
  SceneKind kind, int width, int height, TimeUs duration, const SceneParams & params)
{
  return IntensityScene(kind, width, height, duration, params);
}

EventStream simulate(const IntensityScene & scene, const SimConfig & config, std::uint64_t seed)
{
  if (!(config.theta > 0)) throw ArgumentError("theta must be positive");
  if (config.time_step < 1) throw ArgumentError("time_step must be >= 1 us");
  if (config.jitter_us < 0) throw ArgumentError("jitter must be non-negative");

  const int width = scene.width();
  const int height = scene.height();
  const TimeUs duration = scene.duration();
  const double theta = config.theta;

  auto log_intensity = [&](int x, int y, TimeUs t) {
    const double value = scene.intensity(x, y, static_cast<double>(t));
    if (!(value > 0) || !std::isfinite(value)) {
      throw DomainError("non-positive or non-finite intensity");
    }
    return std::log(value);
  };

  std::vector<std::vector<Event>> rows(static_cast<std::size_t>(height));
  parallel_for(rows.size(), config.threads, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    auto & out = rows[row];
    for (int x = 0; x < width; ++x) {
      RngStream rng(seed, {static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), 0, 0});
      double l_prev = log_intensity(x, y, 0);
      double l_ref = l_prev;
      TimeUs t_prev = 0;
      while (t_prev < duration) {
        const TimeUs t_cur = std::min(t_prev + config.time_step, duration);
        const double l_cur = log_intensity(x, y, t_cur);
        for (;;) {
          const double diff = l_cur - l_ref;
          if (std::abs(diff) < theta - kCrossingSlack) break;
          const int p = diff > 0 ? 1 : -1;
          const double target = l_ref + p * theta;
          const double span = l_cur - l_prev;
          const double frac = span != 0.0 ? std::clamp((target - l_prev) / span, 0.0, 1.0) : 1.0;
          TimeUs t = std::llround(static_cast<double>(t_prev) + frac * static_cast<double>(t_cur - t_prev));
          if (config.jitter_us > 0) {
            const auto j = static_cast<TimeUs>(rng.below(static_cast<std::uint64_t>(2 * config.jitter_us + 1)));
            t = std::clamp<TimeUs>(t + j - config.jitter_us, 0, duration);
          }
          out.push_back(
            {t, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), static_cast<std::int8_t>(p)});
          l_ref = target;
        }
        l_prev = l_cur;
        t_prev = t_cur;
      }
    }
  });

  std::size_t total = 0;
  for (const auto & r : rows) total += r.size();
  std::vector<Event> events;
  events.reserve(total);
  for (auto & r : rows) events.insert(events.end(), r.begin(), r.end());
  return EventStream(width, height, duration, std::move(events));
}

}  // namespace evsr
