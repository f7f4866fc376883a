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

#include <numeric>

#include "evsr/dvs_sim.hpp"
#include "evsr/errors.hpp"
#include "evsr/pipeline.hpp"
#include "evsr/rng.hpp"

using namespace evsr;

namespace
{
EventStream bar_recording(int size, TimeUs duration)
{
  SceneParams p;
  p.speed = 2000.0;
  p.contrast = 3.0;
  p.bar_width = 6.0;
  return simulate(make_scene(SceneKind::MovingBar, size, size, duration, p), {}, 0);
}

DictionaryPair bar_dictionary(const EventStream & ground_truth, int factor, int atoms)
{
  return train_dictionaries(training_maps(ground_truth, ground_truth.duration(), factor), factor, atoms, 1);
}

std::int64_t count_polarity(const EventStream & s, int p)
{
  return std::count_if(s.events().begin(), s.events().end(), [p](const Event & e) { return e.p == p; });
}

}  // namespace

TEST_CASE("total scale names")
{
  CHECK(parse_total_scale("none") == TotalScale::None);
  CHECK(parse_total_scale("linear") == TotalScale::Linear);
  CHECK(parse_total_scale("quadratic") == TotalScale::Quadratic);
  CHECK(to_string(TotalScale::Quadratic) == "quadratic");
  CHECK_THROWS_AS(parse_total_scale("cubic"), ArgumentError);
}

TEST_CASE("SrConfig")
{
  SrConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.window_length == 200000);
  CHECK(c.rate_bin == 50);
  CHECK(c.metric_bin == 100);
  CHECK(c.total_scale == TotalScale::None);
  c.factor = 1;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = {};
  c.rate_bin = 0;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = {};
  c.window_length = 0;
  CHECK_THROWS_AS(c.validate(), ArgumentError);

  const auto d = SrConfig{}.describe();
  CHECK(d.front().first == "factor");
  CHECK(std::find_if(d.begin(), d.end(), [](const auto & kv) { return kv.first == "seed"; }) != d.end());
}

TEST_CASE("largest_remainder")
{
  Eigen::MatrixXd v(2, 3);
  v << 0.5, 1.2, 2.5, 0.3, 0.0, 0.5;
  CountMatrix want(2, 3);
  want << 1, 1, 3, 0, 0, 0;
  CHECK(largest_remainder(v, 5) == want);  // ties at .5 go to the lower raster index
  want << 1, 1, 3, 0, 0, 1;
  CHECK(largest_remainder(v, 6) == want);
  want << 0, 1, 2, 0, 0, 0;
  CHECK(largest_remainder(v, 3) == want);
  CHECK_THROWS_AS(largest_remainder(v, 2), ArgumentError);
  CHECK_THROWS_AS(largest_remainder(v, 10), ArgumentError);
  CHECK_THROWS_AS(largest_remainder(Eigen::MatrixXd::Constant(1, 1, -1.0), 0), ArgumentError);

  RngStream rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd m(4, 5);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = 10 * rng.uniform();
    const auto total = static_cast<std::int64_t>(std::llround(m.sum()));
    const auto r = largest_remainder(m, total);
    CHECK(r.sum() == total);
    CHECK(((r.cast<double>() - m).array().abs() < 1.0).all());
  }
}

TEST_CASE("integer_targets")
{
  Eigen::MatrixXd v(2, 2);
  v << 1.4, 2.4, 0.1, 0.1;  // total 4
  const CountMap m(v, Polarity::On);
  CHECK(integer_targets(m, 4.0, 2, TotalScale::None).sum() == 4);
  CHECK(integer_targets(m, 4.0, 2, TotalScale::Linear).sum() == 8);
  CHECK(integer_targets(m, 4.0, 2, TotalScale::Quadratic).sum() == 16);
  CHECK(integer_targets(CountMap(2, 2), 3.0, 2, TotalScale::None).sum() == 0);
  // silent map with a nonzero target spreads it uniformly
  CountMatrix flat = integer_targets(CountMap(2, 2), 1.0, 2, TotalScale::Quadratic);
  CHECK(flat == CountMatrix::Ones(2, 2));
}

TEST_CASE("window_count_maps and training_maps")
{
  const EventStream s(7, 5, 300, {{0, 1, 1, 1}, {100, 2, 2, -1}, {299, 6, 4, 1}, {300, 6, 4, 1}});
  const auto maps = window_count_maps(s, 100);
  REQUIRE(maps.size() == 6);
  CHECK(maps[0].polarity() == Polarity::On);
  CHECK(maps[0].total() == 1.0);
  CHECK(maps[3].total() == 1.0);  // second window, OFF
  CHECK(maps[4].total() == 2.0);  // the last window keeps t == duration
  const auto cropped = training_maps(s, 100, 2);
  CHECK(cropped[0].width() == 6);
  CHECK(cropped[0].height() == 4);
}

TEST_CASE("report_value")
{
  MetricReport r;
  r.extra = {{"a", "1"}};
  CHECK(report_value(r, "a") == "1");
  CHECK_THROWS_AS(report_value(r, "b"), ArgumentError);
}

TEST_CASE("super_resolve contracts")
{
  const auto gt = bar_recording(24, 30000);
  const auto lr = downsample_spatial(gt, 2);
  const auto dict = bar_dictionary(gt, 2, 64);
  SrConfig cfg;
  cfg.window_length = 10000;
  cfg.seed = 5;

  SUBCASE("geometry, counts and determinism")
  {
    SrStats stats;
    const auto hr = super_resolve(lr, dict, cfg, &stats);
    CHECK(hr.width() == 24);
    CHECK(hr.height() == 24);
    CHECK(hr.duration() == lr.duration());
    CHECK(stats.windows == 3);
    REQUIRE(stats.targets.size() == 6);
    CHECK(std::accumulate(stats.targets.begin(), stats.targets.end(), std::int64_t{0}) == static_cast<std::int64_t>(hr.size()));
    for (int w = 0; w < 3; ++w) {
      const TimeUs t0 = w * 10000;
      const TimeUs t1 = w == 2 ? 30001 : t0 + 10000;
      std::int64_t on = 0, off = 0;
      for (const auto & e : hr.events()) {
        if (e.t >= t0 && e.t < t1) (e.p > 0 ? on : off) += 1;
      }
      CHECK(on == stats.targets[static_cast<std::size_t>(2 * w)]);
      CHECK(off == stats.targets[static_cast<std::size_t>(2 * w + 1)]);
    }
    // with total_scale none the HR total stays close to the LR total
    CHECK(std::abs(static_cast<double>(hr.size()) - static_cast<double>(lr.size())) < 0.1 * static_cast<double>(lr.size()));
    CHECK(super_resolve(lr, dict, cfg) == hr);
    SrConfig threaded = cfg;
    threaded.threads = 3;
    CHECK(super_resolve(lr, dict, threaded) == hr);
    SrConfig other = cfg;
    other.seed = 6;
    CHECK(!(super_resolve(lr, dict, other) == hr));
  }
  SUBCASE("total scaling")
  {
    SrConfig quad = cfg;
    quad.total_scale = TotalScale::Quadratic;
    const auto hr = super_resolve(lr, dict, quad);
    CHECK(count_polarity(hr, 1) == 4 * count_polarity(lr, 1));
    CHECK(count_polarity(hr, -1) == 4 * count_polarity(lr, -1));
    SrConfig lin = cfg;
    lin.total_scale = TotalScale::Linear;
    CHECK(super_resolve(lr, dict, lin).size() == 2 * lr.size());
  }
  SUBCASE("empty input")
  {
    const auto hr = super_resolve(EventStream(12, 12, 30000), dict, cfg);
    CHECK(hr.empty());
    CHECK(hr.width() == 24);
  }
  SUBCASE("errors")
  {
    SrConfig three = cfg;
    three.factor = 3;
    CHECK_THROWS_AS(super_resolve(lr, dict, three), ArgumentError);
    CHECK_THROWS_AS(super_resolve(EventStream(12, 12, 20), dict, cfg), ArgumentError);
    CHECK_THROWS_AS(super_resolve(EventStream(2, 2, 30000), dict, cfg), ArgumentError);
  }
  SUBCASE("baseline keeps the count contract")
  {
    SrStats stats;
    const auto base = baseline_super_resolve(lr, cfg, &stats);
    CHECK(base.width() == 24);
    CHECK(std::accumulate(stats.targets.begin(), stats.targets.end(), std::int64_t{0}) == static_cast<std::int64_t>(base.size()));
    CHECK(base.size() == lr.size());
  }
}

TEST_CASE("super-resolution beats the baseline on a moving bar")
{
  const auto gt = bar_recording(32, 60000);
  const auto dict = bar_dictionary(gt, 2, 128);
  SrConfig cfg;
  cfg.seed = 2;
  const auto sr = experiment_reconstruction(gt, dict, cfg);
  const auto lr = downsample_spatial(gt, 2);
  const double base = rmse_psth(baseline_super_resolve(lr, cfg), gt, cfg.metric_bin);
  REQUIRE(sr.report.rmse.has_value());
  CHECK(*sr.report.rmse < base);
  CHECK(sr.report.events_lr == lr.size());

  std::vector<std::string> names;
  for (const auto & a : sr.artifacts) names.push_back(a.name);
  CHECK(names == std::vector<std::string>{"frame_ground_truth.pgm", "frame_lr.pgm", "frame_sr.pgm", "rates.csv"});
  CHECK(sr.artifacts[1].content.rfind("P5\n32 32\n255\n", 0) == 0);

  SUBCASE("reconstruction needs a divisible geometry")
  {
    CHECK_THROWS_AS(experiment_reconstruction(EventStream(33, 32, 60000), dict, cfg), ArgumentError);
  }
  SUBCASE("bin sweep and robustness reports")
  {
    const auto sweep = experiment_bin_sweep(gt, dict, cfg, {20, 1000});
    CHECK(std::stod(report_value(sweep.report, "rmse_bin_20")) > 0.0);
    CHECK(std::stod(report_value(sweep.report, "rmse_bin_1000")) > 0.0);
    const auto rob = experiment_robustness(gt, dict, cfg, 3);
    CHECK(report_value(rob.report, "repeats") == "3");
    CHECK(std::stod(report_value(rob.report, "rmse_min")) <= std::stod(report_value(rob.report, "rmse_mean")));
    CHECK(std::stod(report_value(rob.report, "rmse_std")) >= 0.0);
  }
  SUBCASE("magnification")
  {
    const auto mag = experiment_magnification(downsample_spatial(gt, 2), dict, cfg);
    REQUIRE(mag.report.dfrf.has_value());
    CHECK(*mag.report.dfrf >= 0.0);
    CHECK(mag.report.events_hr > 0);
  }
}
