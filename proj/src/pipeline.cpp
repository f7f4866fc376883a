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

#include "evsr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "evsr/count_map.hpp"
#include "evsr/errors.hpp"
#include "evsr/parallel.hpp"
#include "evsr/poisson_sampler.hpp"
#include "evsr/rng.hpp"

namespace evsr
{
namespace
{
template <typename T>
std::string str(const T & v)
{
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

std::vector<TimeWindow> split_windows(TimeUs duration, TimeUs length)
{
  std::vector<TimeWindow> out;
  for (TimeUs t0 = 0; t0 < duration; t0 += length) out.push_back({t0, std::min(duration, t0 + length)});
  return out;
}

/// Events of one window re-based to its origin. The last window also keeps
/// events stamped exactly at the stream duration.
EventStream window_events(const EventStream & stream, TimeWindow span)
{
  const TimeUs end = span.t1 == stream.duration() ? span.t1 + 1 : span.t1;
  const auto ev = stream.events();
  const auto lo = std::partition_point(ev.begin(), ev.end(), [&](const Event & e) { return e.t < span.t0; });
  const auto hi = std::partition_point(lo, ev.end(), [&](const Event & e) { return e.t < end; });
  std::vector<Event> out(lo, hi);
  for (auto & e : out) e.t -= span.t0;
  return EventStream(stream.width(), stream.height(), span.length(), std::move(out));
}

constexpr Polarity kPolarities[2] = {Polarity::On, Polarity::Off};

/// One (window, polarity) unit of work after stage 1.
struct Task
{
  std::size_t window = 0;
  Polarity polarity = Polarity::On;
  TimeWindow span;
  CountMatrix targets;
  std::optional<RateField> lr_field;  ///< empty for uniform-time sampling
};

/// Stage 2 shared by the SR pipeline and the baseline: sample every HR pixel
/// of every task with its own keyed stream and collect the events.
EventStream sample_tasks(
  std::vector<Task> & tasks, int hr_w, int hr_h, TimeUs duration, const SrConfig & config, SrStats * stats)
{
  const auto rows = static_cast<std::size_t>(hr_h);
  std::vector<std::vector<Event>> slots(tasks.size() * rows);
  std::vector<std::size_t> capacity(slots.size(), 0);
  std::vector<std::size_t> fallback(slots.size(), 0);
  const SamplerOptions options{config.headroom, SamplerOptions{}.max_batches};

  parallel_for(slots.size(), config.threads, [&](std::size_t k) {
    const Task & task = tasks[k / rows];
    const int j = static_cast<int>(k % rows);
    const TimeUs len = task.span.length();
    auto & out = slots[k];
    for (int i = 0; i < hr_w; ++i) {
      const std::int64_t n = task.targets(j, i);
      if (n == 0) continue;
      PointProcessSpec spec;
      spec.n_target = n;
      spec.horizon = len;
      spec.rate = task.lr_field ? hr_rate_function(*task.lr_field, i, j, config.factor, config.kernel)
                                : RateFunction{len, Eigen::VectorXd::Ones(1)};
      RngStream rng(
        config.seed, {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), sign(task.polarity),
                      static_cast<std::uint32_t>(task.window)});
      const auto seq = sample_event_sequence(spec, rng, options);
      capacity[k] += seq.capacity_warning ? 1 : 0;
      fallback[k] += seq.uniform_fallback ? 1 : 0;
      for (TimeUs tick : seq.times) {
        out.push_back(
          {task.span.t0 + tick - 1, static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j), sign(task.polarity)});
      }
    }
  });

  std::size_t total = 0;
  for (const auto & s : slots) total += s.size();
  std::vector<Event> events;
  events.reserve(total);
  for (auto & s : slots) events.insert(events.end(), s.begin(), s.end());

  if (stats) {
    stats->capacity_warnings = std::accumulate(capacity.begin(), capacity.end(), std::size_t{0});
    stats->uniform_fallbacks = std::accumulate(fallback.begin(), fallback.end(), std::size_t{0});
    stats->targets.clear();
    for (const auto & t : tasks) stats->targets.push_back(t.targets.sum());
  }
  return EventStream(hr_w, hr_h, duration, std::move(events));
}

void check_stream(const EventStream & stream, const SrConfig & config)
{
  config.validate();
  if (stream.duration() < config.rate_bin) throw ArgumentError("stream shorter than one rate bin");
  const long hr_w = static_cast<long>(stream.width()) * config.factor;
  const long hr_h = static_cast<long>(stream.height()) * config.factor;
  if (hr_w > 65535 || hr_h > 65535) throw ArgumentError("output geometry exceeds 16-bit addresses");
}

TimeWindow frame_window(TimeUs duration)
{
  const TimeUs t0 = std::max<TimeUs>(0, duration / 2 - 5000);
  return {t0, std::min(duration, t0 + 10000)};
}

double mean_of(const std::vector<double> & v)
{
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator).
double std_of(const std::vector<double> & v)
{
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

TotalScale parse_total_scale(std::string_view name)
{
  if (name == "none") return TotalScale::None;
  if (name == "linear") return TotalScale::Linear;
  if (name == "quadratic") return TotalScale::Quadratic;
  throw ArgumentError("unknown total scale '" + std::string(name) + "'");
}

std::string_view to_string(TotalScale scale)
{
  switch (scale) {
    case TotalScale::None: return "none";
    case TotalScale::Linear: return "linear";
    case TotalScale::Quadratic: return "quadratic";
  }
  return "none";
}

void SrConfig::validate() const
{
  if (factor < 2) throw ArgumentError("factor must be >= 2");
  if (window_length < 1) throw ArgumentError("window length must be >= 1 us");
  if (rate_bin < 1 || metric_bin < 1) throw ArgumentError("bins must be >= 1 us");
  if (!(headroom > 0)) throw ArgumentError("headroom must be positive");
  if (!(sparse.lambda > 0) || !(sparse.beta > 0)) throw ArgumentError("lambda and beta must be positive");
  if (sparse.max_iter < 1) throw ArgumentError("max_iter must be >= 1");
}

std::vector<std::pair<std::string, std::string>> SrConfig::describe() const
{
  std::ostringstream k;
  k.precision(10);
  for (Eigen::Index r = 0; r < 3; ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) k << (r + c ? " " : "") << kernel.weights(r, c);
  }
  return {
    {"factor", str(factor)},
    {"window_length", str(window_length)},
    {"rate_bin", str(rate_bin)},
    {"metric_bin", str(metric_bin)},
    {"kernel", k.str()},
    {"total_scale", std::string(to_string(total_scale))},
    {"seed", str(seed)},
    {"lambda", str(sparse.lambda)},
    {"beta", str(sparse.beta)},
    {"max_iter", str(sparse.max_iter)},
    {"tol", str(sparse.tol)},
    {"headroom", str(headroom)},
    {"threads", str(threads)},
    {"dictionary", dictionary.empty() ? "-" : dictionary},
  };
}

CountMatrix largest_remainder(const Eigen::MatrixXd & values, std::int64_t total)
{
  if (!values.allFinite() || (values.array() < 0.0).any()) {
    throw ArgumentError("apportionment needs finite non-negative values");
  }
  const Eigen::Index rows = values.rows();
  const Eigen::Index cols = values.cols();
  CountMatrix out(rows, cols);
  std::vector<double> frac(static_cast<std::size_t>(values.size()));
  std::int64_t assigned = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double f = std::floor(values(r, c));
      out(r, c) = static_cast<std::int64_t>(f);
      assigned += out(r, c);
      frac[static_cast<std::size_t>(r * cols + c)] = values(r, c) - f;
    }
  }
  const std::int64_t left = total - assigned;
  if (left < 0 || left > values.size()) throw ArgumentError("total is out of reach of the floors");
  std::vector<std::size_t> order(frac.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::int64_t k = 0; k < left; ++k) {
    const auto idx = static_cast<Eigen::Index>(order[static_cast<std::size_t>(k)]);
    out(idx / cols, idx % cols) += 1;
  }
  return out;
}

CountMatrix integer_targets(const CountMap & hr_map, double lr_total, int factor, TotalScale scale)
{
  const double raw = hr_map.total();
  double target = raw;
  if (scale == TotalScale::Linear) target = factor * lr_total;
  if (scale == TotalScale::Quadratic) target = static_cast<double>(factor) * factor * lr_total;
  const auto total = static_cast<std::int64_t>(std::llround(target));
  if (total == 0) return CountMatrix::Zero(hr_map.height(), hr_map.width());

  Eigen::MatrixXd values;
  if (raw > 0) {
    values = hr_map.counts() * (target / raw);
  } else {
    values = Eigen::MatrixXd::Constant(hr_map.height(), hr_map.width(), target / static_cast<double>(hr_map.counts().size()));
  }
  // Rescaling can push the floors one unit past a rounded-down total.
  const double floors = values.array().floor().sum();
  if (floors > static_cast<double>(total)) values *= static_cast<double>(total) / floors;
  return largest_remainder(values, total);
}

EventStream super_resolve(const EventStream & stream, const DictionaryPair & dict, const SrConfig & config, SrStats * stats)
{
  check_stream(stream, config);
  if (dict.factor() != config.factor) throw ArgumentError("dictionary factor does not match the configured factor");
  if (stream.width() < dict.lr_patch_size() || stream.height() < dict.lr_patch_size()) {
    throw ArgumentError("stream smaller than the dictionary patch");
  }
  const auto windows = split_windows(stream.duration(), config.window_length);
  std::vector<Task> tasks(windows.size() * 2);

  parallel_for(tasks.size(), config.threads, [&](std::size_t k) {
    Task & task = tasks[k];
    task.window = k / 2;
    task.polarity = kPolarities[k % 2];
    task.span = windows[task.window];
    const EventStream part = window_events(stream, task.span);
    const CountMap lr = build_count_map(part, {0, part.duration() + 1}, task.polarity);
    if (lr.total() == 0) {
      task.targets = CountMatrix::Zero(lr.height() * config.factor, lr.width() * config.factor);
      return;
    }
    const CountMap hr = upscale_count_map(lr, dict, config.sparse);
    task.targets = integer_targets(hr, lr.total(), config.factor, config.total_scale);
    task.lr_field = build_rate_field(part, task.polarity, config.rate_bin);
  });

  if (stats) stats->windows = windows.size();
  return sample_tasks(
    tasks, stream.width() * config.factor, stream.height() * config.factor, stream.duration(), config, stats);
}

EventStream baseline_super_resolve(const EventStream & stream, const SrConfig & config, SrStats * stats)
{
  check_stream(stream, config);
  const int a = config.factor;
  const auto windows = split_windows(stream.duration(), config.window_length);
  std::vector<Task> tasks(windows.size() * 2);
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    Task & task = tasks[k];
    task.window = k / 2;
    task.polarity = kPolarities[k % 2];
    task.span = windows[task.window];
    const EventStream part = window_events(stream, task.span);
    const CountMap lr = build_count_map(part, {0, part.duration() + 1}, task.polarity);
    Eigen::MatrixXd hr(lr.height() * a, lr.width() * a);
    for (Eigen::Index r = 0; r < hr.rows(); ++r) {
      for (Eigen::Index c = 0; c < hr.cols(); ++c) hr(r, c) = lr.counts()(r / a, c / a) / (a * a);
    }
    task.targets = integer_targets(CountMap(std::move(hr), task.polarity), lr.total(), a, config.total_scale);
  }
  if (stats) stats->windows = windows.size();
  return sample_tasks(tasks, stream.width() * a, stream.height() * a, stream.duration(), config, stats);
}

std::vector<CountMap> window_count_maps(const EventStream & stream, TimeUs window_length)
{
  if (window_length < 1) throw ArgumentError("window length must be >= 1 us");
  std::vector<CountMap> maps;
  for (const auto & w : split_windows(stream.duration(), window_length)) {
    const EventStream part = window_events(stream, w);
    for (Polarity p : kPolarities) maps.push_back(build_count_map(part, {0, part.duration() + 1}, p));
  }
  return maps;
}

std::vector<CountMap> training_maps(const EventStream & stream, TimeUs window_length, int factor)
{
  if (factor < 1) throw ArgumentError("factor must be positive");
  std::vector<CountMap> maps;
  for (const auto & m : window_count_maps(stream, window_length)) {
    const int h = m.height() - m.height() % factor;
    const int w = m.width() - m.width() % factor;
    if (h == 0 || w == 0) throw ArgumentError("recording smaller than the factor");
    maps.emplace_back(m.counts().topLeftCorner(h, w), m.polarity());
  }
  return maps;
}

std::string report_value(const MetricReport & report, std::string_view key)
{
  for (const auto & [k, v] : report.extra) {
    if (k == key) return v;
  }
  throw ArgumentError("report has no value '" + std::string(key) + "'");
}

ExperimentResult experiment_reconstruction(
  const EventStream & ground_truth, const DictionaryPair & dict, const SrConfig & config)
{
  config.validate();
  const int a = config.factor;
  if (ground_truth.width() % a != 0 || ground_truth.height() % a != 0) {
    throw ArgumentError("ground truth geometry is not divisible by the factor");
  }
  const EventStream lr = downsample_spatial(ground_truth, a);
  const EventStream hr = super_resolve(lr, dict, config);

  ExperimentResult result;
  auto & rep = result.report;
  rep.rmse = rmse_psth(hr, ground_truth, config.metric_bin);
  rep.dfrf = dfrf(hr, lr, config.metric_bin);
  rep.events_lr = lr.size();
  rep.events_hr = hr.size();
  rep.config = config.describe();

  const TimeWindow fw = frame_window(ground_truth.duration());
  result.artifacts.push_back({"frame_ground_truth.pgm", frame_to_pgm(reconstruct_frame(ground_truth, fw))});
  result.artifacts.push_back({"frame_lr.pgm", frame_to_pgm(enlarge_frame(reconstruct_frame(lr, fw), a))});
  result.artifacts.push_back({"frame_sr.pgm", frame_to_pgm(reconstruct_frame(hr, fw))});
  result.artifacts.push_back(
    {"rates.csv", rate_curves_csv(
                    total_rate_curve(lr, config.metric_bin), total_rate_curve(hr, config.metric_bin), config.metric_bin)});
  return result;
}

ExperimentResult experiment_magnification(const EventStream & stream, const DictionaryPair & dict, const SrConfig & config)
{
  SrConfig cfg = config;
  cfg.factor = dict.factor();
  cfg.validate();
  const EventStream hr = super_resolve(stream, dict, cfg);

  ExperimentResult result;
  auto & rep = result.report;
  rep.dfrf = dfrf(hr, stream, cfg.metric_bin);
  rep.events_lr = stream.size();
  rep.events_hr = hr.size();
  rep.config = cfg.describe();

  const TimeWindow fw = frame_window(stream.duration());
  result.artifacts.push_back({"frame_input.pgm", frame_to_pgm(enlarge_frame(reconstruct_frame(stream, fw), cfg.factor))});
  result.artifacts.push_back({"frame_sr.pgm", frame_to_pgm(reconstruct_frame(hr, fw))});
  result.artifacts.push_back(
    {"rates.csv", rate_curves_csv(
                    total_rate_curve(stream, cfg.metric_bin), total_rate_curve(hr, cfg.metric_bin), cfg.metric_bin)});
  return result;
}

ExperimentResult experiment_bin_sweep(
  const EventStream & ground_truth, const DictionaryPair & dict, const SrConfig & config,
  const std::vector<TimeUs> & rate_bins)
{
  if (rate_bins.empty()) throw ArgumentError("no rate bins to sweep");
  ExperimentResult result;
  std::string csv = "rate_bin_us,rmse\n";
  for (TimeUs bin : rate_bins) {
    SrConfig cfg = config;
    cfg.rate_bin = bin;
    const auto run = experiment_reconstruction(ground_truth, dict, cfg);
    const double rmse = *run.report.rmse;
    result.report.extra.emplace_back("rmse_bin_" + str(bin), str(rmse));
    csv += str(bin) + ',' + str(rmse) + '\n';
    result.report.events_lr = run.report.events_lr;
  }
  result.report.config = config.describe();
  result.artifacts.push_back({"bin_sweep.csv", csv});
  return result;
}

ExperimentResult experiment_robustness(
  const EventStream & ground_truth, const DictionaryPair & dict, const SrConfig & config, int repeats)
{
  if (repeats < 1) throw ArgumentError("repeats must be >= 1");
  ExperimentResult result;
  std::vector<double> rmse;
  std::string csv = "seed,rmse\n";
  for (int r = 0; r < repeats; ++r) {
    SrConfig cfg = config;
    cfg.seed = config.seed + static_cast<std::uint64_t>(r);
    const auto run = experiment_reconstruction(ground_truth, dict, cfg);
    rmse.push_back(*run.report.rmse);
    csv += str(cfg.seed) + ',' + str(rmse.back()) + '\n';
    result.report.events_lr = run.report.events_lr;
  }
  const double m = mean_of(rmse);
  const double s = std_of(rmse);
  result.report.rmse = m;
  result.report.extra = {
    {"repeats", str(repeats)},
    {"rmse_mean", str(m)},
    {"rmse_std", str(s)},
    {"rmse_min", str(*std::min_element(rmse.begin(), rmse.end()))},
    {"rmse_max", str(*std::max_element(rmse.begin(), rmse.end()))},
    {"rmse_cv", str(m > 0 ? s / m : 0.0)},
  };
  result.report.config = config.describe();
  result.artifacts.push_back({"robustness.csv", csv});
  return result;
}

}  // namespace evsr
