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

#ifndef EVSR_PIPELINE_HPP
#define EVSR_PIPELINE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evsr/event_stream.hpp"
#include "evsr/metrics.hpp"
#include "evsr/rate_field.hpp"
#include "evsr/sparse_sr.hpp"

namespace evsr
{
/// How the per-window HR event total is chosen before rounding.
enum class TotalScale { None, Linear, Quadratic };

TotalScale parse_total_scale(std::string_view name);
std::string_view to_string(TotalScale scale);

struct SrConfig
{
  int factor = 2;
  TimeUs window_length = 200000;
  TimeUs rate_bin = 50;
  TimeUs metric_bin = 100;
  Kernel kernel = default_kernel();
  TotalScale total_scale = TotalScale::None;
  std::uint64_t seed = 0;
  SparseCodeConfig sparse;
  double headroom = 2.0;
  unsigned threads = 1;
  std::string dictionary;  ///< path, recorded in reports only

  /// Throws ArgumentError on factor < 2, non-positive bins or window.
  void validate() const;
  /// Resolved values as key=value pairs, in a fixed order.
  std::vector<std::pair<std::string, std::string>> describe() const;
};

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Integer matrix with the given total, each entry floor(v) or floor(v) + 1.
/// Leftover units go to the largest fractional parts, ties to the lower
/// raster index (row-major). Needs sum(floor(v)) <= total <= sum(floor(v)) + size.
CountMatrix largest_remainder(const Eigen::MatrixXd & values, std::int64_t total);

/// Scales an upscaled count map to the event total implied by `scale`
/// (lr_total, factor * lr_total or factor^2 * lr_total) and rounds it.
CountMatrix integer_targets(const CountMap & hr_map, double lr_total, int factor, TotalScale scale);

struct SrStats
{
  std::size_t windows = 0;
  std::size_t capacity_warnings = 0;
  std::size_t uniform_fallbacks = 0;
  /// Emitted events per (window, polarity), ON before OFF within a window.
  std::vector<std::int64_t> targets;
};

/// Two-stage event-stream super-resolution. Output geometry is factor times
/// the input, duration is kept. Windows and polarities are independent.
EventStream super_resolve(
  const EventStream & stream, const DictionaryPair & dict, const SrConfig & config, SrStats * stats = nullptr);

/// Nearest-neighbour count upscale (LR count / factor^2 on every child pixel)
/// followed by uniform-time sampling inside each window.
EventStream baseline_super_resolve(const EventStream & stream, const SrConfig & config, SrStats * stats = nullptr);

/// Named file content produced by an experiment.
struct Artifact
{
  std::string name;
  std::string content;
};

struct ExperimentResult
{
  MetricReport report;
  std::vector<Artifact> artifacts;
};

/// Downsamples the ground truth by config.factor, super-resolves it back and
/// scores the result against the ground truth.
ExperimentResult experiment_reconstruction(
  const EventStream & ground_truth, const DictionaryPair & dict, const SrConfig & config);

/// Super-resolves the stream at dict.factor() and scores the total firing
/// rate against the input.
ExperimentResult experiment_magnification(
  const EventStream & stream, const DictionaryPair & dict, const SrConfig & config);

/// Reconstruction RMSE for each rate bin length.
ExperimentResult experiment_bin_sweep(
  const EventStream & ground_truth, const DictionaryPair & dict, const SrConfig & config,
  const std::vector<TimeUs> & rate_bins);

/// Reconstruction repeated with seeds config.seed, config.seed + 1, ...
ExperimentResult experiment_robustness(
  const EventStream & ground_truth, const DictionaryPair & dict, const SrConfig & config, int repeats);

/// ON and OFF count maps of every window, as dictionary training input.
std::vector<CountMap> window_count_maps(const EventStream & stream, TimeUs window_length);

/// Window count maps cropped to the largest multiple of factor, for
/// training a dictionary on a recording at that factor.
std::vector<CountMap> training_maps(const EventStream & stream, TimeUs window_length, int factor);

/// Value of `key` in a report's extra results; throws ArgumentError if missing.
std::string report_value(const MetricReport & report, std::string_view key);

}  // namespace evsr

#endif  // EVSR_PIPELINE_HPP
