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

#ifndef EVSR_POISSON_SAMPLER_HPP
#define EVSR_POISSON_SAMPLER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "evsr/rate_field.hpp"
#include "evsr/rng.hpp"

namespace evsr
{
/// Target count, binned rate shape and horizon of one pixel's point process.
struct PointProcessSpec
{
  std::int64_t n_target = 0;
  RateFunction rate;
  TimeUs horizon = 0;
};

struct SamplerOptions
{
  /// Expected accepted events per batch, as a multiple of the target count.
  double headroom = 2.0;
  int max_batches = 100000;
};

/// Real-valued sample on (0, T].
struct ContinuousSample
{
  std::vector<double> times;
  bool uniform_fallback = false;  ///< rate was all-zero, uniform law used
  int batches = 0;
};

/// Integer microsecond sample in [1, T].
struct SampledSequence
{
  std::vector<TimeUs> times;
  bool uniform_fallback = false;
  bool capacity_warning = false;  ///< n_target > T, equal ticks kept
  int batches = 0;
};

/// Homogeneous Poisson process on (0, horizon] by accumulating exponential gaps.
std::vector<double> sample_homogeneous(double rate_per_us, double horizon_us, RngStream & rng);

/// Keeps each sorted candidate s with probability rate(s) / lambda_max.
/// Throws ContractViolation if rate exceeds lambda_max at any candidate.
std::vector<double> thin(
  std::span<const double> candidates, const RateFunction & rate, double lambda_max, RngStream & rng);

/// Exactly n_target times from the nonhomogeneous process by batched thinning.
/// Each batch is a homogeneous process at the tightest constant bound over
/// the rate, scaled so a batch yields about headroom * n_target acceptances.
ContinuousSample sample_event_times(
  const PointProcessSpec & spec, RngStream & rng, const SamplerOptions & options = {});

SampledSequence sample_event_sequence(
  const PointProcessSpec & spec, RngStream & rng, const SamplerOptions & options = {});

/// Independent reference: n_target i.i.d. draws from rate / integral(rate)
/// by inverse transform of the piecewise-constant CDF, sorted.
ContinuousSample sample_conditional_times(const PointProcessSpec & spec, RngStream & rng);
SampledSequence sample_conditional_oracle(const PointProcessSpec & spec, RngStream & rng);

/// Rounds sorted real times up to integer ticks in [1, horizon] and spreads
/// equal ticks onto distinct consecutive values when there is room.
std::vector<TimeUs> quantize_times(std::span<const double> times, TimeUs horizon, bool * capacity_warning = nullptr);

/// Integral of the rate over (0, horizon].
double rate_mass(const RateFunction & rate, TimeUs horizon);

}  // namespace evsr

#endif  // EVSR_POISSON_SAMPLER_HPP
