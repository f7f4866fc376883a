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

#include "evsr/poisson_sampler.hpp"

#include <algorithm>
#include <cmath>

#include "evsr/errors.hpp"

namespace evsr
{
namespace
{
void validate(const PointProcessSpec & spec)
{
  if (spec.n_target < 0) throw ArgumentError("target count must be non-negative");
  if (spec.horizon <= 0) throw ArgumentError("horizon must be positive");
  if (spec.rate.bin_width < 1 || spec.rate.bins() == 0) throw ArgumentError("empty rate function");
  if (spec.rate.horizon() < spec.horizon) throw ArgumentError("rate function does not cover (0, T]");
  if (!spec.rate.values.allFinite() || (spec.rate.values.array() < 0.0).any()) {
    throw ArgumentError("rate values must be finite and non-negative");
  }
}

Eigen::Index bins_within(const RateFunction & rate, TimeUs horizon)
{
  return std::min<Eigen::Index>(rate.bins(), bins_for(horizon, rate.bin_width));
}

/// The rate actually sampled: the spec's rate, or all-ones if it has no mass.
RateFunction effective_rate(const PointProcessSpec & spec, bool & fallback)
{
  fallback = rate_mass(spec.rate, spec.horizon) <= 0.0;
  if (!fallback) return spec.rate;
  return {spec.rate.bin_width, Eigen::VectorXd::Ones(spec.rate.bins())};
}

}  // namespace

double rate_mass(const RateFunction & rate, TimeUs horizon)
{
  double mass = 0.0;
  const Eigen::Index n = bins_within(rate, horizon);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TimeUs start = i * rate.bin_width;
    const TimeUs end = std::min(start + rate.bin_width, horizon);
    mass += rate.values(i) * static_cast<double>(end - start);
  }
  return mass;
}

std::vector<double> sample_homogeneous(double rate_per_us, double horizon_us, RngStream & rng)
{
  if (!(rate_per_us > 0) || !std::isfinite(rate_per_us)) throw ArgumentError("homogeneous rate must be positive");
  if (!(horizon_us > 0)) throw ArgumentError("horizon must be positive");
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(std::min(rate_per_us * horizon_us * 1.1 + 16.0, 1e6)));
  double t = 0.0;
  for (;;) {
    t += rng.exponential(rate_per_us);
    if (t > horizon_us) break;
    // A zero-length gap would break strict ordering; it has probability ~2^-53.
    if (!times.empty() && t <= times.back()) continue;
    times.push_back(t);
  }
  return times;
}

std::vector<double> thin(
  std::span<const double> candidates, const RateFunction & rate, double lambda_max, RngStream & rng)
{
  if (!(lambda_max > 0)) throw ArgumentError("dominating rate must be positive");
  if (!std::is_sorted(candidates.begin(), candidates.end())) throw ArgumentError("candidates must be sorted");
  std::vector<double> accepted;
  accepted.reserve(candidates.size());
  for (double s : candidates) {
    const double value = rate.at(s);
    if (value > lambda_max * (1.0 + 1e-12)) {
      throw ContractViolation("rate exceeds its dominating constant");
    }
    if (rng.uniform() < value / lambda_max) accepted.push_back(s);
  }
  return accepted;
}

ContinuousSample sample_event_times(const PointProcessSpec & spec, RngStream & rng, const SamplerOptions & options)
{
  validate(spec);
  if (!(options.headroom > 0)) throw ArgumentError("headroom must be positive");
  ContinuousSample out;
  if (spec.n_target == 0) return out;

  const RateFunction rate = effective_rate(spec, out.uniform_fallback);
  const auto n = static_cast<std::size_t>(spec.n_target);
  const double mass = rate_mass(rate, spec.horizon);
  const double lambda_max = rate.values.head(bins_within(rate, spec.horizon)).maxCoeff();
  // Shape units -> events/us so one batch yields ~headroom * n acceptances.
  const double scale = options.headroom * static_cast<double>(n) / mass;
  const double candidate_rate = scale * lambda_max;
  const auto horizon = static_cast<double>(spec.horizon);

  out.times.reserve(n);
  while (out.times.size() < n) {
    if (out.batches >= options.max_batches) throw ContractViolation("thinning did not reach the target count");
    ++out.batches;
    const auto candidates = sample_homogeneous(candidate_rate, horizon, rng);
    auto accepted = thin(candidates, rate, lambda_max, rng);
    const std::size_t need = n - out.times.size();
    if (accepted.size() > need) {
      // Candidate labels are exchangeable, so stopping after `need` acceptances
      // keeps a uniformly random subset of this batch's accepted events.
      for (std::size_t k = 0; k < need; ++k) {
        std::swap(accepted[k], accepted[k + rng.below(accepted.size() - k)]);
      }
      accepted.resize(need);
    }
    out.times.insert(out.times.end(), accepted.begin(), accepted.end());
  }
  std::sort(out.times.begin(), out.times.end());
  return out;
}

ContinuousSample sample_conditional_times(const PointProcessSpec & spec, RngStream & rng)
{
  validate(spec);
  ContinuousSample out;
  if (spec.n_target == 0) return out;
  const RateFunction rate = effective_rate(spec, out.uniform_fallback);
  const Eigen::Index bins = bins_within(rate, spec.horizon);

  std::vector<double> cdf(static_cast<std::size_t>(bins));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < bins; ++i) {
    const TimeUs start = i * rate.bin_width;
    const TimeUs end = std::min(start + rate.bin_width, spec.horizon);
    acc += rate.values(i) * static_cast<double>(end - start);
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  out.times.reserve(static_cast<std::size_t>(spec.n_target));
  for (std::int64_t k = 0; k < spec.n_target; ++k) {
    const double u = rng.uniform_open_closed() * acc;
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto i = static_cast<Eigen::Index>(it - cdf.begin());
    const double below = i > 0 ? cdf[static_cast<std::size_t>(i - 1)] : 0.0;
    const TimeUs start = i * rate.bin_width;
    const TimeUs end = std::min(start + rate.bin_width, spec.horizon);
    const double frac = (u - below) / (cdf[static_cast<std::size_t>(i)] - below);
    double s = static_cast<double>(start) + frac * static_cast<double>(end - start);
    s = std::clamp(s, std::nextafter(static_cast<double>(start), static_cast<double>(end)), static_cast<double>(end));
    out.times.push_back(s);
  }
  std::sort(out.times.begin(), out.times.end());
  return out;
}

std::vector<TimeUs> quantize_times(std::span<const double> times, TimeUs horizon, bool * capacity_warning)
{
  std::vector<TimeUs> ticks;
  ticks.reserve(times.size());
  for (double s : times) ticks.push_back(std::clamp<TimeUs>(static_cast<TimeUs>(std::ceil(s)), 1, horizon));
  std::sort(ticks.begin(), ticks.end());
  const auto n = static_cast<TimeUs>(ticks.size());
  const bool room = n <= horizon;
  if (capacity_warning) *capacity_warning = !room;
  if (!room || ticks.empty()) return ticks;

  for (std::size_t i = 1; i < ticks.size(); ++i) ticks[i] = std::max(ticks[i], ticks[i - 1] + 1);
  if (ticks.back() > horizon) {
    ticks.back() = horizon;
    for (std::size_t i = ticks.size() - 1; i-- > 0;) ticks[i] = std::min(ticks[i], ticks[i + 1] - 1);
  }
  return ticks;
}

SampledSequence sample_event_sequence(const PointProcessSpec & spec, RngStream & rng, const SamplerOptions & options)
{
  auto sample = sample_event_times(spec, rng, options);
  SampledSequence out;
  out.uniform_fallback = sample.uniform_fallback;
  out.batches = sample.batches;
  out.times = quantize_times(sample.times, spec.horizon, &out.capacity_warning);
  return out;
}

SampledSequence sample_conditional_oracle(const PointProcessSpec & spec, RngStream & rng)
{
  auto sample = sample_conditional_times(spec, rng);
  SampledSequence out;
  out.uniform_fallback = sample.uniform_fallback;
  out.times = quantize_times(sample.times, spec.horizon, &out.capacity_warning);
  return out;
}

}  // namespace evsr
