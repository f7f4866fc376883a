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

#include "evsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "evsr/errors.hpp"
#include "evsr/rate_field.hpp"

namespace evsr
{
std::string MetricReport::to_text() const
{
  std::ostringstream out;
  out.precision(10);
  if (rmse) out << "rmse=" << *rmse << '\n';
  if (dfrf) out << "dfrf=" << *dfrf << '\n';
  out << "events_lr=" << events_lr << '\n';
  out << "events_hr=" << events_hr << '\n';
  for (const auto & [k, v] : extra) out << k << '=' << v << '\n';
  for (const auto & [k, v] : config) out << k << '=' << v << '\n';
  return out.str();
}

Eigen::MatrixXd pixel_psth(const EventStream & stream, TimeUs bin_width)
{
  if (bin_width < 1) throw ArgumentError("bin width must be >= 1 us");
  const Eigen::Index bins = bins_for(stream.duration(), bin_width);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(stream.width()) * stream.height(), bins);
  if (bins == 0) return h;
  for (const auto & e : stream.events()) {
    h(static_cast<Eigen::Index>(e.y) * stream.width() + e.x, tick_bin(e.t, bin_width, bins)) += 1.0;
  }
  Eigen::VectorXd peak = h.rowwise().maxCoeff();
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    if (peak(r) > 0) h.row(r) /= peak(r);
  }
  return h;
}

namespace
{
/// Sparse max-normalized PSTH of one pixel: (bin, value) pairs in bin order.
using SparsePsth = std::vector<std::pair<Eigen::Index, double>>;

/// One sparse PSTH per pixel, built in a single pass over the time-sorted events.
std::vector<SparsePsth> sparse_psths(const EventStream & stream, TimeUs bin_width, Eigen::Index bins)
{
  std::vector<SparsePsth> out(static_cast<std::size_t>(stream.width()) * stream.height());
  for (const auto & e : stream.events()) {
    auto & h = out[static_cast<std::size_t>(e.y) * stream.width() + e.x];
    const auto b = tick_bin(e.t, bin_width, bins);
    if (!h.empty() && h.back().first == b) {
      h.back().second += 1.0;
    } else {
      h.emplace_back(b, 1.0);
    }
  }
  for (auto & h : out) {
    double peak = 0.0;
    for (const auto & [b, v] : h) peak = std::max(peak, v);
    for (auto & [b, v] : h) v /= peak;
  }
  return out;
}

double squared_distance(const SparsePsth & a, const SparsePsth & b)
{
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      sum += a[i].second * a[i].second;
      ++i;
    } else if (i == a.size() || b[j].first < a[i].first) {
      sum += b[j].second * b[j].second;
      ++j;
    } else {
      const double d = a[i].second - b[j].second;
      sum += d * d;
      ++i;
      ++j;
    }
  }
  return sum;
}

}  // namespace

double rmse_psth(const EventStream & candidate, const EventStream & reference, TimeUs bin_width)
{
  if (!candidate.same_geometry(reference)) throw ArgumentError("RMSE needs identical geometry");
  if (candidate.duration() != reference.duration()) throw ArgumentError("RMSE needs identical duration");
  if (bin_width < 1) throw ArgumentError("bin width must be >= 1 us");
  const Eigen::Index bins = bins_for(reference.duration(), bin_width);
  if (bins == 0) return 0.0;
  const auto a = sparse_psths(candidate, bin_width, bins);
  const auto b = sparse_psths(reference, bin_width, bins);
  double total = 0.0;
  for (std::size_t px = 0; px < a.size(); ++px) total += squared_distance(a[px], b[px]) / static_cast<double>(bins);
  return std::sqrt(total / static_cast<double>(a.size()));
}

Eigen::VectorXd total_rate_curve(const EventStream & stream, TimeUs bin_width)
{
  if (bin_width < 1) throw ArgumentError("bin width must be >= 1 us");
  const Eigen::Index bins = bins_for(stream.duration(), bin_width);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(bins);
  if (bins == 0) return f;
  for (const auto & e : stream.events()) f(tick_bin(e.t, bin_width, bins)) += 1.0;
  return f / static_cast<double>(bin_width);
}

double dfrf(const EventStream & hr, const EventStream & lr, TimeUs bin_width)
{
  if (hr.duration() != lr.duration()) throw ArgumentError("DFRF needs identical duration");
  if (lr.empty()) throw MetricError("DFRF undefined for an empty reference stream");
  const Eigen::VectorXd f_l = total_rate_curve(lr, bin_width);
  Eigen::VectorXd f_h = total_rate_curve(hr, bin_width);
  const double hr_total = f_h.sum();
  if (hr_total > 0) f_h *= f_l.sum() / hr_total;
  const double rms = std::sqrt((f_h - f_l).array().square().mean());
  return 100.0 * rms / f_l.mean();
}

Frame reconstruct_frame(const EventStream & stream, TimeWindow window)
{
  if (window.t0 >= window.t1) throw ArgumentError("window must satisfy t0 < t1");
  Eigen::MatrixXd balance = Eigen::MatrixXd::Zero(stream.height(), stream.width());
  for (const auto & e : stream.events()) {
    if (window.contains(e.t)) balance(e.y, e.x) += e.p;
  }
  const double peak = balance.cwiseAbs().maxCoeff();
  Frame frame;
  frame.pixels.resize(stream.height(), stream.width());
  for (Eigen::Index y = 0; y < balance.rows(); ++y) {
    for (Eigen::Index x = 0; x < balance.cols(); ++x) {
      const double v = peak > 0 ? 128.0 + 127.0 * balance(y, x) / peak : 128.0;
      frame.pixels(y, x) = static_cast<std::uint8_t>(std::lround(v));
    }
  }
  return frame;
}

Frame enlarge_frame(const Frame & frame, int factor)
{
  if (factor < 1) throw ArgumentError("enlarge factor must be positive");
  Frame out;
  out.pixels.resize(frame.height() * factor, frame.width() * factor);
  for (Eigen::Index y = 0; y < out.pixels.rows(); ++y) {
    for (Eigen::Index x = 0; x < out.pixels.cols(); ++x) out.pixels(y, x) = frame.pixels(y / factor, x / factor);
  }
  return out;
}

std::string frame_to_pgm(const Frame & frame)
{
  std::string out = "P5\n" + std::to_string(frame.width()) + ' ' + std::to_string(frame.height()) + "\n255\n";
  out.reserve(out.size() + frame.pixels.size());
  for (Eigen::Index y = 0; y < frame.pixels.rows(); ++y) {
    for (Eigen::Index x = 0; x < frame.pixels.cols(); ++x) out.push_back(static_cast<char>(frame.pixels(y, x)));
  }
  return out;
}

std::string rate_curves_csv(const Eigen::VectorXd & f_lr, const Eigen::VectorXd & f_hr, TimeUs bin_width)
{
  if (f_lr.size() != f_hr.size()) throw ArgumentError("rate curves have different lengths");
  std::ostringstream out;
  out.precision(10);
  out << "bin_start_us,f_lr,f_hr\n";
  for (Eigen::Index i = 0; i < f_lr.size(); ++i) {
    out << i * bin_width << ',' << f_lr(i) << ',' << f_hr(i) << '\n';
  }
  return out.str();
}

}  // namespace evsr
