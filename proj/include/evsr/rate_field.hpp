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

#ifndef EVSR_RATE_FIELD_HPP
#define EVSR_RATE_FIELD_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "evsr/event_stream.hpp"

namespace evsr
{
/// Max-normalized PSTH on a uniform grid. Bin i covers (i*bin_width, (i+1)*bin_width].
struct RateFunction
{
  TimeUs bin_width = 50;
  Eigen::VectorXd values;

  Eigen::Index bins() const { return values.size(); }
  TimeUs horizon() const { return bin_width * static_cast<TimeUs>(values.size()); }

  /// Bin containing real time s in (0, horizon].
  Eigen::Index bin_of(double s) const
  {
    auto b = static_cast<Eigen::Index>(std::ceil(s / static_cast<double>(bin_width))) - 1;
    return std::clamp<Eigen::Index>(b, 0, values.size() - 1);
  }
  double at(double s) const { return values(bin_of(s)); }
};

/// Per-pixel rate functions sharing one bin grid, stored sparsely with one
/// row per pixel (y * width + x) and one column per bin.
class RateField
{
public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  RateField(int width, int height, TimeUs bin_width, Storage values);
  static RateField from_dense(int width, int height, TimeUs bin_width, const Eigen::MatrixXd & values);

  int width() const { return width_; }
  int height() const { return height_; }
  TimeUs bin_width() const { return bin_width_; }
  Eigen::Index bins() const { return values_.cols(); }

  const Storage & values() const { return values_; }
  Eigen::Index index(int x, int y) const { return static_cast<Eigen::Index>(y) * width_ + x; }
  Eigen::VectorXd pixel(int x, int y) const { return Eigen::VectorXd(values_.row(index(x, y)).transpose()); }
  RateFunction rate_function(int x, int y) const { return {bin_width_, pixel(x, y)}; }

private:
  int width_;
  int height_;
  TimeUs bin_width_;
  Storage values_;
};

/// 3x3 spatial kernel, weights(iy + 1, ix + 1); non-negative, unit sum.
struct Kernel
{
  Eigen::Matrix3d weights;

  explicit Kernel(const Eigen::Matrix3d & w);
};

/// (1/16) [[0,1,0],[1,12,1],[0,1,0]]
Kernel default_kernel();
/// Centre weight 1: nearest-neighbour interpolation of the rate.
Kernel nearest_kernel();

/// Histogram of real times in (0, horizon] over bins of bin_width, divided by
/// the largest bin count (all zeros when there are no events).
RateFunction build_psth(std::span<const double> times, TimeUs horizon, TimeUs bin_width);

/// Bins covering a horizon, padded up to a whole number of bins.
inline Eigen::Index bins_for(TimeUs horizon, TimeUs bin_width)
{
  return static_cast<Eigen::Index>((horizon + bin_width - 1) / bin_width);
}

/// Integer timestamp t stands for the tick (t, t + 1], so it falls in bin t / bin_width.
inline Eigen::Index tick_bin(TimeUs t, TimeUs bin_width, Eigen::Index bins)
{
  return std::min<Eigen::Index>(static_cast<Eigen::Index>(t / bin_width), bins - 1);
}

/// Per-pixel normalized PSTHs of the given polarity over (0, duration],
/// ceil(duration / bin_width) bins each.
RateField build_rate_field(const EventStream & stream, Polarity polarity, TimeUs bin_width);

/// Rate of HR pixel (i = column, j = row): the kernel-weighted sum of the 3x3
/// LR neighbourhood around (i / factor, j / factor), clamped at the sensor edge.
RateFunction hr_rate_function(const RateField & lr_field, int i, int j, int factor, const Kernel & kernel);

/// "row,col,v0,v1,..." per pixel.
std::string rate_field_to_csv(const RateField & field);

}  // namespace evsr

#endif  // EVSR_RATE_FIELD_HPP
