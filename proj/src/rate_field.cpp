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

#include "evsr/rate_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "evsr/errors.hpp"

namespace evsr
{
RateField::RateField(int width, int height, TimeUs bin_width, Storage values)
: width_(width), height_(height), bin_width_(bin_width), values_(std::move(values))
{
  if (width <= 0 || height <= 0) throw ArgumentError("rate field geometry must be positive");
  if (bin_width < 1) throw ArgumentError("bin width must be >= 1 us");
  if (values_.rows() != static_cast<Eigen::Index>(width) * height) {
    throw ArgumentError("rate field rows do not match the geometry");
  }
  values_.makeCompressed();
}

RateField RateField::from_dense(int width, int height, TimeUs bin_width, const Eigen::MatrixXd & values)
{
  return RateField(width, height, bin_width, values.sparseView());
}

Kernel::Kernel(const Eigen::Matrix3d & w) : weights(w)
{
  if ((w.array() < 0.0).any()) throw ArgumentError("kernel weights must be non-negative");
  if (std::abs(w.sum() - 1.0) > 1e-12) throw ArgumentError("kernel weights must sum to 1");
}

Kernel default_kernel()
{
  Eigen::Matrix3d w;
  w << 0, 1, 0, 1, 12, 1, 0, 1, 0;
  return Kernel(w / 16.0);
}

Kernel nearest_kernel()
{
  Eigen::Matrix3d w = Eigen::Matrix3d::Zero();
  w(1, 1) = 1.0;
  return Kernel(w);
}

RateFunction build_psth(std::span<const double> times, TimeUs horizon, TimeUs bin_width)
{
  if (bin_width < 1) throw ArgumentError("bin width must be >= 1 us");
  if (horizon <= 0 || horizon % bin_width != 0) {
    throw ArgumentError("horizon must be a positive multiple of the bin width");
  }
  RateFunction rate{bin_width, Eigen::VectorXd::Zero(horizon / bin_width)};
  for (double s : times) {
    if (!(s > 0) || s > static_cast<double>(horizon)) throw ArgumentError("event time outside (0, T]");
    rate.values(rate.bin_of(s)) += 1.0;
  }
  const double peak = rate.values.maxCoeff();
  if (peak > 0) rate.values /= peak;
  return rate;
}

RateField build_rate_field(const EventStream & stream, Polarity polarity, TimeUs bin_width)
{
  if (bin_width < 1) throw ArgumentError("bin width must be >= 1 us");
  const Eigen::Index bins = bins_for(stream.duration(), bin_width);
  const Eigen::Index pixels = static_cast<Eigen::Index>(stream.width()) * stream.height();
  RateField::Storage values(pixels, bins);
  if (bins == 0) return RateField(stream.width(), stream.height(), bin_width, std::move(values));

  const auto p = sign(polarity);
  std::vector<Eigen::Triplet<double>> hits;
  for (const auto & e : stream.events()) {
    if (e.p != p) continue;
    hits.emplace_back(static_cast<Eigen::Index>(e.y) * stream.width() + e.x, tick_bin(e.t, bin_width, bins), 1.0);
  }
  values.setFromTriplets(hits.begin(), hits.end());  // duplicates are summed
  for (Eigen::Index r = 0; r < values.outerSize(); ++r) {
    double peak = 0.0;
    for (RateField::Storage::InnerIterator it(values, r); it; ++it) peak = std::max(peak, it.value());
    if (peak <= 0) continue;
    for (RateField::Storage::InnerIterator it(values, r); it; ++it) it.valueRef() /= peak;
  }
  return RateField(stream.width(), stream.height(), bin_width, std::move(values));
}

RateFunction hr_rate_function(const RateField & lr_field, int i, int j, int factor, const Kernel & kernel)
{
  if (factor < 1) throw ArgumentError("factor must be positive");
  if (i < 0 || j < 0 || i >= lr_field.width() * factor || j >= lr_field.height() * factor) {
    throw ArgumentError("HR pixel out of range");
  }
  const int x = i / factor;
  const int y = j / factor;
  RateFunction out{lr_field.bin_width(), Eigen::VectorXd::Zero(lr_field.bins())};
  for (int iy = -1; iy <= 1; ++iy) {
    for (int ix = -1; ix <= 1; ++ix) {
      const double w = kernel.weights(iy + 1, ix + 1);
      if (w == 0.0) continue;
      const int nx = std::clamp(x + ix, 0, lr_field.width() - 1);
      const int ny = std::clamp(y + iy, 0, lr_field.height() - 1);
      for (RateField::Storage::InnerIterator it(lr_field.values(), lr_field.index(nx, ny)); it; ++it) {
        out.values(it.col()) += w * it.value();
      }
    }
  }
  return out;
}

std::string rate_field_to_csv(const RateField & field)
{
  std::ostringstream out;
  out.precision(17);
  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < field.width(); ++x) {
      out << y << ',' << x;
      const Eigen::VectorXd row = field.pixel(x, y);
      for (Eigen::Index b = 0; b < row.size(); ++b) out << ',' << row(b);
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace evsr
