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

#ifndef EVSR_METRICS_HPP
#define EVSR_METRICS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evsr/event_stream.hpp"

namespace evsr
{
/// 8-bit grey frame, pixels(y, x).
struct Frame
{
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> pixels;

  int width() const { return static_cast<int>(pixels.cols()); }
  int height() const { return static_cast<int>(pixels.rows()); }
};

/// Flat key=value report. Keys keep insertion order; absent metrics are not printed.
struct MetricReport
{
  std::optional<double> rmse;
  std::optional<double> dfrf;
  std::size_t events_lr = 0;
  std::size_t events_hr = 0;
  std::vector<std::pair<std::string, std::string>> extra;
  std::vector<std::pair<std::string, std::string>> config;

  std::string to_text() const;
};

/// Per-pixel PSTHs of both polarities, max-normalized, metric bins of bin_width.
/// Rows are pixels (y * width + x).
Eigen::MatrixXd pixel_psth(const EventStream & stream, TimeUs bin_width);

/// sqrt of the pixel-average of the per-pixel mean squared PSTH difference.
double rmse_psth(const EventStream & candidate, const EventStream & reference, TimeUs bin_width = 100);

/// Total firing rate per bin over all pixels, events per microsecond.
Eigen::VectorXd total_rate_curve(const EventStream & stream, TimeUs bin_width);

/// Relative RMS difference in percent between total rate curves, after
/// rescaling the HR curve to the LR event total.
double dfrf(const EventStream & hr, const EventStream & lr, TimeUs bin_width = 100);

/// Integrates ON minus OFF per pixel inside the window; 0 maps to 128 and
/// the largest magnitude to 128 +- 127.
Frame reconstruct_frame(const EventStream & stream, TimeWindow window);

/// Nearest-neighbour enlargement by an integer factor, for side-by-side display.
Frame enlarge_frame(const Frame & frame, int factor);

/// Binary PGM (P5, maxval 255).
std::string frame_to_pgm(const Frame & frame);

/// "bin_start_us,f_lr,f_hr" lines for two total-rate curves on the same grid.
std::string rate_curves_csv(const Eigen::VectorXd & f_lr, const Eigen::VectorXd & f_hr, TimeUs bin_width);

}  // namespace evsr

#endif  // EVSR_METRICS_HPP
