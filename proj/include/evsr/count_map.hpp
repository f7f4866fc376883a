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

#ifndef EVSR_COUNT_MAP_HPP
#define EVSR_COUNT_MAP_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "evsr/event_stream.hpp"

namespace evsr
{
/// Per-pixel event counts for one polarity. Stored row-major as
/// counts(y, x); integer-valued when built from events, real after SR.
class CountMap
{
public:
  CountMap(int width, int height, Polarity polarity = Polarity::On);
  CountMap(Eigen::MatrixXd counts, Polarity polarity);

  int width() const { return static_cast<int>(counts_.cols()); }
  int height() const { return static_cast<int>(counts_.rows()); }
  Polarity polarity() const { return polarity_; }

  const Eigen::MatrixXd & counts() const { return counts_; }
  double operator()(int x, int y) const { return counts_(y, x); }
  double total() const { return counts_.sum(); }

private:
  Eigen::MatrixXd counts_;
  Polarity polarity_;
};

CountMap build_count_map(const EventStream & stream, TimeWindow window, Polarity polarity);

/// Sum over factor x factor blocks; the count map of downsample_spatial(stream, factor).
CountMap block_sum(const CountMap & map, int factor);

struct Patch
{
  int row = 0;
  int col = 0;
  Eigen::MatrixXd values;
};

struct PatchGrid
{
  int patch_size = 0;
  int overlap = 0;
  std::vector<Patch> patches;  ///< raster order
};

/// Patch origins along one axis: stride patch_size - overlap, last origin
/// clamped to length - patch_size so the far edge is covered.
std::vector<int> patch_offsets(int length, int patch_size, int overlap);

PatchGrid extract_patches(const CountMap & map, int patch_size, int overlap);

/// Each pixel becomes the mean of every patch value covering it.
CountMap assemble_patches(
  const PatchGrid & grid, int width, int height, Polarity polarity = Polarity::On);

std::string count_map_to_csv(const CountMap & map);
CountMap count_map_from_csv(std::string_view text, Polarity polarity = Polarity::On);

/// Plain PGM (P2), maxval = max count rounded up (at least 1).
std::string count_map_to_pgm(const CountMap & map);

}  // namespace evsr

#endif  // EVSR_COUNT_MAP_HPP
