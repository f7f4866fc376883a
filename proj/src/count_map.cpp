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

#include "evsr/count_map.hpp"

#include <cmath>
#include <sstream>

#include "evsr/errors.hpp"

namespace evsr
{
CountMap::CountMap(int width, int height, Polarity polarity)
: counts_(Eigen::MatrixXd::Zero(height, width)), polarity_(polarity)
{
  if (width <= 0 || height <= 0) throw ArgumentError("count map dimensions must be positive");
}

CountMap::CountMap(Eigen::MatrixXd counts, Polarity polarity)
: counts_(std::move(counts)), polarity_(polarity)
{
  if (counts_.rows() <= 0 || counts_.cols() <= 0) {
    throw ArgumentError("count map dimensions must be positive");
  }
  if (!counts_.allFinite() || (counts_.array() < 0.0).any()) {
    throw ArgumentError("counts must be finite and non-negative");
  }
}

CountMap build_count_map(const EventStream & stream, TimeWindow window, Polarity polarity)
{
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(stream.height(), stream.width());
  const auto p = sign(polarity);
  for (const auto & e : stream.events()) {
    if (e.p == p && window.contains(e.t)) counts(e.y, e.x) += 1.0;
  }
  return CountMap(std::move(counts), polarity);
}

CountMap block_sum(const CountMap & map, int factor)
{
  if (factor < 1) throw ArgumentError("block factor must be positive");
  if (map.width() % factor != 0 || map.height() % factor != 0) {
    throw ArgumentError("map geometry not divisible by block factor");
  }
  const int h = map.height() / factor;
  const int w = map.width() / factor;
  Eigen::MatrixXd out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out(y, x) = map.counts().block(y * factor, x * factor, factor, factor).sum();
    }
  }
  return CountMap(std::move(out), map.polarity());
}

std::vector<int> patch_offsets(int length, int patch_size, int overlap)
{
  if (patch_size <= 0) throw ArgumentError("patch size must be positive");
  if (overlap < 0 || overlap >= patch_size) throw ArgumentError("overlap must be in [0, patch_size)");
  if (patch_size > length) throw ArgumentError("patch larger than map");
  const int stride = patch_size - overlap;
  std::vector<int> offsets;
  int o = 0;
  for (;;) {
    offsets.push_back(o);
    if (o + patch_size >= length) break;
    o += stride;
    if (o + patch_size > length) o = length - patch_size;
  }
  return offsets;
}

PatchGrid extract_patches(const CountMap & map, int patch_size, int overlap)
{
  const auto rows = patch_offsets(map.height(), patch_size, overlap);
  const auto cols = patch_offsets(map.width(), patch_size, overlap);
  PatchGrid grid{patch_size, overlap, {}};
  grid.patches.reserve(rows.size() * cols.size());
  for (int r : rows) {
    for (int c : cols) {
      grid.patches.push_back({r, c, map.counts().block(r, c, patch_size, patch_size)});
    }
  }
  return grid;
}

CountMap assemble_patches(const PatchGrid & grid, int width, int height, Polarity polarity)
{
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(height, width);
  Eigen::MatrixXd hits = Eigen::MatrixXd::Zero(height, width);
  for (const auto & patch : grid.patches) {
    const auto ph = static_cast<int>(patch.values.rows());
    const auto pw = static_cast<int>(patch.values.cols());
    if (patch.row < 0 || patch.col < 0 || patch.row + ph > height || patch.col + pw > width) {
      throw ArgumentError("patch lies outside the target map");
    }
    sum.block(patch.row, patch.col, ph, pw) += patch.values;
    hits.block(patch.row, patch.col, ph, pw).array() += 1.0;
  }
  if ((hits.array() == 0.0).any()) throw ContractViolation("uncovered pixel in patch assembly");
  return CountMap(Eigen::MatrixXd(sum.array() / hits.array()), polarity);
}

std::string count_map_to_csv(const CountMap & map)
{
  std::ostringstream out;
  out.precision(17);
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (x) out << ',';
      out << map(x, y);
    }
    out << '\n';
  }
  return out.str();
}

CountMap count_map_from_csv(std::string_view text, Polarity polarity)
{
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception &) {
        throw ParseError(line_no, "non-numeric count");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError(line_no, "ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw ParseError(1, "empty count map");
  Eigen::MatrixXd counts(rows.size(), rows.front().size());
  for (std::size_t y = 0; y < rows.size(); ++y) {
    for (std::size_t x = 0; x < rows[y].size(); ++x) counts(y, x) = rows[y][x];
  }
  return CountMap(std::move(counts), polarity);
}

std::string count_map_to_pgm(const CountMap & map)
{
  const int maxval = std::max(1, static_cast<int>(std::ceil(map.counts().maxCoeff())));
  std::ostringstream out;
  out << "P2\n" << map.width() << ' ' << map.height() << '\n' << maxval << '\n';
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (x) out << ' ';
      out << std::lround(map(x, y));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace evsr
