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

#include "evsr/sparse_sr.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "evsr/errors.hpp"
#include "evsr/rng.hpp"

namespace evsr
{
namespace
{
static_assert(std::endian::native == std::endian::little, "dictionary I/O assumes a little-endian host");

constexpr std::uint8_t kDictMagic[4] = {0x45, 0x56, 0x44, 0x43};  // "EVDC"

Eigen::MatrixXd remove_column_means(const Eigen::MatrixXd & m)
{
  return m.rowwise() - m.colwise().mean();
}

}  // namespace

double contrast(const Eigen::VectorXd & y)
{
  return (y.array() - y.mean()).matrix().norm();
}

Eigen::VectorXd flatten_patch(const Eigen::Ref<const Eigen::MatrixXd> & block)
{
  Eigen::VectorXd v(block.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < block.rows(); ++r) {
    for (Eigen::Index c = 0; c < block.cols(); ++c) v(k++) = block(r, c);
  }
  return v;
}

DictionaryPair::DictionaryPair(
  int factor, int lr_patch_size, Eigen::MatrixXd lr_atoms, Eigen::MatrixXd hr_atoms)
: factor_(factor), lr_patch_size_(lr_patch_size), lr_atoms_(std::move(lr_atoms)), hr_atoms_(std::move(hr_atoms))
{
  if (factor < 2) throw ArgumentError("dictionary factor must be >= 2");
  if (lr_patch_size < 1) throw ArgumentError("LR patch size must be positive");
  const auto lr_len = static_cast<Eigen::Index>(lr_patch_size) * lr_patch_size;
  const auto hr_len = static_cast<Eigen::Index>(hr_patch_size()) * hr_patch_size();
  if (lr_atoms_.rows() != lr_len || hr_atoms_.rows() != hr_len) {
    throw ArgumentError("atom lengths do not match the patch geometry");
  }
  if (lr_atoms_.cols() != hr_atoms_.cols()) throw ArgumentError("LR and HR atom counts differ");
  if (lr_atoms_.cols() < lr_len) throw ArgumentError("dictionary must be overcomplete (K >= patch length)");
  if (!lr_atoms_.allFinite() || !hr_atoms_.allFinite()) throw ArgumentError("non-finite atom");
  for (Eigen::Index j = 0; j < lr_atoms_.cols(); ++j) {
    const double norm = std::sqrt(lr_atoms_.col(j).squaredNorm() + hr_atoms_.col(j).squaredNorm());
    if (!(norm > 0)) throw ArgumentError("zero atom in dictionary");
    // Already-normalized columns (e.g. read back from disk) keep their exact bits.
    if (std::abs(norm - 1.0) <= 1e-12) continue;
    lr_atoms_.col(j) /= norm;
    hr_atoms_.col(j) /= norm;
  }
  lr_features_ = remove_column_means(lr_atoms_);
  hr_features_ = remove_column_means(hr_atoms_);
}

bool DictionaryPair::operator==(const DictionaryPair & other) const
{
  return factor_ == other.factor_ && lr_patch_size_ == other.lr_patch_size_ &&
         lr_atoms_.rows() == other.lr_atoms_.rows() && lr_atoms_.cols() == other.lr_atoms_.cols() &&
         lr_atoms_ == other.lr_atoms_ && hr_atoms_ == other.hr_atoms_;
}

DictionaryPair train_dictionaries(
  std::span<const CountMap> hr_maps, int factor, int atoms, std::uint64_t seed, int lr_patch_size)
{
  if (factor < 2) throw ArgumentError("factor must be >= 2");
  if (hr_maps.empty()) throw ArgumentError("no training maps");
  const int p = lr_patch_size;
  const int hp = factor * p;
  if (atoms < p * p) throw ArgumentError("dictionary must be overcomplete (K >= patch length)");

  std::vector<CountMap> lr_maps;
  std::uint64_t positions = 0;
  for (const auto & m : hr_maps) {
    if (m.width() % factor != 0 || m.height() % factor != 0) {
      throw ArgumentError("training map geometry not divisible by factor");
    }
    lr_maps.push_back(block_sum(m, factor));
    if (lr_maps.back().width() < p || lr_maps.back().height() < p) {
      throw ArgumentError("training map smaller than one patch");
    }
    positions += static_cast<std::uint64_t>(lr_maps.back().width() - p + 1) *
                 static_cast<std::uint64_t>(lr_maps.back().height() - p + 1);
  }
  if (static_cast<std::uint64_t>(atoms) > positions) {
    throw ArgumentError("more atoms requested than patch positions available");
  }

  Eigen::MatrixXd lr_atoms(p * p, atoms);
  Eigen::MatrixXd hr_atoms(hp * hp, atoms);
  RngStream rng(seed);
  const std::uint64_t max_draws = 100ULL * static_cast<std::uint64_t>(atoms);
  std::uint64_t draws = 0;
  int filled = 0;
  while (filled < atoms) {
    if (draws++ >= max_draws) {
      throw TrainingError("not enough nonzero patches in the training maps");
    }
    const auto m = rng.below(lr_maps.size());
    const auto & lr = lr_maps[m];
    const int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(lr.height() - p + 1)));
    const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(lr.width() - p + 1)));
    const auto hr_block = hr_maps[m].counts().block(r * factor, c * factor, hp, hp);
    if ((hr_block.array() == 0.0).all()) continue;
    lr_atoms.col(filled) = flatten_patch(lr.counts().block(r, c, p, p));
    hr_atoms.col(filled) = flatten_patch(hr_block);
    ++filled;
  }
  return DictionaryPair(factor, p, std::move(lr_atoms), std::move(hr_atoms));
}

SparseCode sparse_code(
  const Eigen::VectorXd & y, const OverlapConstraint & overlap, const DictionaryPair & dict,
  const SparseCodeConfig & config)
{
  const Eigen::Index lr_len = dict.lr_features().rows();
  const Eigen::Index hr_len = dict.hr_features().rows();
  if (y.size() != lr_len) throw ArgumentError("LR patch length does not match dictionary");
  if (overlap.values.size() != hr_len || overlap.mask.size() != hr_len) {
    throw ArgumentError("overlap length does not match dictionary");
  }
  if (!y.allFinite() || !overlap.values.allFinite()) throw ArgumentError("non-finite sparse-code input");
  if (!(config.lambda > 0) || !(config.beta > 0) || config.max_iter <= 0 || !(config.tol > 0)) {
    throw ArgumentError("sparse-code parameters must be positive");
  }

  const double mean = y.mean();
  const double hr_mean = mean / (dict.factor() * dict.factor());
  const double scale = contrast(y);
  const Eigen::Index known = overlap.mask.count();
  if (scale == 0.0) return {Eigen::VectorXd::Zero(dict.atoms()), {0.0}, 0};

  Eigen::MatrixXd A(lr_len + known, dict.atoms());
  Eigen::VectorXd b(lr_len + known);
  A.topRows(lr_len) = dict.lr_features();
  b.head(lr_len) = (y.array() - mean) / scale;
  Eigen::Index row = lr_len;
  for (Eigen::Index i = 0; i < hr_len; ++i) {
    if (!overlap.mask(i)) continue;
    A.row(row) = config.beta * dict.hr_features().row(i);
    b(row) = config.beta * (overlap.values(i) - hr_mean) / scale;
    ++row;
  }

  auto solved = lasso_coordinate_descent(A, b, config.lambda, config.max_iter, config.tol);
  return {std::move(solved.coefficients), std::move(solved.objective), solved.sweeps};
}

Eigen::VectorXd reconstruct_hr_patch(
  const Eigen::VectorXd & y, const Eigen::VectorXd & coefficients, const DictionaryPair & dict)
{
  const double hr_mean = y.mean() / (dict.factor() * dict.factor());
  return (contrast(y) * (dict.hr_features() * coefficients)).array() + hr_mean;
}

CountMap upscale_count_map(const CountMap & lr_map, const DictionaryPair & dict, const SparseCodeConfig & config)
{
  const int p = dict.lr_patch_size();
  const int a = dict.factor();
  const int hp = dict.hr_patch_size();
  if (lr_map.width() < p || lr_map.height() < p) {
    throw ArgumentError("LR map smaller than the dictionary patch");
  }
  const int hr_w = lr_map.width() * a;
  const int hr_h = lr_map.height() * a;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(hr_h, hr_w);
  Eigen::MatrixXd hits = Eigen::MatrixXd::Zero(hr_h, hr_w);

  const auto grid = extract_patches(lr_map, p, 1);
  OverlapConstraint overlap = OverlapConstraint::none(hp * hp);
  for (const auto & patch : grid.patches) {
    const Eigen::VectorXd y = flatten_patch(patch.values);
    const int r0 = patch.row * a;
    const int c0 = patch.col * a;
    for (int r = 0; r < hp; ++r) {
      for (int c = 0; c < hp; ++c) {
        const double h = hits(r0 + r, c0 + c);
        overlap.mask(r * hp + c) = h > 0;
        overlap.values(r * hp + c) = h > 0 ? sum(r0 + r, c0 + c) / h : 0.0;
      }
    }
    Eigen::VectorXd hr_patch;
    if ((y.array() == 0.0).all() && !overlap.mask.any()) {
      hr_patch = Eigen::VectorXd::Zero(hp * hp);
    } else {
      const auto code = sparse_code(y, overlap, dict, config);
      hr_patch = reconstruct_hr_patch(y, code.coefficients, dict);
    }
    for (int r = 0; r < hp; ++r) {
      for (int c = 0; c < hp; ++c) {
        sum(r0 + r, c0 + c) += hr_patch(r * hp + c);
        hits(r0 + r, c0 + c) += 1.0;
      }
    }
  }
  Eigen::MatrixXd hr = (sum.array() / hits.array()).cwiseMax(0.0);
  return CountMap(std::move(hr), lr_map.polarity());
}

std::vector<std::uint8_t> write_dictionary(const DictionaryPair & dict)
{
  std::vector<std::uint8_t> out(std::begin(kDictMagic), std::end(kDictMagic));
  auto put = [&out](const void * src, std::size_t n) {
    const auto * b = static_cast<const std::uint8_t *>(src);
    out.insert(out.end(), b, b + n);
  };
  const auto factor = static_cast<std::uint16_t>(dict.factor());
  const auto patch = static_cast<std::uint16_t>(dict.lr_patch_size());
  const auto k = static_cast<std::uint32_t>(dict.atoms());
  put(&factor, 2);
  put(&patch, 2);
  put(&k, 4);
  for (Eigen::Index j = 0; j < dict.atoms(); ++j) {
    for (Eigen::Index i = 0; i < dict.lr_atoms().rows(); ++i) put(&dict.lr_atoms()(i, j), 8);
    for (Eigen::Index i = 0; i < dict.hr_atoms().rows(); ++i) put(&dict.hr_atoms()(i, j), 8);
  }
  return out;
}

DictionaryPair read_dictionary(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() < 4 || !std::equal(std::begin(kDictMagic), std::end(kDictMagic), bytes.begin())) {
    throw FormatError("bad magic");
  }
  if (bytes.size() < 12) throw FormatError("truncated dictionary header");
  std::uint16_t factor = 0, patch = 0;
  std::uint32_t k = 0;
  std::memcpy(&factor, bytes.data() + 4, 2);
  std::memcpy(&patch, bytes.data() + 6, 2);
  std::memcpy(&k, bytes.data() + 8, 4);
  const std::size_t lr_len = static_cast<std::size_t>(patch) * patch;
  const std::size_t hr_len = lr_len * factor * factor;
  const std::size_t expected = 12 + static_cast<std::size_t>(k) * (lr_len + hr_len) * 8;
  if (bytes.size() != expected) throw FormatError("dictionary size does not match its header");

  Eigen::MatrixXd lr(lr_len, k);
  Eigen::MatrixXd hr(hr_len, k);
  const std::uint8_t * p = bytes.data() + 12;
  for (std::uint32_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < lr_len; ++i, p += 8) std::memcpy(&lr(i, j), p, 8);
    for (std::size_t i = 0; i < hr_len; ++i, p += 8) std::memcpy(&hr(i, j), p, 8);
  }
  try {
    return DictionaryPair(factor, patch, std::move(lr), std::move(hr));
  } catch (const ArgumentError & e) {
    throw FormatError(std::string("invalid dictionary: ") + e.what());
  }
}

DictionaryPair load_dictionary(const std::filesystem::path & path)
{
  return read_dictionary(read_file_bytes(path));
}

void save_dictionary(const std::filesystem::path & path, const DictionaryPair & dict)
{
  write_file_bytes(path, write_dictionary(dict));
}

}  // namespace evsr
