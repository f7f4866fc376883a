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

#ifndef EVSR_SPARSE_SR_HPP
#define EVSR_SPARSE_SR_HPP

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "evsr/count_map.hpp"

namespace evsr
{
template <typename Scalar>
struct LassoResult
{
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coefficients;
  /// objective[0] at the zero start, then one entry per completed sweep.
  std::vector<Scalar> objective;
  int sweeps = 0;
};

template <typename Scalar>
inline Scalar soft_threshold(Scalar value, Scalar threshold)
{
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return Scalar(0);
}

/// Lasso objective ||A x - b||^2 + lambda ||x||_1.
template <typename DerivedA, typename DerivedB, typename DerivedX>
typename DerivedA::Scalar lasso_objective(
  const Eigen::MatrixBase<DerivedA> & A, const Eigen::MatrixBase<DerivedB> & b,
  const Eigen::MatrixBase<DerivedX> & x, typename DerivedA::Scalar lambda)
{
  return (A * x - b).squaredNorm() + lambda * x.template lpNorm<1>();
}

/// Cyclic coordinate descent for min ||A x - b||^2 + lambda ||x||_1 from x = 0.
///
/// Each coordinate is minimized exactly by soft-thresholding, so the
/// objective never increases between sweeps. Stops after max_iter sweeps or
/// once the relative objective change of a sweep drops to tol.
template <typename DerivedA, typename DerivedB>
LassoResult<typename DerivedA::Scalar> lasso_coordinate_descent(
  const Eigen::MatrixBase<DerivedA> & A, const Eigen::MatrixBase<DerivedB> & b,
  typename DerivedA::Scalar lambda, int max_iter, typename DerivedA::Scalar tol)
{
  using Scalar = typename DerivedA::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  LassoResult<Scalar> result;
  const Eigen::Index n = A.cols();
  result.coefficients = Vector::Zero(n);
  Vector residual = b;
  const Vector col_sq = A.colwise().squaredNorm().transpose();
  const Scalar half_lambda = lambda / Scalar(2);

  Scalar f = residual.squaredNorm();
  result.objective.push_back(f);
  for (int sweep = 0; sweep < max_iter; ++sweep) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (col_sq(j) <= Scalar(0)) continue;
      const Scalar old = result.coefficients(j);
      const Scalar rho = A.col(j).dot(residual) + col_sq(j) * old;
      const Scalar updated = soft_threshold(rho, half_lambda) / col_sq(j);
      if (updated != old) {
        residual.noalias() -= A.col(j) * (updated - old);
        result.coefficients(j) = updated;
      }
    }
    const Scalar f_new = residual.squaredNorm() + lambda * result.coefficients.template lpNorm<1>();
    assert(f_new <= f + Scalar(1e-9) * (Scalar(1) + std::abs(f)));
    result.objective.push_back(f_new);
    ++result.sweeps;
    const bool converged = std::abs(f - f_new) <= tol * f;
    f = f_new;
    if (converged) break;
  }
  return result;
}

/// Coupled low/high-resolution patch dictionaries with index-aligned atoms.
///
/// Each stacked column [d_l; d_h] is scaled to unit Euclidean norm at
/// construction. Patch vectors are flattened row-major.
class DictionaryPair
{
public:
  DictionaryPair(int factor, int lr_patch_size, Eigen::MatrixXd lr_atoms, Eigen::MatrixXd hr_atoms);

  int factor() const { return factor_; }
  int lr_patch_size() const { return lr_patch_size_; }
  int hr_patch_size() const { return factor_ * lr_patch_size_; }
  int atoms() const { return static_cast<int>(lr_atoms_.cols()); }

  const Eigen::MatrixXd & lr_atoms() const { return lr_atoms_; }
  const Eigen::MatrixXd & hr_atoms() const { return hr_atoms_; }
  /// Atoms with their per-column patch mean removed.
  const Eigen::MatrixXd & lr_features() const { return lr_features_; }
  const Eigen::MatrixXd & hr_features() const { return hr_features_; }

  bool operator==(const DictionaryPair & other) const;

private:
  int factor_;
  int lr_patch_size_;
  Eigen::MatrixXd lr_atoms_;
  Eigen::MatrixXd hr_atoms_;
  Eigen::MatrixXd lr_features_;
  Eigen::MatrixXd hr_features_;
};

struct SparseCodeConfig
{
  double lambda = 0.1;
  double beta = 1.0;
  int max_iter = 200;
  double tol = 1e-5;
};

/// Values of the already reconstructed HR pixels of a candidate patch.
struct OverlapConstraint
{
  Eigen::VectorXd values;             ///< full HR patch, row-major
  Eigen::Array<bool, Eigen::Dynamic, 1> mask;  ///< true where values are known

  static OverlapConstraint none(Eigen::Index length)
  {
    return {Eigen::VectorXd::Zero(length), Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(length, false)};
  }
};

struct SparseCode
{
  Eigen::VectorXd coefficients;
  std::vector<double> objective;
  int sweeps = 0;
};

/// Training draws HR patches at factor-aligned positions; the LR atom is the
/// matching patch of the block-summed map. All-zero pairs are redrawn.
DictionaryPair train_dictionaries(
  std::span<const CountMap> hr_maps, int factor, int atoms, std::uint64_t seed, int lr_patch_size = 3);

/// Euclidean norm of the mean-removed patch, the scale codes are computed at.
double contrast(const Eigen::VectorXd & y);

/// Sparse code of LR patch y: minimizes
///   ||F D_l a - F y / s||^2 + ||beta P (F_h D_h a - (w - m) / s)||^2 + lambda ||a||_1
/// with F the patch-mean removal, s = contrast(y), P the overlap mask and m
/// the LR patch mean spread over factor^2 HR pixels. A flat patch (s = 0)
/// gets the zero code.
SparseCode sparse_code(
  const Eigen::VectorXd & y, const OverlapConstraint & overlap, const DictionaryPair & dict,
  const SparseCodeConfig & config);

/// HR patch (row-major) for a code: s F_h D_h a plus the LR mean restored at HR scale.
Eigen::VectorXd reconstruct_hr_patch(
  const Eigen::VectorXd & y, const Eigen::VectorXd & coefficients, const DictionaryPair & dict);

/// Upscales a LR count map by dict.factor(), raster order over 3x3 LR patches
/// with one pixel of overlap; overlap with already reconstructed HR pixels
/// constrains each code. Overlaps are averaged and negatives clamped to 0.
CountMap upscale_count_map(const CountMap & lr_map, const DictionaryPair & dict, const SparseCodeConfig & config);

std::vector<std::uint8_t> write_dictionary(const DictionaryPair & dict);
DictionaryPair read_dictionary(std::span<const std::uint8_t> bytes);
DictionaryPair load_dictionary(const std::filesystem::path & path);
void save_dictionary(const std::filesystem::path & path, const DictionaryPair & dict);

/// Row-major flattening of a block of a matrix.
Eigen::VectorXd flatten_patch(const Eigen::Ref<const Eigen::MatrixXd> & block);

}  // namespace evsr

#endif  // EVSR_SPARSE_SR_HPP
