#pragma once

#include "hmmfp/types.hpp"

namespace hmmfp {

/// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kPinvRelativeCutoff = 1e-10;

template <typename Scalar>
struct PseudoInverse {
  Matrix<Scalar> matrix;
  Eigen::Index rank = 0;
  bool full_rank = false;
};

/// Moore-Penrose pseudo-inverse with a relative singular-value cutoff.
template <typename Derived>
PseudoInverse<typename Derived::Scalar> pseudo_inverse(const Eigen::MatrixBase<Derived>& M,
                                                       double rel_cutoff = kPinvRelativeCutoff) {
  using Scalar = typename Derived::Scalar;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const Scalar largest = sv.size() > 0 ? sv(0) : Scalar(0);
  const Scalar cutoff = Scalar(rel_cutoff) * largest;
  Vector<Scalar> inv = Vector<Scalar>::Zero(sv.size());
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > Scalar(0)) {
      inv(i) = Scalar(1) / sv(i);
      ++rank;
    }
  }
  PseudoInverse<Scalar> out;
  out.matrix = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  out.rank = rank;
  out.full_rank = rank == std::min(M.rows(), M.cols());
  return out;
}

}  // namespace hmmfp
