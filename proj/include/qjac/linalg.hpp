#pragma once

#include <algorithm>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "qjac/errors.hpp"
#include "qjac/types.hpp"

namespace qjac {

/// Relative pivot threshold used by every inversion in the library.
inline constexpr double kPivotTolerance = 1e-13;

/// Ratio of smallest to largest |U_ii| of a full-pivot LU; 0 for a zero matrix.
template <typename Derived>
typename Derived::RealScalar pivot_ratio(const Eigen::MatrixBase<Derived>& a) {
  using Real = typename Derived::RealScalar;
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::FullPivLU<Mat> lu(a.eval());
  const auto diag = lu.matrixLU().diagonal().cwiseAbs();
  const Real big = diag.maxCoeff();
  if (big == Real(0)) return Real(0);
  return diag.minCoeff() / big;
}

/// Inverse by full-pivot LU; throws SingularMatrix below the pivot threshold.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> checked_inverse(
    const Eigen::MatrixBase<Derived>& a, double pivot_tol = kPivotTolerance) {
  using Real = typename Derived::RealScalar;
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::FullPivLU<Mat> lu(a.eval());
  const auto diag = lu.matrixLU().diagonal().cwiseAbs();
  const Real big = diag.size() ? diag.maxCoeff() : Real(0);
  if (big == Real(0) || diag.minCoeff() < Real(pivot_tol) * big) {
    throw SingularMatrix("matrix is singular to working precision (pivot ratio " +
                         std::to_string(big == Real(0) ? 0.0 : double(diag.minCoeff() / big)) + ")");
  }
  return lu.inverse();
}

/// Solves a x = b with full-pivot LU under the same singularity policy.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> checked_solve(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
    double pivot_tol = kPivotTolerance) {
  using Real = typename DerivedA::RealScalar;
  using Mat = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::FullPivLU<Mat> lu(a.eval());
  const auto diag = lu.matrixLU().diagonal().cwiseAbs();
  const Real big = diag.size() ? diag.maxCoeff() : Real(0);
  if (big == Real(0) || diag.minCoeff() < Real(pivot_tol) * big) {
    throw SingularMatrix("linear system is singular to working precision");
  }
  return lu.solve(b.eval());
}

/// Singular values in descending order.
template <typename Derived>
Eigen::Matrix<typename Derived::RealScalar, Eigen::Dynamic, 1> singular_values(
    const Eigen::MatrixBase<Derived>& a) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::JacobiSVD<Mat> svd(a.eval());
  return svd.singularValues();
}

/// sigma_min / sigma_max, with 0 for the zero matrix.
template <typename Derived>
typename Derived::RealScalar relative_smallest_singular_value(const Eigen::MatrixBase<Derived>& a) {
  const auto s = singular_values(a);
  if (s.size() == 0 || s(0) == 0) return 0;
  return s(s.size() - 1) / s(0);
}

/// Rank decision for sigma_i < rel_tol * sigma_max.
struct RankDecision {
  Index rank = 0;
  /// Rank obtained if the nearest singular value fell on the other side of the threshold.
  Index alternative_rank = 0;
  /// Some singular value lies within a factor 10 of the threshold.
  bool ambiguous = false;
};

template <typename Scalar>
RankDecision decide_rank(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& sv, Scalar rel_tol) {
  RankDecision d;
  if (sv.size() == 0 || sv(0) == Scalar(0)) return d;
  const Scalar threshold = rel_tol * sv(0);
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) >= threshold) ++d.rank;
  }
  d.alternative_rank = d.rank;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold / 10 && sv(i) < threshold * 10) {
      d.ambiguous = true;
      d.alternative_rank = sv(i) >= threshold ? d.rank - 1 : d.rank + 1;
    }
  }
  return d;
}

/// Orthonormal basis of the numerical kernel (columns).
template <typename Real>
Matrix<Real> kernel_basis(const Matrix<Real>& a, Real rel_tol) {
  Eigen::JacobiSVD<Matrix<Real>> svd(a, Eigen::ComputeFullV);
  const auto rank = decide_rank<Real>(svd.singularValues(), rel_tol).rank;
  return svd.matrixV().rightCols(a.cols() - rank);
}

}  // namespace qjac
