#pragma once

#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qjac {

using Index = Eigen::Index;

template <typename Real>
using Complex = std::complex<Real>;

/// Dense complex matrix; L and 2L are runtime sizes.
template <typename Real>
using Matrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using Vector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Matrixd = Matrix<double>;
using Vectord = Vector<double>;
using Complexd = Complex<double>;

/// Sign of a band edge: +1 for E = 2 (z = 1), -1 for E = -2 (z = -1).
enum class Edge : int { lower = -1, upper = 1 };

inline int edge_sign(Edge e) { return static_cast<int>(e); }

template <typename Real>
constexpr Complex<Real> imag_unit() {
  return Complex<Real>(Real(0), Real(1));
}

/// Largest entry modulus; zero for an empty matrix.
template <typename Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return typename Derived::RealScalar(0);
  return m.cwiseAbs().maxCoeff();
}

/// Block Pauli matrix K = [[0, 1], [1, 0]].
template <typename Real>
Matrix<Real> pauli_K(Index L) {
  Matrix<Real> k = Matrix<Real>::Zero(2 * L, 2 * L);
  k.topRightCorner(L, L).setIdentity();
  k.bottomLeftCorner(L, L).setIdentity();
  return k;
}

/// Block Pauli matrix I = [[0, -1], [1, 0]].
template <typename Real>
Matrix<Real> pauli_I(Index L) {
  Matrix<Real> i = Matrix<Real>::Zero(2 * L, 2 * L);
  i.topRightCorner(L, L) = -Matrix<Real>::Identity(L, L);
  i.bottomLeftCorner(L, L).setIdentity();
  return i;
}

/// Block Pauli matrix J = diag(1, -1).
template <typename Real>
Matrix<Real> pauli_J(Index L) {
  Matrix<Real> j = Matrix<Real>::Identity(2 * L, 2 * L);
  j.bottomRightCorner(L, L) *= Real(-1);
  return j;
}

/// Pairwise (cascade) summation; an empty range gives T{}. Result is independent of how the
/// terms were produced, which keeps parallel evaluations reproducible.
template <typename T>
T pairwise_sum(std::span<const T> terms) {
  if (terms.empty()) return T{};
  if (terms.size() <= 8) {
    T acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) acc += terms[i];
    return acc;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

template <typename T>
T pairwise_sum(const std::vector<T>& terms) {
  return pairwise_sum(std::span<const T>(terms.data(), terms.size()));
}

}  // namespace qjac
