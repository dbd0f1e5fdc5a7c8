#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "qjac/linalg.hpp"
#include "qjac/potential.hpp"
#include "qjac/transfer.hpp"

namespace qjac {

/// Dirichlet truncation of H to the sites -N..N: block tridiagonal with
/// identity off-diagonal blocks and V(n) on the diagonal.
template <typename Real>
class TruncatedOperator {
 public:
  using Site = std::int64_t;

  TruncatedOperator(const Potential<Real>& p, Site half_width) : p_(p), n_(half_width) {
    const Site reach = std::max(std::abs(p.k_minus()), std::abs(p.k_plus()));
    if (half_width < reach) {
      throw DomainError("truncation half-width " + std::to_string(half_width) +
                        " does not cover the support window");
    }
  }

  Site half_width() const { return n_; }
  Index channels() const { return p_.channels(); }
  Index dimension() const { return (2 * n_ + 1) * channels(); }
  const Potential<Real>& potential() const { return p_; }

  /// Row offset of block n.
  Index offset(Site n) const { return (n + n_) * channels(); }

  Eigen::SparseMatrix<Complex<Real>> sparse() const {
    const Index L = channels();
    std::vector<Eigen::Triplet<Complex<Real>>> entries;
    entries.reserve(static_cast<std::size_t>((2 * n_ + 1) * (L * L + 2 * L)));
    for (Site n = -n_; n <= n_; ++n) {
      const Matrix<Real>& v = p_.at(n);
      for (Index i = 0; i < L; ++i) {
        for (Index j = 0; j < L; ++j) {
          if (v(i, j) != Complex<Real>(0)) entries.emplace_back(offset(n) + i, offset(n) + j, v(i, j));
        }
        if (n < n_) {
          entries.emplace_back(offset(n) + i, offset(n + 1) + i, Real(1));
          entries.emplace_back(offset(n + 1) + i, offset(n) + i, Real(1));
        }
      }
    }
    Eigen::SparseMatrix<Complex<Real>> h(dimension(), dimension());
    h.setFromTriplets(entries.begin(), entries.end());
    return h;
  }

  Matrix<Real> dense() const { return Matrix<Real>(sparse()); }

  /// Number of eigenvalues strictly below x, by Sylvester inertia of the block
  /// LDL^* recursion D_n = V(n) - x - D_{n-1}^{-1}.
  Index count_below(Real x) const {
    const Index L = channels();
    Index count = 0;
    Matrix<Real> d_inv = Matrix<Real>::Zero(L, L);
    const Matrix<Real> id = Matrix<Real>::Identity(L, L);
    for (Site n = -n_; n <= n_; ++n) {
      Matrix<Real> d = p_.at(n) - x * id - d_inv;
      d = (d + d.adjoint()).eval() / Real(2);
      Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(d);
      RealVector<Real> lambda = es.eigenvalues();
      const Real scale = std::max(Real(1), lambda.cwiseAbs().maxCoeff());
      for (Index i = 0; i < L; ++i) {
        // An exactly singular pivot is nudged; this only moves x by a rounding amount.
        if (std::abs(lambda(i)) < Real(1e-300) * scale) lambda(i) = -Real(1e-300);
        if (lambda(i) < 0) ++count;
      }
      d_inv = es.eigenvectors() * lambda.cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
    }
    return count;
  }

 private:
  Potential<Real> p_;
  Site n_;
};

/// An eigenvalue cluster of the truncated operator.
template <typename Real>
struct TruncatedEigenvalue {
  Real energy;
  Index multiplicity;
  /// |E(N) - E(2N)| from the last doubling step.
  Real error_estimate;
};

/// Smallest admissible truncation: 10 (K_+ - K_-) + 50 + 2 max |K_pm|.
template <typename Real>
std::int64_t default_truncation(const Potential<Real>& p) {
  const auto reach = std::max(std::abs(p.k_minus()), std::abs(p.k_plus()));
  return 10 * p.width() + 50 + 2 * reach;
}

/// Truncation for the resolvent at z, |z| < 1: ceil(log tol / log |z|) + width + 20,
/// shifted to cover the support.
template <typename Real>
std::int64_t green_truncation(const Potential<Real>& p, Complex<Real> z, Real tol = Real(1e-14)) {
  const Real az = std::abs(z);
  if (!(az < Real(1))) throw DomainError("resolvent truncation needs |z| < 1");
  const auto reach = std::max(std::abs(p.k_minus()), std::abs(p.k_plus()));
  const auto decay = static_cast<std::int64_t>(std::ceil(std::log(tol) / std::log(az)));
  return decay + p.width() + 20 + reach;
}

namespace detail {

template <typename Real>
void bisect_clusters(const TruncatedOperator<Real>& h, Real a, Real b, Index ca, Index cb,
                     std::vector<TruncatedEigenvalue<Real>>& out) {
  if (cb == ca) return;
  const Real tol = Real(4) * std::numeric_limits<Real>::epsilon() * std::max(Real(1), std::abs(a) + std::abs(b));
  if (b - a <= tol) {
    out.push_back({(a + b) / 2, cb - ca, 0});
    return;
  }
  const Real mid = (a + b) / 2;
  if (mid <= a || mid >= b) {
    out.push_back({mid, cb - ca, 0});
    return;
  }
  const Index cm = h.count_below(mid);
  bisect_clusters(h, a, mid, ca, cm, out);
  bisect_clusters(h, mid, b, cm, cb, out);
}

}  // namespace detail

/// Eigenvalues of the truncation at fixed N inside [lo, hi], as clusters.
template <typename Real>
std::vector<TruncatedEigenvalue<Real>> truncated_eigenvalues_fixed(const TruncatedOperator<Real>& h, Real lo,
                                                                   Real hi) {
  std::vector<TruncatedEigenvalue<Real>> out;
  detail::bisect_clusters(h, lo, hi, h.count_below(lo), h.count_below(hi), out);
  return out;
}

/// Eigenvalues in [lo, hi] with the window kept clear of the band interior
/// [-2 + 1e-3, 2 - 1e-3]. N is doubled from n0 until the list is stable to
/// `tol`; the last change is reported as the error estimate.
template <typename Real>
std::vector<TruncatedEigenvalue<Real>> truncated_eigenvalues(const Potential<Real>& p, std::int64_t n0, Real lo,
                                                             Real hi, Real tol = Real(1e-12),
                                                             int max_doublings = 6) {
  if (!(lo <= hi)) throw DomainError("empty eigenvalue window");
  const Real guard = Real(2) - Real(1e-3);
  if (hi > -guard && lo < guard) {
    throw DomainError("eigenvalue window intersects the band interior [-2+1e-3, 2-1e-3]");
  }
  if (n0 < default_truncation(p)) {
    throw DomainError("truncation N=" + std::to_string(n0) + " is below the minimum " +
                      std::to_string(default_truncation(p)));
  }
  auto previous = truncated_eigenvalues_fixed(TruncatedOperator<Real>(p, n0), lo, hi);
  std::int64_t n = n0;
  for (int step = 0; step < max_doublings; ++step) {
    n *= 2;
    auto current = truncated_eigenvalues_fixed(TruncatedOperator<Real>(p, n), lo, hi);
    bool stable = current.size() == previous.size();
    for (std::size_t i = 0; stable && i < current.size(); ++i) {
      current[i].error_estimate = std::abs(current[i].energy - previous[i].energy);
      stable = current[i].multiplicity == previous[i].multiplicity && current[i].error_estimate < tol;
    }
    previous = std::move(current);
    if (stable) return previous;
  }
  throw NumericalFailure("truncated eigenvalues did not stabilize after " + std::to_string(max_doublings) +
                         " doublings");
}

/// Eigenvalues outside [-2, 2] of H: the bound-state energies, clustered.
template <typename Real>
std::vector<TruncatedEigenvalue<Real>> oracle_bound_state_energies(const Potential<Real>& p,
                                                                   Real tol = Real(1e-12)) {
  const Real bound = Real(2) + p.max_norm() + Real(1);
  const auto n0 = default_truncation(p);
  auto lower = truncated_eigenvalues(p, n0, -bound, Real(-2), tol);
  auto upper = truncated_eigenvalues(p, n0, Real(2), bound, tol);
  std::vector<TruncatedEigenvalue<Real>> out;
  for (auto& e : lower) {
    if (e.energy < Real(-2)) out.push_back(e);
  }
  for (auto& e : upper) {
    if (e.energy > Real(2)) out.push_back(e);
  }
  return out;
}

/// Resolvent of a truncation, factored once for a fixed energy.
template <typename Real>
class TruncatedResolvent {
 public:
  TruncatedResolvent(const TruncatedOperator<Real>& h, Complex<Real> energy, Real margin = Real(1e-6))
      : h_(h), energy_(energy) {
    if (std::abs(energy.imag()) < margin) {
      const Real r = std::sqrt(margin * margin - energy.imag() * energy.imag());
      if (h.count_below(energy.real() + r) != h.count_below(energy.real() - r)) {
        throw DomainError("energy lies within " + std::to_string(double(margin)) + " of the truncated spectrum");
      }
    }
    Eigen::SparseMatrix<Complex<Real>> a = h.sparse();
    Eigen::SparseMatrix<Complex<Real>> shift(a.rows(), a.cols());
    shift.setIdentity();
    a -= energy * shift;
    a.makeCompressed();
    lu_.analyzePattern(a);
    lu_.factorize(a);
    if (lu_.info() != Eigen::Success) throw NumericalFailure("sparse LU of H - E failed");
  }

  /// Block G^E(n, m) of (H_N - E)^{-1}.
  Matrix<Real> block(std::int64_t n, std::int64_t m) const {
    const Index L = h_.channels();
    if (std::abs(n) > h_.half_width() || std::abs(m) > h_.half_width()) {
      throw DomainError("Green function block outside the truncation");
    }
    Matrix<Real> rhs = Matrix<Real>::Zero(h_.dimension(), L);
    rhs.middleRows(h_.offset(m), L).setIdentity();
    const Matrix<Real> x = lu_.solve(rhs);
    return x.middleRows(h_.offset(n), L);
  }

 private:
  TruncatedOperator<Real> h_;
  Complex<Real> energy_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<Complex<Real>>> lu_;
};

/// Block (n, m) of (H_N - E)^{-1}; n, m must lie within [-N/2, N/2].
template <typename Real>
Matrix<Real> truncated_green(const Potential<Real>& p, Complex<Real> energy, std::int64_t n, std::int64_t m,
                             std::int64_t half_width) {
  if (2 * std::max(std::abs(n), std::abs(m)) > half_width) {
    throw DomainError("Green function sites must lie within [-N/2, N/2]");
  }
  return TruncatedResolvent<Real>(TruncatedOperator<Real>(p, half_width), energy).block(n, m);
}

/// Residuals of the Green-function expressions for M^z_- and N^z_-:
///   M^z_- = z^{K_+-K_-} / (z - 1/z) G(K_-,K_+)^{-1},
///   N^z_- = z^{-K_+-K_-} (G(K_+,K_+) - 1/(z - 1/z)) G(K_-,K_+)^{-1}.
template <typename Real>
struct GreenIdentityReport {
  Real m_minus_residual;
  Real n_minus_residual;
  std::int64_t half_width;
};

template <typename Real>
GreenIdentityReport<Real> green_block_identities(const Potential<Real>& p, Complex<Real> z,
                                                 std::int64_t half_width = 0) {
  const auto pt = make_spectral_point(z);
  if (!(std::abs(z) < Real(1))) throw DomainError("Green identities need |z| < 1");
  if (half_width == 0) half_width = green_truncation(p, z);
  const Index L = p.channels();
  const auto kp = p.k_plus();
  const auto km = p.k_minus();
  const TruncatedResolvent<Real> g(TruncatedOperator<Real>(p, half_width), pt.energy);
  const Matrix<Real> g_mp_inv = checked_inverse(g.block(km, kp));
  const Complex<Real> w = z - Real(1) / z;
  const Matrix<Real> m_minus = (int_pow(z, kp - km) / w) * g_mp_inv;
  const Matrix<Real> n_minus =
      int_pow(z, -kp - km) * (g.block(kp, kp) - Matrix<Real>::Identity(L, L) / w) * g_mp_inv;
  const auto b = blocks(plane_wave_transfer(p, z));
  return {max_abs(Matrix<Real>(m_minus - b.m_minus)), max_abs(Matrix<Real>(n_minus - b.n_minus)), half_width};
}

}  // namespace qjac
