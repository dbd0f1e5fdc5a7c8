#pragma once

#include <cmath>

#include "qjac/linalg.hpp"
#include "qjac/potential.hpp"
#include "qjac/types.hpp"

namespace qjac {

/// Growth estimate above which a plane wave transfer matrix is flagged.
inline constexpr double kConditioningWarning = 1e12;

/// T^E(n) = [[E - V, -1], [1, 0]] in L x L blocks.
template <typename Real>
Matrix<Real> single_site_transfer(const Matrix<Real>& v, Complex<Real> energy) {
  const Index L = v.rows();
  Matrix<Real> t = Matrix<Real>::Zero(2 * L, 2 * L);
  t.topLeftCorner(L, L) = energy * Matrix<Real>::Identity(L, L) - v;
  t.topRightCorner(L, L) = -Matrix<Real>::Identity(L, L);
  t.bottomLeftCorner(L, L).setIdentity();
  return t;
}

/// T^E(n)^{-1} = [[0, 1], [-1, E - V]].
template <typename Real>
Matrix<Real> single_site_transfer_inverse(const Matrix<Real>& v, Complex<Real> energy) {
  const Index L = v.rows();
  Matrix<Real> t = Matrix<Real>::Zero(2 * L, 2 * L);
  t.topRightCorner(L, L).setIdentity();
  t.bottomLeftCorner(L, L) = -Matrix<Real>::Identity(L, L);
  t.bottomRightCorner(L, L) = energy * Matrix<Real>::Identity(L, L) - v;
  return t;
}

/// Ordered product T^E(n) ... T^E(m+1); identity for n == m, inverse product for n < m.
template <typename Real>
Matrix<Real> transfer_product(const Potential<Real>& p, Complex<Real> energy, std::int64_t n,
                              std::int64_t m) {
  const Index L = p.channels();
  Matrix<Real> t = Matrix<Real>::Identity(2 * L, 2 * L);
  if (n >= m) {
    for (auto k = m + 1; k <= n; ++k) t = single_site_transfer(p.at(k), energy) * t;
  } else {
    // T(n, m) = T(m, n)^{-1} = T(n+1)^{-1} ... T(m)^{-1}
    for (auto k = m; k > n; --k) t = single_site_transfer_inverse(p.at(k), energy) * t;
  }
  return t;
}

/// z^k for integer k, exact at z = +-1.
template <typename Real>
Complex<Real> int_pow(Complex<Real> z, std::int64_t k) {
  if (k < 0) return Real(1) / int_pow(z, -k);
  Complex<Real> result(1), base = z;
  while (k > 0) {
    if (k & 1) result *= base;
    base *= base;
    k >>= 1;
  }
  return result;
}

/// C^z = [[z, 1/z], [1, 1]].
template <typename Real>
Matrix<Real> basis_C(Complex<Real> z, Index L) {
  Matrix<Real> c(2 * L, 2 * L);
  const auto id = Matrix<Real>::Identity(L, L);
  c << z * id, (Real(1) / z) * id, id, id;
  return c;
}

/// (C^z)^{-1} = i nu^z [[-1, 1/z], [1, -z]]; needs z outside {-1, 0, 1}.
template <typename Real>
Matrix<Real> basis_C_inverse(Complex<Real> z, Index L) {
  const Complex<Real> inu = imag_unit<Real>() * nu_of(z);
  Matrix<Real> c(2 * L, 2 * L);
  const auto id = Matrix<Real>::Identity(L, L);
  c << -inu * id, inu / z * id, inu * id, -inu * z * id;
  return c;
}

/// D^z(K) = diag(z^K, z^-K).
template <typename Real>
Matrix<Real> basis_D(Complex<Real> z, std::int64_t k, Index L) {
  Matrix<Real> d = Matrix<Real>::Zero(2 * L, 2 * L);
  const Complex<Real> zk = int_pow(z, k);
  d.topLeftCorner(L, L).diagonal().setConstant(zk);
  d.bottomRightCorner(L, L).diagonal().setConstant(Real(1) / zk);
  return d;
}

/// Plane wave transfer matrix M^z(n, m) with named L x L blocks
/// [[M^{1/z}_-, N^z_-], [N^{1/z}_-, M^z_-]].
template <typename Real>
struct PlaneWaveTransfer {
  Matrix<Real> value;
  Complex<Real> z;
  std::int64_t n = 0;
  std::int64_t m = 0;
  /// prod (1 + |nu| ||V(k)|| (1 + max |z|^{+-2k})) along the product.
  Real growth_estimate = 1;

  Index channels() const { return value.rows() / 2; }
  bool ill_conditioned() const { return growth_estimate > Real(kConditioningWarning); }

  auto m_minus_dual() const { return value.topLeftCorner(channels(), channels()); }
  auto n_minus() const { return value.topRightCorner(channels(), channels()); }
  auto n_minus_dual() const { return value.bottomLeftCorner(channels(), channels()); }
  auto m_minus() const { return value.bottomRightCorner(channels(), channels()); }
};

/// The four L x L blocks of M^z, in the order (M^{1/z}_-, N^z_-, N^{1/z}_-, M^z_-).
template <typename Real>
struct TransferBlocks {
  Matrix<Real> m_minus_dual;
  Matrix<Real> n_minus;
  Matrix<Real> n_minus_dual;
  Matrix<Real> m_minus;
};

template <typename Real>
TransferBlocks<Real> blocks(const Matrix<Real>& m) {
  const Index L = m.rows() / 2;
  return {m.topLeftCorner(L, L), m.topRightCorner(L, L), m.bottomLeftCorner(L, L),
          m.bottomRightCorner(L, L)};
}

template <typename Real>
TransferBlocks<Real> blocks(const PlaneWaveTransfer<Real>& m) {
  return blocks(m.value);
}

/// Blocks of (M^z)^{-1} = [[M^z_+, N^{1/z}_+], [N^z_+, M^{1/z}_+]], from one LU inverse.
template <typename Real>
struct InverseBlocks {
  Matrix<Real> m_plus;
  Matrix<Real> n_plus_dual;
  Matrix<Real> n_plus;
  Matrix<Real> m_plus_dual;
};

/// Rows, then columns, are scaled by powers of two before the LU, so the factors
/// z^{+-2K} carried by M^z off the unit circle do not trip the pivot test.
template <typename Real>
InverseBlocks<Real> inverse_blocks(const Matrix<Real>& m) {
  using std::abs;
  const Index L = m.rows() / 2;
  auto power_of_two = [](Real x) { return x > Real(0) ? std::ldexp(Real(1), -std::ilogb(x)) : Real(1); };
  Eigen::Matrix<Real, Eigen::Dynamic, 1> row(m.rows()), col(m.cols());
  for (Index i = 0; i < m.rows(); ++i) row(i) = power_of_two(m.row(i).cwiseAbs().maxCoeff());
  const Matrix<Real> scaled_rows = row.template cast<Complex<Real>>().asDiagonal() * m;
  for (Index j = 0; j < m.cols(); ++j) col(j) = power_of_two(scaled_rows.col(j).cwiseAbs().maxCoeff());
  const Matrix<Real> inv = col.template cast<Complex<Real>>().asDiagonal() * checked_inverse(scaled_rows * col.template cast<Complex<Real>>().asDiagonal()) * row.template cast<Complex<Real>>().asDiagonal();
  return {inv.topLeftCorner(L, L), inv.topRightCorner(L, L), inv.bottomLeftCorner(L, L),
          inv.bottomRightCorner(L, L)};
}

namespace detail {

template <typename Real>
Real operator_norm(const Matrix<Real>& v) {
  if (v.size() == 0 || max_abs(v) == Real(0)) return 0;
  return singular_values(v)(0);
}

template <typename Real>
Real growth_estimate(const Potential<Real>& p, Complex<Real> z) {
  const Real nu = std::abs(nu_of(z));
  const Real logz = std::log(std::abs(z));
  Real g = 1;
  for (auto k = p.k_minus() + 1; k <= p.k_plus(); ++k) {
    const Real vn = operator_norm(p.at(k));
    if (vn == Real(0)) continue;
    g *= Real(1) + nu * vn * (Real(1) + std::exp(std::abs(Real(2 * k) * logz)));
  }
  return g;
}

}  // namespace detail

/// M^z(n) = 1 + i nu^z [[V, z^{-2n} V], [-z^{2n} V, -V]].
template <typename Real>
PlaneWaveTransfer<Real> plane_wave_factor(const Matrix<Real>& v, std::int64_t n, Complex<Real> z) {
  const auto pt = make_spectral_point(z);
  const Index L = v.rows();
  const Complex<Real> inu = imag_unit<Real>() * pt.nu;
  const Complex<Real> z2n = int_pow(z, 2 * n);
  Matrix<Real> x(2 * L, 2 * L);
  x << v, v / z2n, -z2n * v, -v;
  PlaneWaveTransfer<Real> out{Matrix<Real>::Identity(2 * L, 2 * L) + inu * x, z, n, n - 1, 1};
  const Real vn = detail::operator_norm(v);
  out.growth_estimate = Real(1) + std::abs(pt.nu) * vn * (Real(1) + std::max(std::abs(z2n), Real(1) / std::abs(z2n)));
  return out;
}

/// M^z = M^z(K_+) ... M^z(K_- + 1), largest site leftmost.
///
/// Each factor is 1 + i nu a_n V(n) b_n with a_n = (1; -z^{2n}), b_n = (1, z^{-2n}).
/// The partial products are kept as 1 + sum_m a_m W_m with
///   W_m = V(m) (i nu b_m + sum_{l<m} c_{m,l} W_l),
///   c_{m,l} = i nu b_m a_l = -z (z^-2 + ... + z^{-2(m-l)}),
/// so no product of two nu-sized terms is formed near z = +-1.
template <typename Real>
PlaneWaveTransfer<Real> plane_wave_transfer_product(const Potential<Real>& p, Complex<Real> z) {
  const auto pt = make_spectral_point(z);
  const Index L = p.channels();
  const Complex<Real> inu = imag_unit<Real>() * pt.nu;
  const Complex<Real> inv_z2 = Real(1) / (z * z);
  // R = sum_{l<m} c_{m,l} W_l, Q = sum_{l<m} W_l, B = sum_{l<m} z^{2l} W_l.
  Matrix<Real> r = Matrix<Real>::Zero(L, 2 * L);
  Matrix<Real> q = Matrix<Real>::Zero(L, 2 * L);
  Matrix<Real> bottom = Matrix<Real>::Zero(L, 2 * L);
  Matrix<Real> w(L, 2 * L);
  for (auto m = p.k_minus() + 1; m <= p.k_plus(); ++m) {
    const Complex<Real> z2m = int_pow(z, 2 * m);
    Matrix<Real> x = r;
    x.leftCols(L).diagonal().array() += inu;
    x.rightCols(L).diagonal().array() += inu / z2m;
    w.noalias() = p.at(m) * x;
    q += w;
    bottom += z2m * w;
    r = inv_z2 * (r - z * q);
  }
  Matrix<Real> m = Matrix<Real>::Identity(2 * L, 2 * L);
  m.topRows(L) += q;
  m.bottomRows(L) -= bottom;
  return {std::move(m), z, p.k_plus(), p.k_minus(), detail::growth_estimate(p, z)};
}

/// M^z = (C^z D^z(K_+))^{-1} T^E(K_+, K_-) C^z D^z(K_-).
template <typename Real>
PlaneWaveTransfer<Real> plane_wave_transfer_conjugation(const Potential<Real>& p, Complex<Real> z) {
  const auto pt = make_spectral_point(z);
  const Index L = p.channels();
  const Matrix<Real> t = transfer_product(p, pt.energy, p.k_plus(), p.k_minus());
  const Matrix<Real> left = basis_D(z, -p.k_plus(), L) * basis_C_inverse(z, L);
  const Matrix<Real> right = basis_C(z, L) * basis_D(z, p.k_minus(), L);
  return {left * t * right, z, p.k_plus(), p.k_minus(), detail::growth_estimate(p, z)};
}

/// Default evaluation path: the ordered product on the unit circle, conjugation elsewhere.
template <typename Real>
PlaneWaveTransfer<Real> plane_wave_transfer(const Potential<Real>& p, Complex<Real> z) {
  if (std::abs(std::abs(z) - Real(1)) <= Real(1e-8)) return plane_wave_transfer_product(p, z);
  return plane_wave_transfer_conjugation(p, z);
}

/// M^z together with its z-derivative, from the product rule over the factors.
template <typename Real>
struct PlaneWaveJet {
  Matrix<Real> value;
  Matrix<Real> derivative;
};

template <typename Real>
PlaneWaveJet<Real> plane_wave_transfer_jet(const Potential<Real>& p, Complex<Real> z) {
  const auto pt = make_spectral_point(z);
  const Index L = p.channels();
  const Complex<Real> i = imag_unit<Real>();
  const Complex<Real> dnu = nu_derivative(z);
  Matrix<Real> m = Matrix<Real>::Identity(2 * L, 2 * L);
  Matrix<Real> dm = Matrix<Real>::Zero(2 * L, 2 * L);
  for (auto k = p.k_minus() + 1; k <= p.k_plus(); ++k) {
    const Matrix<Real>& v = p.at(k);
    if (max_abs(v) == Real(0)) continue;
    const Complex<Real> z2k = int_pow(z, 2 * k);
    const Complex<Real> dz2k = Real(2 * k) * int_pow(z, 2 * k - 1);
    Matrix<Real> x(2 * L, 2 * L), dx(2 * L, 2 * L);
    x << v, v / z2k, -z2k * v, -v;
    // d/dz z^{-2k} = -2k z^{-2k-1} = -dz2k / z2k^2
    dx << Matrix<Real>::Zero(L, L), (-dz2k / (z2k * z2k)) * v, -dz2k * v, Matrix<Real>::Zero(L, L);
    const Matrix<Real> factor = Matrix<Real>::Identity(2 * L, 2 * L) + i * pt.nu * x;
    const Matrix<Real> dfactor = i * dnu * x + i * pt.nu * dx;
    dm = (dfactor * m + factor * dm).eval();
    m = (factor * m).eval();
  }
  return {std::move(m), std::move(dm)};
}

/// d/dz log det M^z_- = Tr((M^z_-)^{-1} dM^z_-/dz).
template <typename Real>
Complex<Real> log_det_m_minus_derivative(const Potential<Real>& p, Complex<Real> z) {
  const Index L = p.channels();
  const auto jet = plane_wave_transfer_jet(p, z);
  const Matrix<Real> mm = jet.value.bottomRightCorner(L, L);
  const Matrix<Real> dmm = jet.derivative.bottomRightCorner(L, L);
  return checked_solve(mm, dmm).trace();
}

}  // namespace qjac
