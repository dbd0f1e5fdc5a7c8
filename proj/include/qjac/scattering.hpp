#pragma once

#include <cmath>
#include <complex>
#include <sstream>

#include "qjac/transfer.hpp"

namespace qjac {

/// Relative smallest-singular-value threshold for membership in C0.
inline constexpr double kC0Tolerance = 1e-12;

/// S^z = [[T^z_+, R^z_-], [R^z_+, T^z_-]].
template <typename Real>
struct ScatteringMatrix {
  Matrix<Real> value;
  Complex<Real> z;
  /// min over M^z_+ and M^z_- of sigma_min / sigma_max.
  Real c0_margin = 1;

  Index channels() const { return value.rows() / 2; }
  auto t_plus() const { return value.topLeftCorner(channels(), channels()); }
  auto r_minus() const { return value.topRightCorner(channels(), channels()); }
  auto r_plus() const { return value.bottomLeftCorner(channels(), channels()); }
  auto t_minus() const { return value.bottomRightCorner(channels(), channels()); }
};

/// max |S^* S - 1|.
template <typename Real>
Real unitarity_defect(const Matrix<Real>& s) {
  return max_abs(Matrix<Real>(s.adjoint() * s - Matrix<Real>::Identity(s.rows(), s.cols())));
}

namespace detail {

template <typename Real>
std::string format_z(Complex<Real> z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
  return os.str();
}

}  // namespace detail

/// S^z from the blocks of M^z and of (M^z)^{-1}:
/// [[(M_+)^{-1}, -N_- (M_-)^{-1}], [-N_+ (M_+)^{-1}, (M_-)^{-1}]].
template <typename Real>
ScatteringMatrix<Real> scattering_from_transfer(const Matrix<Real>& m, Complex<Real> z,
                                                Real c0_tol = Real(kC0Tolerance)) {
  const Index L = m.rows() / 2;
  const auto b = blocks(m);
  InverseBlocks<Real> ib;
  try {
    ib = inverse_blocks(m);
  } catch (const SingularMatrix&) {
    throw NotInC0(std::complex<double>(z), 0.0, "M^z is singular at z = " + detail::format_z(z));
  }
  const Real margin = std::min(relative_smallest_singular_value(b.m_minus),
                               relative_smallest_singular_value(ib.m_plus));
  if (!(margin > c0_tol)) {
    throw NotInC0(std::complex<double>(z), double(margin),
                  "z = " + detail::format_z(z) + " is not in C0 (relative smallest singular value " +
                      std::to_string(double(margin)) + ")");
  }
  const Matrix<Real> m_minus_inv = checked_inverse(b.m_minus, 0.0);
  const Matrix<Real> m_plus_inv = checked_inverse(ib.m_plus, 0.0);
  ScatteringMatrix<Real> s{Matrix<Real>(2 * L, 2 * L), z, margin};
  s.value << m_plus_inv, -b.n_minus * m_minus_inv, -ib.n_plus * m_plus_inv, m_minus_inv;
  return s;
}

/// The scattering matrix at z in C0; throws NotInC0 near bound-state parameters.
template <typename Real>
ScatteringMatrix<Real> scattering_matrix(const Potential<Real>& p, Complex<Real> z,
                                         Real c0_tol = Real(kC0Tolerance)) {
  require_regular_point(z);
  return scattering_from_transfer(plane_wave_transfer(p, z).value, z, c0_tol);
}

/// Reduced form using only blocks of M^z and M^{zb}:
/// [[((M^{zb}_-)^*)^{-1}, -N^z_- (M^z_-)^{-1}], [(M^z_-)^{-1} N^{1/z}_-, (M^z_-)^{-1}]].
template <typename Real>
Matrix<Real> scattering_matrix_reduced(const Potential<Real>& p, Complex<Real> z) {
  const Index L = p.channels();
  const auto b = blocks(plane_wave_transfer(p, z));
  const auto bc = blocks(plane_wave_transfer(p, std::conj(z)));
  const Matrix<Real> t = checked_inverse(b.m_minus);
  Matrix<Real> s(2 * L, 2 * L);
  s << checked_inverse(Matrix<Real>(bc.m_minus.adjoint())), -b.n_minus * t, t * b.n_minus_dual, t;
  return s;
}

/// V(M) = [[(A^*)^{-1}, -B D^{-1}], [D^{-1} C, D^{-1}]] for a J-unitary M = [[A, B], [C, D]].
template <typename Real>
Matrix<Real> v_of_m(const Matrix<Real>& m, Real j_tol = Real(1e-10)) {
  const Index L = m.rows() / 2;
  const Matrix<Real> j = pauli_J<Real>(L);
  const Real defect = max_abs(Matrix<Real>(m.adjoint() * j * m - j));
  const Real scale = std::max(Real(1), max_abs(m) * max_abs(m));
  if (!(defect <= j_tol * scale)) {
    throw DomainError("v_of_m: input is not J-unitary (defect " + std::to_string(double(defect)) + ")");
  }
  const auto b = blocks(m);
  Matrix<Real> a_adj_inv, d_inv;
  try {
    a_adj_inv = checked_inverse(Matrix<Real>(b.m_minus_dual.adjoint()));
    d_inv = checked_inverse(b.m_minus);
  } catch (const SingularMatrix&) {
    throw NumericalFailure("v_of_m: singular diagonal block of a J-unitary matrix");
  }
  Matrix<Real> v(2 * L, 2 * L);
  v << a_adj_inv, -b.n_minus * d_inv, d_inv * b.n_minus_dual, d_inv;
  return v;
}

/// S^z from Green function blocks, valid for |z| < 1 with E off the spectrum:
/// (z - 1/z) z^{K_- - K_+} [[G(K_+,K_-), -z^{-K_+-K_-}(G(K_+,K_+) + i nu)],
///                           [-z^{K_++K_-}(G(K_-,K_-) + i nu), G(K_-,K_+)]].
/// The upper-right entry is R_- = -N_- (M_-)^{-1} = z^{-2K_+}(1 - (z - 1/z) G(K_+,K_+)).
/// `green(n, m)` returns the L x L block G^E(n, m).
template <typename Real, typename GreenFn>
ScatteringMatrix<Real> scattering_from_green(const Potential<Real>& p, Complex<Real> z, GreenFn&& green) {
  if (!(std::abs(z) < Real(1))) throw DomainError("Green-function assembly needs |z| < 1");
  const auto pt = make_spectral_point(z);
  const Index L = p.channels();
  const auto kp = p.k_plus();
  const auto km = p.k_minus();
  const Matrix<Real> id = Matrix<Real>::Identity(L, L);
  const Complex<Real> inu = imag_unit<Real>() * pt.nu;
  const Complex<Real> pref = (z - Real(1) / z) * int_pow(z, km - kp);
  ScatteringMatrix<Real> s{Matrix<Real>(2 * L, 2 * L), z, 1};
  const Matrix<Real> g_pm = green(kp, km);
  const Matrix<Real> g_mp = green(km, kp);
  const Matrix<Real> g_pp = green(kp, kp);
  const Matrix<Real> g_mm = green(km, km);
  s.value << pref * g_pm, -pref * int_pow(z, -kp - km) * (g_pp + inu * id),
      -pref * int_pow(z, kp + km) * (g_mm + inu * id), pref * g_mp;
  return s;
}

}  // namespace qjac
