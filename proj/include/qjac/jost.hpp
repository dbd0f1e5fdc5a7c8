#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qjac/transfer.hpp"

namespace qjac {

enum class Side { plus, minus };

/// Stacked solution frames Phi(n) = (u(n+1); u(n)) in C^{2L x L} on an index range.
///
/// Frames are materialized on the requested range only; callers ask for
/// the sites they need.
template <typename Real>
class JostFrame {
 public:
  using Site = std::int64_t;

  JostFrame(Site first, std::vector<Matrix<Real>> values, Complex<Real> z, Side side)
      : first_(first), values_(std::move(values)), z_(z), side_(side) {}

  Site first() const { return first_; }
  Site last() const { return first_ + static_cast<Site>(values_.size()) - 1; }
  Complex<Real> z() const { return z_; }
  Side side() const { return side_; }
  Index channels() const { return values_.front().cols(); }

  const Matrix<Real>& at(Site n) const {
    if (n < first() || n > last()) throw std::out_of_range("frame index outside the computed range");
    return values_[static_cast<std::size_t>(n - first_)];
  }

  /// u(n), the lower block of Phi(n).
  Matrix<Real> u(Site n) const { return at(n).bottomRows(channels()); }

 private:
  Site first_;
  std::vector<Matrix<Real>> values_;
  Complex<Real> z_;
  Side side_;
};

namespace detail {

/// Propagates a seed frame at site k over [n0, n1] with Phi(n) = T^E(n) Phi(n-1).
template <typename Real>
std::vector<Matrix<Real>> propagate_frame(const Potential<Real>& p, Complex<Real> energy,
                                          std::int64_t k, const Matrix<Real>& seed,
                                          std::int64_t n0, std::int64_t n1) {
  if (n1 < n0) throw std::invalid_argument("empty frame range");
  std::vector<Matrix<Real>> out(static_cast<std::size_t>(n1 - n0 + 1));
  auto store = [&](std::int64_t n, const Matrix<Real>& phi) {
    if (n >= n0 && n <= n1) out[static_cast<std::size_t>(n - n0)] = phi;
  };
  Matrix<Real> phi = seed;
  store(k, phi);
  for (auto n = k + 1; n <= n1; ++n) {
    phi = single_site_transfer(p.at(n), energy) * phi;
    store(n, phi);
  }
  phi = seed;
  for (auto n = k; n > n0; --n) {
    phi = single_site_transfer_inverse(p.at(n), energy) * phi;
    store(n - 1, phi);
  }
  return out;
}

}  // namespace detail

/// Phi^z_pm(n) = T^E(n, K_pm) (z; 1) z^{K_pm} for n in [n0, n1]. Entire in z != 0.
template <typename Real>
JostFrame<Real> jost_frame(const Potential<Real>& p, Complex<Real> z, Side side, std::int64_t n0,
                           std::int64_t n1) {
  if (z == Complex<Real>(0)) throw DomainError("Jost frames need z != 0");
  const Index L = p.channels();
  const std::int64_t k = side == Side::plus ? p.k_plus() : p.k_minus();
  const Complex<Real> energy = z + Real(1) / z;
  Matrix<Real> seed(2 * L, L);
  seed << z * Matrix<Real>::Identity(L, L), Matrix<Real>::Identity(L, L);
  seed *= int_pow(z, k);
  return JostFrame<Real>(n0, detail::propagate_frame(p, energy, k, seed, n0, n1), z, side);
}

/// Linearly growing band-edge solution v^{+-1}_+, seeded at K_+ with v(n) = (+-1)^n n.
template <typename Real>
JostFrame<Real> growing_solution_frame(const Potential<Real>& p, Edge edge, std::int64_t n0,
                                       std::int64_t n1) {
  const Index L = p.channels();
  const Real s = Real(edge_sign(edge));
  const auto k = p.k_plus();
  const Real sign_k = (k % 2 == 0) ? Real(1) : s;
  Matrix<Real> seed(2 * L, L);
  seed << (s * sign_k * Real(k + 1)) * Matrix<Real>::Identity(L, L),
      (sign_k * Real(k)) * Matrix<Real>::Identity(L, L);
  return JostFrame<Real>(n0, detail::propagate_frame(p, Complex<Real>(2 * s), k, seed, n0, n1),
                         Complex<Real>(s), Side::plus);
}

/// W_n(u, v) = i (u(n+1)^* v(n) - u(n)^* v(n+1)) = Phi_u(n)^* (1/i) I Phi_v(n).
template <typename Real>
Matrix<Real> wronskian(const Matrix<Real>& phi_u, const Matrix<Real>& phi_v) {
  const Index L = phi_u.cols();
  const Complex<Real> i = imag_unit<Real>();
  return i * (phi_u.topRows(L).adjoint() * phi_v.bottomRows(L) -
              phi_u.bottomRows(L).adjoint() * phi_v.topRows(L));
}

template <typename Real>
Matrix<Real> wronskian(const JostFrame<Real>& u, const JostFrame<Real>& v, std::int64_t n) {
  return wronskian(u.at(n), v.at(n));
}

/// M^z assembled from Wronskians of Jost frames at site n:
/// nu [[W(u^{1/zb}_+, u^z_-), W(u^{1/zb}_+, u^{1/z}_-)], [-W(u^{zb}_+, u^z_-), -W(u^{zb}_+, u^{1/z}_-)]].
template <typename Real>
Matrix<Real> wronskian_block_matrix(const Potential<Real>& p, Complex<Real> z, std::int64_t n) {
  const auto pt = make_spectral_point(z);
  const Index L = p.channels();
  const Complex<Real> zb = std::conj(z);
  const auto plus_inv = jost_frame(p, Real(1) / zb, Side::plus, n, n).at(n);
  const auto plus_conj = jost_frame(p, zb, Side::plus, n, n).at(n);
  const auto minus_z = jost_frame(p, z, Side::minus, n, n).at(n);
  const auto minus_inv = jost_frame(p, Real(1) / z, Side::minus, n, n).at(n);
  Matrix<Real> m(2 * L, 2 * L);
  m << wronskian(plus_inv, minus_z), wronskian(plus_inv, minus_inv), -wronskian(plus_conj, minus_z),
      -wronskian(plus_conj, minus_inv);
  return pt.nu * m;
}

/// Residual of the derivative Wronskian step
///   W_n(u^{zb}_s, d_z u^z_e) - W_{n-1}(u^{zb}_s, d_z u^z_e) + i (1 - z^-2) u^{zb}_s(n)^* u^z_e(n),
/// given frames of u^{zb}_s, u^z_e and the z-derivative frame of u^z_e, each covering n-1 and n.
template <typename Real>
Real derivative_wronskian_step(const JostFrame<Real>& u_conj, const JostFrame<Real>& u,
                               const JostFrame<Real>& du, std::int64_t n) {
  const Complex<Real> z = u.z();
  const Matrix<Real> lhs = wronskian(u_conj, du, n) - wronskian(u_conj, du, n - 1);
  const Matrix<Real> rhs = -imag_unit<Real>() * (Real(1) - Real(1) / (z * z)) * u_conj.u(n).adjoint() * u.u(n);
  return max_abs(Matrix<Real>(lhs - rhs));
}

/// z-derivative of a Jost frame by central differences, h = 1e-6 max(1, |z|).
template <typename Real>
JostFrame<Real> jost_frame_derivative(const Potential<Real>& p, Complex<Real> z, Side side,
                                      std::int64_t n0, std::int64_t n1) {
  const Real h = Real(1e-6) * std::max(Real(1), std::abs(z));
  const auto fwd = jost_frame(p, z + h, side, n0, n1);
  const auto bwd = jost_frame(p, z - h, side, n0, n1);
  std::vector<Matrix<Real>> d;
  for (auto n = n0; n <= n1; ++n) d.push_back((fwd.at(n) - bwd.at(n)) / (Real(2) * h));
  return JostFrame<Real>(n0, std::move(d), z, side);
}

}  // namespace qjac
