#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qjac/errors.hpp"
#include "qjac/types.hpp"

namespace qjac {

/// Widest support window accepted at construction.
inline constexpr std::int64_t kMaxSupportWidth = 10000;

/// Tolerance on max |V - V^*| at ingestion.
inline constexpr double kHermiticityTolerance = 1e-12;

/// Finitely supported Hermitian matrix potential on the window {K_- + 1, ..., K_+}.
///
/// Sites of the window that were not given are zero. Matrices are stored
/// symmetrized as (V + V^*)/2 once they pass the Hermiticity check, so
/// downstream code sees exactly Hermitian data. Immutable after construction.
template <typename Real>
class Potential {
 public:
  using Site = std::int64_t;
  using Entry = std::pair<Site, Matrix<Real>>;

  Potential(Index channels, Site k_minus, Site k_plus, const std::vector<Entry>& entries,
            Real hermiticity_tol = Real(kHermiticityTolerance))
      : channels_(channels), k_minus_(k_minus), k_plus_(k_plus) {
    if (channels < 1) throw InputError("channel count L must be at least 1");
    if (k_plus < k_minus) throw InputError("k_plus must not be smaller than k_minus");
    if (k_plus - k_minus > kMaxSupportWidth) {
      throw InputError("support window wider than " + std::to_string(kMaxSupportWidth) + " sites");
    }
    zero_ = Matrix<Real>::Zero(channels, channels);
    sites_.assign(static_cast<std::size_t>(k_plus - k_minus), zero_);
    std::vector<bool> seen(sites_.size(), false);
    for (const auto& [n, v] : entries) {
      if (n <= k_minus || n > k_plus) {
        throw InputError("site " + std::to_string(n) + " lies outside the window [" +
                         std::to_string(k_minus + 1) + ", " + std::to_string(k_plus) + "]");
      }
      if (v.rows() != channels || v.cols() != channels) {
        throw InputError("matrix at site " + std::to_string(n) + " is not " +
                         std::to_string(channels) + "x" + std::to_string(channels));
      }
      const auto slot = static_cast<std::size_t>(n - k_minus - 1);
      if (seen[slot]) throw InputError("duplicate site index " + std::to_string(n));
      seen[slot] = true;
      const Real deviation = max_abs(Matrix<Real>(v - v.adjoint()));
      if (!(deviation <= hermiticity_tol)) {
        throw InputError("matrix at site " + std::to_string(n) +
                         " is not Hermitian (max deviation " + std::to_string(double(deviation)) + ")");
      }
      sites_[slot] = (v + v.adjoint()) / Real(2);
    }
  }

  /// The free operator: zero-width support.
  static Potential free(Index channels, Site k = 0) { return Potential(channels, k, k, {}); }

  Index channels() const { return channels_; }
  Site k_minus() const { return k_minus_; }
  Site k_plus() const { return k_plus_; }
  Site width() const { return k_plus_ - k_minus_; }

  /// V(n); zero outside the window.
  const Matrix<Real>& at(Site n) const {
    if (n <= k_minus_ || n > k_plus_) return zero_;
    return sites_[static_cast<std::size_t>(n - k_minus_ - 1)];
  }

  bool is_zero() const {
    for (const auto& v : sites_) {
      if (max_abs(v) != Real(0)) return false;
    }
    return true;
  }

  /// max_n ||V(n)|| in operator norm.
  Real max_norm() const {
    Real best = 0;
    for (const auto& v : sites_) {
      if (v.size() == 0) continue;
      Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(v, Eigen::EigenvaluesOnly);
      best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    return best;
  }

  /// Entries at non-zero sites, in increasing site order.
  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    for (Site n = k_minus_ + 1; n <= k_plus_; ++n) {
      if (max_abs(at(n)) != Real(0)) out.emplace_back(n, at(n));
    }
    return out;
  }

  /// The potential -V. Maps edge -1 quantities to edge +1 ones under z -> -z.
  Potential negated() const {
    auto e = entries();
    for (auto& [n, v] : e) v = -v;
    return Potential(channels_, k_minus_, k_plus_, e);
  }

  friend bool operator==(const Potential& a, const Potential& b) {
    if (a.channels_ != b.channels_ || a.k_minus_ != b.k_minus_ || a.k_plus_ != b.k_plus_) return false;
    for (std::size_t i = 0; i < a.sites_.size(); ++i) {
      if (a.sites_[i] != b.sites_[i]) return false;
    }
    return true;
  }

 private:
  Index channels_;
  Site k_minus_;
  Site k_plus_;
  std::vector<Matrix<Real>> sites_;
  Matrix<Real> zero_;
};

/// nu^z = i / (z - 1/z).
template <typename Real>
Complex<Real> nu_of(Complex<Real> z) {
  return imag_unit<Real>() / (z - Real(1) / z);
}

/// d nu^z / dz = -i (1 + z^-2) / (z - 1/z)^2.
template <typename Real>
Complex<Real> nu_derivative(Complex<Real> z) {
  const Complex<Real> d = z - Real(1) / z;
  return -imag_unit<Real>() * (Real(1) + Real(1) / (z * z)) / (d * d);
}

/// Minimum distance to +-1 for which nu^z is evaluated.
inline constexpr double kEdgeExclusion = 1e-12;

/// A spectral parameter z together with E = z + 1/z and nu^z.
template <typename Real>
struct SpectralPoint {
  Complex<Real> z;
  Complex<Real> energy;
  Complex<Real> nu;
};

template <typename Real>
SpectralPoint<Real> make_spectral_point(Complex<Real> z) {
  if (z == Complex<Real>(0)) throw DomainError("spectral parameter z must be non-zero");
  if (std::abs(z - Real(1)) <= Real(kEdgeExclusion) || std::abs(z + Real(1)) <= Real(kEdgeExclusion)) {
    throw DomainError("nu^z has a pole at the band edge z = +-1");
  }
  return {z, z + Real(1) / z, nu_of(z)};
}

/// Throws DomainError unless z avoids {-1, 0, 1}.
template <typename Real>
void require_regular_point(Complex<Real> z) {
  (void)make_spectral_point(z);
}

/// The root of E = z + 1/z on the on-shell branch: Im z > 0, or |z| < 1 for real z.
template <typename Real>
Complex<Real> z_from_energy(Complex<Real> energy) {
  const Complex<Real> disc = std::sqrt(energy * energy - Real(4));
  Complex<Real> a = (energy + disc) / Real(2);
  Complex<Real> b = (energy - disc) / Real(2);
  if (a.imag() > b.imag()) return a;
  if (b.imag() > a.imag()) return b;
  return std::abs(a) <= std::abs(b) ? a : b;
}

}  // namespace qjac
