#pragma once

#include <memory>
#include <vector>

#include "qjac/contour.hpp"
#include "qjac/potential.hpp"
#include "qjac/scattering.hpp"
#include "qjac/spectral.hpp"

namespace qjac {

/// Tr((S^{1/zb})^* d/dz S^z), by two routes.
struct TimeDelay {
  /// d/dz log det M^{1/z}_- - d/dz log det M^z_-, with analytic derivatives.
  Complexd determinant_form;
  /// Central difference of S along the tangent of |zeta| = |z|, step 1e-6.
  Complexd difference_form;

  /// On the unit circle: -i Tr(S^* d/dk S) with z = e^{ik}, which is real.
  double k_form(Complexd z) const { return (z * determinant_form).real(); }
};

TimeDelay time_delay(const Potential<double>& p, Complexd z, double step = 1e-6);

/// d/dz log det M^{1/z}_- - d/dz log det M^z_- only.
Complexd time_delay_determinant(const Potential<double>& p, Complexd z);

/// Tr(V(M)^* dV(M)) and Tr(A^{-1} dA - D^{-1} dD) for a path of J-unitaries M(t) at t,
/// the derivative taken by central differences with step h.
struct TraceIdentity {
  Complexd lhs;
  Complexd rhs;
};

template <typename Path>
TraceIdentity trace_identity(Path&& path, double t, double h = 1e-6);

enum class Arc { upper, lower };

struct BandIntegral {
  /// (1/2 pi i) int_{-2}^{2} dE Tr(S^E* d/dE S^E) on the chosen arc.
  Complexd value;
  int nodes = 0;
  bool converged = false;
};

struct BandIntegralOptions {
  double tol = 1e-10;
  Arc arc = Arc::upper;
  /// Radius of the circles around z = +-1 used for nodes within half of it;
  /// 0 derives it from the bound states.
  double edge_radius = 0;
  int edge_points = 128;
};

/// min(0.2, (1 - max |z_b|) / 2): keeps the poles of the time delay off the edge circles.
double edge_interpolation_radius(const std::vector<BoundState>& states);

/// z tau(z) on the unit circle, with tau the determinant form of the time delay.
/// Within half of the edge radius of z = +-1 the value comes from a Cauchy-integral
/// interpolant on a circle around the edge, since the pointwise formula cancels
/// two terms of size 1/|z -+ 1| there.
class ArcTimeDelay {
 public:
  /// edge_radius = 0 derives it from the bound states.
  explicit ArcTimeDelay(const Potential<double>& p, double edge_radius = 0, int edge_points = 128);
  ~ArcTimeDelay();
  ArcTimeDelay(ArcTimeDelay&&) noexcept;
  ArcTimeDelay& operator=(ArcTimeDelay&&) noexcept;

  Complexd operator()(Complexd z) const;
  /// -i Tr(S^* d/dk S) at z = e^{ik}, which is real.
  double k_form(double k) const { return (*this)(std::polar(1.0, k)).real(); }
  double edge_radius(Edge edge) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Gauss-Legendre in k with node doubling from 16 up to 2^14 until |dI| < tol.
/// Arc::upper uses z = e^{ik}, k in (0, pi) (the on-shell branch). Arc::lower
/// integrates z = e^{-ik} and reports the lower arc's share of the counterclockwise
/// circle, which equals the upper value. Throws NumericalFailure when the doubling
/// does not converge.
BandIntegral band_integral(const Potential<double>& p, const BandIntegralOptions& opts = {});

struct AnnularWinding {
  WindingResult inner;
  WindingResult outer;
  double eps = 0;

  /// -(inner + outer), which equals 2L - J_h - 2 J_b.
  double negated_sum() const { return -(inner.value.real() + outer.value.real()); }
  double defect() const { return std::max(inner.defect(), outer.defect()); }
};

/// min(0.05, (1 - max |z_b|) / 2).
double default_annulus_eps(const std::vector<BoundState>& states);

/// Windings of det M^z_- on |z| = 1 - eps and |z| = 1 + eps (counterclockwise).
AnnularWinding annular_winding(const Potential<double>& p, double eps);

/// annular_winding with eps halved until inner - outer equals the pole orders of
/// det M^z_- at z = +-1 measured on small local circles, so that no resonance
/// zero lies in 1 < |z| < 1 + eps. Throws NumericalFailure after max_halvings.
AnnularWinding annular_winding_clear(const Potential<double>& p, double eps,
                                     const std::vector<BoundState>& bound_states, int max_halvings = 10);

struct LevinsonReport {
  int L = 0;
  int Jb = 0;
  int Jh_plus = 0;
  int Jh_minus = 0;
  std::vector<BoundState> bound_states;
  BandIntegral band;
  AnnularWinding winding;
  /// Jb + (Jh_plus + Jh_minus) / 2 - L - Re bandIntegral.
  double residual = 0;
  double tol = 0;

  bool passed() const;
};

LevinsonReport levinson_report(const Potential<double>& p, double tol = 1e-6);

template <typename Path>
TraceIdentity trace_identity(Path&& path, double t, double h) {
  const Matrixd m = path(t);
  const Matrixd dm = (path(t + h) - path(t - h)) / (2 * h);
  const Index L = m.rows() / 2;
  const Matrixd v = v_of_m(m);
  const Matrixd dv = (v_of_m(Matrixd(path(t + h))) - v_of_m(Matrixd(path(t - h)))) / (2 * h);
  const Complexd lhs = (v.adjoint() * dv).trace();
  const Complexd rhs = (m.topLeftCorner(L, L).inverse() * dm.topLeftCorner(L, L)).trace() -
                       (m.bottomRightCorner(L, L).inverse() * dm.bottomRightCorner(L, L)).trace();
  return {lhs, rhs};
}

}  // namespace qjac
