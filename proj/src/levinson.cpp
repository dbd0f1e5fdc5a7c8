#include "qjac/levinson.hpp"

#include <cmath>
#include <numbers>

#include "qjac/scattering.hpp"
#include "qjac/transfer.hpp"

namespace qjac {

Complexd time_delay_determinant(const Potential<double>& p, Complexd z) {
  const Complexd w = 1.0 / z;
  return -log_det_m_minus_derivative(p, w) / (z * z) - log_det_m_minus_derivative(p, z);
}

TimeDelay time_delay(const Potential<double>& p, Complexd z, double step) {
  TimeDelay td;
  td.determinant_form = time_delay_determinant(p, z);
  const Complexd tangent = Complexd(0, 1) * z / std::abs(z);
  const Complexd h = step * tangent;
  const Matrixd ds = (scattering_matrix(p, z + h).value - scattering_matrix(p, z - h).value) / (2.0 * h);
  const Matrixd s_dual = scattering_matrix(p, 1.0 / std::conj(z)).value;
  td.difference_form = (s_dual.adjoint() * ds).trace();
  return td;
}

namespace {

/// zeta tau(zeta) near a band edge by the Cauchy integral formula over a circle
/// around the edge. The function is analytic at the edge, while its pointwise
/// evaluation close to it cancels two large terms. tau has poles at zeros of
/// det M^zeta_- and det M^{1/zeta}_- (bound states, resonances); the circle is
/// shrunk until the argument principle shows that it encloses none of them and
/// the rule on every other node agrees with the full rule where it is used.
class EdgeInterpolant {
 public:
  EdgeInterpolant(const Potential<double>& p, Edge edge, double radius, int points, double min_radius = 1e-3)
      : center_(edge_sign(edge)) {
    const Index rank = decide_rank<double>(singular_values(band_edge_F(p, edge)), 1e-10).rank;
    const double pole_order = double(rank);
    for (radius_ = radius; radius_ >= min_radius; radius_ /= 2) {
      zeta_.assign(static_cast<std::size_t>(points), Complexd(0));
      for (int j = 0; j < points; ++j) {
        zeta_[static_cast<std::size_t>(j)] =
            center_ + radius_ * std::polar(1.0, 2 * std::numbers::pi * (j + 0.5) / points);
      }
      // a = d/dz log det M^{1/z}_-, b = d/dz log det M^z_-.
      const auto ab = parallel_map<std::pair<Complexd, Complexd>>(zeta_.size(), [&](std::size_t j) {
        const Complexd z = zeta_[j];
        return std::make_pair(-log_det_m_minus_derivative(p, 1.0 / z) / (z * z), log_det_m_minus_derivative(p, z));
      });
      std::vector<Complexd> wa(zeta_.size()), wb(zeta_.size());
      values_.resize(zeta_.size());
      for (std::size_t j = 0; j < zeta_.size(); ++j) {
        wa[j] = ab[j].first * (zeta_[j] - center_);
        wb[j] = ab[j].second * (zeta_[j] - center_);
        values_[j] = zeta_[j] * (ab[j].first - ab[j].second);
      }
      const Complexd winding_a = pairwise_sum(wa) / double(points);
      const Complexd winding_b = pairwise_sum(wb) / double(points);
      if (std::abs(winding_a + pole_order) >= 1e-3 || std::abs(winding_b + pole_order) >= 1e-3) continue;
      if (self_consistent()) return;
    }
    throw NumericalFailure("time delay has a pole within " + std::to_string(min_radius) + " of the band edge");
  }

  bool covers(Complexd z) const { return std::abs(z - center_) < radius_ / 2; }
  double radius() const { return radius_; }

  Complexd operator()(Complexd z) const { return evaluate(z, 1); }

 private:
  Complexd evaluate(Complexd z, std::size_t stride) const {
    std::vector<Complexd> terms;
    terms.reserve(zeta_.size() / stride);
    for (std::size_t j = 0; j < zeta_.size(); j += stride) {
      terms.push_back(values_[j] * (zeta_[j] - center_) / (zeta_[j] - z));
    }
    return pairwise_sum(terms) / double(terms.size());
  }

  /// Compares both rules on the unit circle at distance radius/2 from the edge.
  bool self_consistent() const {
    const double theta = 2 * std::asin(radius_ / 4);
    for (double s : {1.0, -1.0}) {
      const Complexd z = center_ * std::polar(1.0, s * theta);
      const Complexd full = evaluate(z, 1);
      if (std::abs(full - evaluate(z, 2)) > 1e-9 * std::max(1.0, std::abs(full))) return false;
    }
    return true;
  }

 private:
  Complexd center_;
  double radius_ = 0;
  std::vector<Complexd> zeta_;
  std::vector<Complexd> values_;
};

/// Gauss-Legendre estimate of (1/2 pi i) int_{-2}^{2} dE Tr(S^* dS/dE) with n nodes.
/// With z = e^{i sigma k}, E = 2 cos k decreases along k in (0, pi), so
/// int_{-2}^{2} dE (...) = -int_0^pi dk Tr(S^* dS/dk), and dS/dk = i sigma z dS/dz.
Complexd band_estimate(int n, double sigma, const ArcTimeDelay& g) {
  const auto& rule = gauss_legendre(n);
  const auto terms = parallel_map<Complexd>(static_cast<std::size_t>(n), [&](std::size_t j) {
    const double k = std::numbers::pi / 2 * (rule.nodes[j] + 1);
    return rule.weights[j] * Complexd(0, sigma) * g(std::polar(1.0, sigma * k));
  });
  const Complexd integral_k = std::numbers::pi / 2 * pairwise_sum(terms);
  return -integral_k / Complexd(0, 2 * std::numbers::pi);
}

}  // namespace

double edge_interpolation_radius(const std::vector<BoundState>& states) {
  double r = 0.2;
  for (const auto& b : states) r = std::min(r, (1 - std::abs(b.z)) / 2);
  return r;
}

struct ArcTimeDelay::Impl {
  Potential<double> p;
  EdgeInterpolant upper;
  EdgeInterpolant lower;
};

ArcTimeDelay::ArcTimeDelay(const Potential<double>& p, double edge_radius, int edge_points) {
  const double radius = edge_radius > 0 ? edge_radius : edge_interpolation_radius(find_bound_states(p));
  impl_ = std::make_unique<Impl>(Impl{p, EdgeInterpolant(p, Edge::upper, radius, edge_points),
                                      EdgeInterpolant(p, Edge::lower, radius, edge_points)});
}

ArcTimeDelay::~ArcTimeDelay() = default;
ArcTimeDelay::ArcTimeDelay(ArcTimeDelay&&) noexcept = default;
ArcTimeDelay& ArcTimeDelay::operator=(ArcTimeDelay&&) noexcept = default;

Complexd ArcTimeDelay::operator()(Complexd z) const {
  if (impl_->upper.covers(z)) return impl_->upper(z);
  if (impl_->lower.covers(z)) return impl_->lower(z);
  return z * time_delay_determinant(impl_->p, z);
}

double ArcTimeDelay::edge_radius(Edge edge) const {
  return edge == Edge::upper ? impl_->upper.radius() : impl_->lower.radius();
}

BandIntegral band_integral(const Potential<double>& p, const BandIntegralOptions& opts) {
  if (p.is_zero()) return {Complexd(0), 0, true};
  const double sigma = opts.arc == Arc::upper ? 1.0 : -1.0;
  const ArcTimeDelay g(p, opts.edge_radius, opts.edge_points);
  // The lower arc is reported as its contribution to the counterclockwise circle.
  const double orientation = opts.arc == Arc::upper ? 1.0 : -1.0;
  int n = 16;
  Complexd previous = band_estimate(n, sigma, g);
  for (n = 32; n <= (1 << 14); n *= 2) {
    const Complexd current = band_estimate(n, sigma, g);
    const double change = std::abs(current - previous);
    previous = current;
    if (change < opts.tol) return {orientation * current, n, true};
  }
  throw NumericalFailure("band integral did not converge with 2^14 Gauss-Legendre nodes");
}

double default_annulus_eps(const std::vector<BoundState>& states) {
  double z_max = 0;
  for (const auto& b : states) z_max = std::max(z_max, std::abs(b.z));
  return std::min(0.05, (1 - z_max) / 2);
}

AnnularWinding annular_winding(const Potential<double>& p, double eps) {
  if (!(eps > 0 && eps < 1)) throw DomainError("annulus half-width must lie in (0, 1)");
  auto f = [&p](Complexd zeta) { return log_det_m_minus_derivative(p, zeta); };
  AnnularWinding a;
  a.eps = eps;
  a.inner = circle_winding(f, Complexd(0), 1 - eps, 1e-9, 64, 1 << 16);
  a.outer = circle_winding(f, Complexd(0), 1 + eps, 1e-9, 64, 1 << 16);
  if (a.defect() >= 1e-3) {
    throw NumericalFailure("annular winding is not integral (defect " + std::to_string(a.defect()) +
                           "); a zero of det M^z_- may lie in the annulus");
  }
  return a;
}

AnnularWinding annular_winding_clear(const Potential<double>& p, double eps,
                                     const std::vector<BoundState>& bound_states, int max_halvings) {
  long edge_poles = 0;
  for (Edge edge : {Edge::upper, Edge::lower}) edge_poles += det_pole_order_check(p, edge, bound_states).order;
  AnnularWinding current = annular_winding(p, eps);
  for (int i = 0; i < max_halvings; ++i) {
    if (current.inner.rounded() - current.outer.rounded() == edge_poles) return current;
    current = annular_winding(p, current.eps / 2);
  }
  if (current.inner.rounded() - current.outer.rounded() == edge_poles) return current;
  throw NumericalFailure("zeros of det M^z_- remain in the annulus down to eps = " + std::to_string(current.eps));
}

bool LevinsonReport::passed() const {
  const long expected = 2L * L - (Jh_plus + Jh_minus) - 2L * Jb;
  return std::abs(residual) < tol && std::abs(band.value.imag()) <= 1e-9 &&
         std::lround(winding.negated_sum()) == expected && winding.defect() < 1e-3;
}

LevinsonReport levinson_report(const Potential<double>& p, double tol) {
  LevinsonReport r;
  r.tol = tol;
  r.L = int(p.channels());
  r.bound_states = find_bound_states(p);
  r.Jb = total_multiplicity(r.bound_states);
  r.Jh_plus = band_edge_limit_S(p, Edge::upper).Jh;
  r.Jh_minus = band_edge_limit_S(p, Edge::lower).Jh;
  BandIntegralOptions bopts;
  bopts.tol = std::min(1e-10, tol / 100);
  bopts.edge_radius = edge_interpolation_radius(r.bound_states);
  r.band = band_integral(p, bopts);
  r.winding = annular_winding_clear(p, default_annulus_eps(r.bound_states), r.bound_states);
  r.residual = r.Jb + 0.5 * (r.Jh_plus + r.Jh_minus) - r.L - r.band.value.real();
  return r;
}

}  // namespace qjac
