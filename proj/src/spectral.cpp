#include "qjac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "qjac/jost.hpp"
#include "qjac/scattering.hpp"
#include "qjac/transfer.hpp"

namespace qjac {

namespace {

double abs_det_m_minus(const Potential<double>& p, double z) {
  const Index L = p.channels();
  const Matrixd m = plane_wave_transfer(p, Complexd(z)).value.bottomRightCorner(L, L);
  return std::abs(m.determinant());
}

/// k-th smallest singular value of M^z_- (k >= 1).
double kth_smallest_sv(const Potential<double>& p, double z, int k) {
  const Index L = p.channels();
  const Matrixd m = plane_wave_transfer(p, Complexd(z)).value.bottomRightCorner(L, L);
  const auto sv = singular_values(m);
  return sv(L - k);
}

template <typename Fn>
double golden_section(Fn&& f, double a, double b, double tol = 1e-15) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > tol * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

auto log_det_derivative(const Potential<double>& p) {
  return [&p](Complexd zeta) { return log_det_m_minus_derivative(p, zeta); };
}

std::vector<double> side_grid(double z_lb, double delta, int points) {
  // Logarithmic in s = -log|z|, so the collar near the edge is resolved.
  const double s_min = -std::log1p(-delta);
  const double s_max = -std::log(z_lb);
  std::vector<double> z(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double t = double(i) / (points - 1);
    z[static_cast<std::size_t>(i)] = std::exp(-s_min * std::pow(s_max / s_min, t));
  }
  return z;
}

std::vector<BoundState> scan_side(const Potential<double>& p, double sign, double z_lb,
                                  const BoundStateOptions& opts, int points) {
  const auto grid = side_grid(z_lb, opts.delta, points);
  const auto values =
      parallel_map<double>(grid.size(), [&](std::size_t i) { return abs_det_m_minus(p, sign * grid[i]); });
  std::vector<double> candidates;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    if (values[i] <= values[i - 1] && values[i] <= values[i + 1]) {
      const double a = sign * grid[i - 1];
      const double b = sign * grid[i + 1];
      candidates.push_back(
          golden_section([&](double z) { return abs_det_m_minus(p, z); }, std::min(a, b), std::max(a, b)));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                   candidates.end());
  std::vector<BoundState> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double z = candidates[i];
    double gap = 1 - std::abs(z);
    if (i > 0) gap = std::min(gap, z - candidates[i - 1]);
    if (i + 1 < candidates.size()) gap = std::min(gap, candidates[i + 1] - z);
    const double radius = std::max(1e-7, gap / 10);
    WindingResult w;
    try {
      w = circle_winding(log_det_derivative(p), Complexd(z), radius, 1e-8, 16, 1 << 12);
    } catch (const SingularMatrix&) {
      continue;
    }
    const long order = w.rounded();
    if (order <= 0) continue;
    double polished = z;
    if (order > 0) {
      polished = golden_section([&](double x) { return kth_smallest_sv(p, x, int(order)); }, z - radius,
                                z + radius);
    }
    out.push_back({polished, polished + 1 / polished, int(order), w.defect()});
  }
  return out;
}

Matrixd edge_mean(const Potential<double>& p, Edge edge, double radius, int points,
                  const std::function<Matrixd(Complexd)>& f) {
  const double s = edge_sign(edge);
  const auto terms = parallel_map<Matrixd>(static_cast<std::size_t>(points), [&](std::size_t k) {
    const Complexd zeta = s + radius * std::polar(1.0, 2 * std::numbers::pi * (double(k) + 0.5) / points);
    return f(zeta);
  });
  (void)p;
  return pairwise_sum(terms) / double(points);
}

}  // namespace

int total_multiplicity(const std::vector<BoundState>& states) {
  int n = 0;
  for (const auto& b : states) n += b.multiplicity;
  return n;
}

BoundStateSearch search_bound_states(const Potential<double>& p, const BoundStateOptions& opts) {
  BoundStateSearch result;
  if (p.is_zero()) {
    result.consistent = true;
    return result;
  }
  const double e_max = 3 + p.max_norm();
  const double z_lb = (e_max - std::sqrt(e_max * e_max - 4)) / 2;
  int points = opts.grid_points;
  for (int attempt = 0; attempt <= opts.max_refinements; ++attempt, points *= 2) {
    std::vector<BoundState> states = scan_side(p, -1.0, z_lb, opts, points);
    auto upper = scan_side(p, 1.0, z_lb, opts, points);
    states.insert(states.end(), upper.begin(), upper.end());
    std::sort(states.begin(), states.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });

    double z_max = 0;
    for (const auto& b : states) z_max = std::max(z_max, std::abs(b.z));
    double radius = 1 - 1e-3;
    if (z_max >= radius) radius = (1 + z_max) / 2;
    const auto w = circle_winding(log_det_derivative(p), Complexd(0), radius, 1e-6, 256, 1 << 16);
    result = {std::move(states), w.rounded(), radius, points, false};
    result.consistent = w.converged && w.defect() < 1e-3 && w.rounded() == total_multiplicity(result.states);
    if (result.consistent) break;
  }
  return result;
}

std::vector<BoundState> find_bound_states(const Potential<double>& p, const BoundStateOptions& opts) {
  auto search = search_bound_states(p, opts);
  if (!search.consistent) {
    throw NumericalFailure("bound-state scan found " + std::to_string(total_multiplicity(search.states)) +
                           " zeros but the contour count is " + std::to_string(search.contour_count));
  }
  return search.states;
}

Matrixd band_edge_singular_part(const Potential<double>& p, Edge edge) {
  const Index L = p.channels();
  const double s = edge_sign(edge);
  const Matrixd t = transfer_product(p, Complexd(2 * s), p.k_plus(), p.k_minus());
  const Matrixd id = Matrixd::Identity(L, L);
  Matrixd left(2 * L, 2 * L), right(2 * L, 2 * L);
  left << -id, s * id, id, -s * id;
  right << s * id, s * id, id, id;
  const double parity = (s < 0 && (p.k_plus() - p.k_minus()) % 2 != 0) ? -1.0 : 1.0;
  return Complexd(0, parity) * left * t * right;
}

Matrixd band_edge_F(const Potential<double>& p, Edge edge) {
  const Index L = p.channels();
  return band_edge_singular_part(p, edge).bottomRightCorner(L, L);
}

Matrixd band_edge_F_wronskian(const Potential<double>& p, Edge edge) {
  const Complexd z(edge_sign(edge));
  const auto n = p.k_minus();
  const auto plus = jost_frame(p, z, Side::plus, n, n);
  const auto minus = jost_frame(p, z, Side::minus, n, n);
  return -wronskian(plus, minus, n);
}

std::vector<HalfBoundProfile> half_bound_profiles(const Potential<double>& p, Edge edge,
                                                  const BandEdgeOptions& opts) {
  const Matrixd f = band_edge_F(p, edge);
  const Matrixd kernel = kernel_basis(f, opts.rank_tol);
  const long first = p.k_minus() - opts.profile_margin;
  const long last = p.k_plus() + opts.profile_margin;
  const auto frame = jost_frame(p, Complexd(edge_sign(edge)), Side::minus, first, last);
  std::vector<HalfBoundProfile> out;
  for (Index c = 0; c < kernel.cols(); ++c) {
    HalfBoundProfile prof{kernel.col(c), first, {}};
    for (long n = first; n <= last; ++n) prof.values.push_back(frame.u(n) * prof.phi);
    out.push_back(std::move(prof));
  }
  return out;
}

BandEdgeReport band_edge_limit_S(const Potential<double>& p, Edge edge, const BandEdgeOptions& opts) {
  if (opts.route == EdgeRoute::inversion) {
    BandEdgeOptions o = opts;
    o.route = EdgeRoute::direct;
    const Edge mirrored = edge == Edge::upper ? Edge::lower : Edge::upper;
    BandEdgeReport r = band_edge_limit_S(p.negated(), mirrored, o);
    r.edge = edge;
    r.F = -r.F;
    r.U = -r.U;
    r.profiles = half_bound_profiles(p, edge, opts);
    return r;
  }
  const Index L = p.channels();
  BandEdgeReport r;
  r.edge = edge;
  const Matrixd full = band_edge_singular_part(p, edge);
  r.F = full.bottomRightCorner(L, L);
  const Matrixd f_hat = full.topRightCorner(L, L);

  Eigen::JacobiSVD<Matrixd> svd(r.F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd desc = svd.singularValues();
  const auto rank = decide_rank<double>(desc, opts.rank_tol);
  r.Jh = int(L - rank.rank);
  r.rank_ambiguous = rank.ambiguous;
  r.alternative_Jh = int(L - rank.alternative_rank);
  // Reverse the order so that the kernel comes first: F = U diag(0, f) U'.
  const Matrixd reverse = Matrixd::Identity(L, L).rowwise().reverse();
  r.U = svd.matrixU() * reverse;
  r.U_prime = reverse * svd.matrixV().adjoint();
  r.singular_values = desc.reverse();
  const int jh = r.Jh;
  const Index nr = L - jh;

  r.G = edge_mean(p, edge, opts.cauchy_radius, opts.cauchy_points, [&](Complexd zeta) {
    return Matrixd(plane_wave_transfer(p, zeta).value - nu_of(zeta) * full);
  });
  const Matrixd g22 = r.G.bottomRightCorner(L, L);
  const Matrixd g_hat = r.G.topRightCorner(L, L);

  // Limit of (F_hat + e G_hat)(F + e G22)^{-1} and e (F + e G22)^{-1} as e -> 0,
  // expanded in the SVD basis B = U^* G22 U'^* = [[a, b], [c, d]].
  const Matrixd b_full = r.U.adjoint() * g22 * r.U_prime.adjoint();
  Matrixd p0 = Matrixd::Zero(L, L);
  Matrixd y = Matrixd::Zero(L, L);
  Matrixd f_inv = Matrixd::Zero(nr, nr);
  for (Index i = 0; i < nr; ++i) f_inv(i, i) = 1.0 / r.singular_values(jh + i);
  if (jh > 0) {
    Matrixd a_inv;
    try {
      a_inv = checked_inverse(b_full.topLeftCorner(jh, jh));
    } catch (const SingularMatrix&) {
      throw NumericalFailure("band-edge Schur block a is singular");
    }
    const Matrixd bb = b_full.topRightCorner(jh, nr);
    const Matrixd cc = b_full.bottomLeftCorner(nr, jh);
    p0.topLeftCorner(jh, jh) = a_inv;
    y.topLeftCorner(jh, jh) = a_inv * bb * f_inv * cc * a_inv;
    y.topRightCorner(jh, nr) = -a_inv * bb * f_inv;
    y.bottomLeftCorner(nr, jh) = -f_inv * cc * a_inv;
  }
  y.bottomRightCorner(nr, nr) = f_inv;

  const Matrixd t_minus = r.U_prime.adjoint() * p0 * r.U.adjoint();
  const Matrixd r_minus = -(g_hat * t_minus + f_hat * r.U_prime.adjoint() * y * r.U.adjoint());
  r.annihilation_defect = max_abs(Matrixd(f_hat * t_minus));
  r.limitS.resize(2 * L, 2 * L);
  r.limitS << t_minus.adjoint(), r_minus, r_minus.adjoint(), t_minus;
  r.profiles = half_bound_profiles(p, edge, opts);
  return r;
}

Matrixd band_edge_limit_cauchy(const Potential<double>& p, Edge edge, double radius, int points) {
  return edge_mean(p, edge, radius, points, [&](Complexd zeta) { return scattering_matrix(p, zeta).value; });
}

Matrixd band_edge_limit_circle(const Potential<double>& p, Edge edge, double theta) {
  const double s = edge_sign(edge);
  const Complexd a = s * std::polar(1.0, theta);
  return (scattering_matrix(p, a).value + scattering_matrix(p, std::conj(a)).value) / 2.0;
}

PoleOrderCheck det_pole_order_check(const Potential<double>& p, Edge edge,
                                    const std::vector<BoundState>& bound_states, double radius) {
  const double s = edge_sign(edge);
  for (const auto& b : bound_states) radius = std::min(radius, std::abs(b.z - s) / 2);
  const auto f = log_det_derivative(p);
  const Complexd center(s);
  PoleOrderCheck c;
  for (; radius >= kMinEdgeRadius; radius /= 2) {
    // sum over zeros and poles of (zeta_k - s)^q: zero iff nothing but the edge lies inside.
    c.moment_defect = 0;
    for (int q = 1; q <= 3; ++q) {
      const auto m = circle_winding([&](Complexd zeta) { return f(zeta) * std::pow(zeta - center, q); }, center,
                                    radius, 1e-9 * std::pow(radius, q), 64, 1 << 14);
      c.moment_defect = std::max(c.moment_defect, std::abs(m.value) / std::pow(radius, q));
    }
    if (c.moment_defect < 1e-6) break;
  }
  if (radius < kMinEdgeRadius) {
    throw NumericalFailure("zeros of det M^z_- accumulate within " + std::to_string(kMinEdgeRadius) +
                           " of the band edge");
  }
  c.radius = radius;
  c.winding = circle_winding(f, center, radius, 1e-9, 64, 1 << 14);
  if (!(c.winding.defect() < 1e-3)) {
    throw NumericalFailure("winding around the band edge is not integral (defect " +
                           std::to_string(c.winding.defect()) + ")");
  }
  c.order = -c.winding.rounded();
  return c;
}

}  // namespace qjac
