#pragma once

#include <optional>
#include <vector>

#include "qjac/contour.hpp"
#include "qjac/potential.hpp"

namespace qjac {

/// Parameter z in (-1, 1) \ {0} of an eigenvalue E = z + 1/z outside [-2, 2].
struct BoundState {
  double z = 0;
  double energy = 0;
  int multiplicity = 0;
  /// Distance of the local winding number from the nearest integer.
  double winding_defect = 0;
};

struct BoundStateOptions {
  /// Excluded collar at the band edges.
  double delta = 1e-6;
  /// Coarse grid points on each side of z = 0.
  int grid_points = 2000;
  /// Relative singular value threshold for ker M^z_-.
  double rank_tol = 1e-10;
  /// Grid refinements tried when the contour count disagrees.
  int max_refinements = 3;
};

struct BoundStateSearch {
  std::vector<BoundState> states;
  /// Zero count of det M^z_- inside |z| = contour_radius.
  long contour_count = 0;
  double contour_radius = 0;
  int grid_points = 0;
  bool consistent = false;
};

/// Zeros of det M^z_- on [-1 + delta, -z_lb] u [z_lb, 1 - delta] with multiplicities,
/// where z_lb + 1/z_lb = 3 + max ||V(n)||. Coarse scan of |det| on a grid that is
/// logarithmic in -log|z|, golden-section refinement, multiplicity by local winding,
/// and a global winding count as cross-check.
BoundStateSearch search_bound_states(const Potential<double>& p, const BoundStateOptions& opts = {});

/// States of search_bound_states; throws NumericalFailure if the cross-check fails.
std::vector<BoundState> find_bound_states(const Potential<double>& p, const BoundStateOptions& opts = {});

int total_multiplicity(const std::vector<BoundState>& states);

/// Closed-form singular part of M^z at z = +-1:
/// lim nu^{-1} M^z = s^{K_+-K_-} i [[-1, s], [1, -s]] T^{2s}(K_+, K_-) [[s, s], [1, 1]], s = +-1.
Matrixd band_edge_singular_part(const Potential<double>& p, Edge edge);

/// F_+- : lower-right block of the singular part.
Matrixd band_edge_F(const Potential<double>& p, Edge edge);

/// -W(u^{+-1}_+, u^{+-1}_-) from Jost frames at the edge.
Matrixd band_edge_F_wronskian(const Potential<double>& p, Edge edge);

struct HalfBoundProfile {
  /// Kernel vector of F.
  Vectord phi;
  long first_site = 0;
  /// u_phi(n) for n = first_site, first_site + 1, ...
  std::vector<Vectord> values;
};

enum class EdgeRoute { direct, inversion };

struct BandEdgeOptions {
  double rank_tol = 1e-10;
  /// Radius and node count of the Cauchy average for the regular part.
  double cauchy_radius = 1e-2;
  int cauchy_points = 64;
  /// Profiles are reported on [K_- - margin, K_+ + margin].
  long profile_margin = 5;
  EdgeRoute route = EdgeRoute::direct;
};

struct BandEdgeReport {
  Edge edge = Edge::upper;
  Matrixd F;
  /// F = U diag(0, f) U', singular values ascending.
  Matrixd U;
  Matrixd U_prime;
  Eigen::VectorXd singular_values;
  int Jh = 0;
  bool rank_ambiguous = false;
  int alternative_Jh = 0;
  /// Regular part G = lim (M^z - nu^z F_full).
  Matrixd G;
  Matrixd limitS;
  /// ||F_hat T_-|| which must vanish.
  double annihilation_defect = 0;
  std::vector<HalfBoundProfile> profiles;
};

BandEdgeReport band_edge_limit_S(const Potential<double>& p, Edge edge, const BandEdgeOptions& opts = {});

/// Bounded solutions u^{+-1}_- phi, phi in ker F_+-, on [K_- - margin, K_+ + margin].
std::vector<HalfBoundProfile> half_bound_profiles(const Potential<double>& p, Edge edge,
                                                  const BandEdgeOptions& opts = {});

/// S at the band edge as the mean of S^zeta over a circle around it (S is analytic there).
Matrixd band_edge_limit_cauchy(const Potential<double>& p, Edge edge, double radius = 1e-2, int points = 64);

/// (S(s e^{i theta}) + S(s e^{-i theta})) / 2, approaching the edge along the unit circle.
Matrixd band_edge_limit_circle(const Potential<double>& p, Edge edge, double theta = 1e-4);

/// Smallest circle radius tried around a band edge.
inline constexpr double kMinEdgeRadius = 1e-6;

struct PoleOrderCheck {
  long order = 0;
  WindingResult winding;
  double radius = 0;
  /// max_q |sum_k (zeta_k - s)^q| / radius^q, q = 1..3, over zeros and poles inside.
  double moment_defect = 0;
};

/// Negated winding of det M^zeta_- around a small circle at the edge; equals L - J_h.
/// The radius is halved until the edge is the only zero or pole inside, which keeps
/// bound states and resonances out. Throws NumericalFailure when the winding is not
/// integral to 1e-3 or the radius falls below kMinEdgeRadius.
PoleOrderCheck det_pole_order_check(const Potential<double>& p, Edge edge,
                                    const std::vector<BoundState>& bound_states = {}, double radius = 1e-2);

}  // namespace qjac
