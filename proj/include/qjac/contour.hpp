#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "qjac/errors.hpp"
#include "qjac/parallel.hpp"
#include "qjac/types.hpp"

namespace qjac {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline GaussLegendreRule compute_gauss_legendre(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0;
  return rule;
}

}  // namespace detail

/// Cached n-point rule; thread-safe.
inline const GaussLegendreRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendreRule>(detail::compute_gauss_legendre(n));
  return *slot;
}

struct WindingResult {
  /// (1/2 pi i) times the contour integral of the logarithmic derivative.
  Complex<double> value;
  int points = 0;
  bool converged = false;

  long rounded() const { return std::lround(value.real()); }
  double defect() const { return std::abs(value - double(rounded())); }
};

/// (1/2 pi i) of the integral of f over the counterclockwise circle |zeta - c| = r,
/// with f the logarithmic derivative of some determinant. Periodic trapezoid rule,
/// doubling the point count (reusing previous nodes) until successive values
/// differ by less than tol or max_points is reached.
template <typename Fn>
WindingResult circle_winding(Fn&& f, Complex<double> center, double radius, double tol = 1e-10,
                             int min_points = 64, int max_points = 1 << 16) {
  auto node = [&](int k, int n) {
    return center + radius * std::polar(1.0, 2 * std::numbers::pi * k / n);
  };
  auto term = [&](Complex<double> zeta) { return f(zeta) * (zeta - center); };
  int n = min_points;
  auto first = parallel_map<Complex<double>>(static_cast<std::size_t>(n),
                                             [&](std::size_t k) { return term(node(int(k), n)); });
  Complex<double> sum = pairwise_sum(first);
  WindingResult r{sum / double(n), n, false};
  while (2 * n <= max_points) {
    auto extra = parallel_map<Complex<double>>(static_cast<std::size_t>(n), [&](std::size_t k) {
      return term(node(2 * int(k) + 1, 2 * n));
    });
    sum += pairwise_sum(extra);
    n *= 2;
    const Complex<double> next = sum / double(n);
    const double change = std::abs(next - r.value);
    r = {next, n, false};
    if (change < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

}  // namespace qjac
