#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "qjac/jost.hpp"
#include "qjac/levinson.hpp"
#include "qjac/oracle.hpp"
#include "qjac/scattering.hpp"
#include "qjac/spectral.hpp"
#include "qjac/transfer.hpp"
#include "support.hpp"

using namespace qjac;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// z = e^{ik} with |k| uniform on (1e-3, pi - 1e-3) and a random sign.
Complexd circle_point(UniformSource& rng) {
  const double k = rng.next(1e-3, std::numbers::pi - 1e-3);
  return std::polar(1.0, rng.next() < 0.5 ? k : -k);
}

struct Sample {
  Potential<double> p;
  Complexd z;
};

std::vector<Sample> unitarity_suite() {
  UniformSource rng(2024);
  std::vector<Sample> out;
  for (int i = 0; i < 500; ++i) {
    auto p = random_potential(rng, 4, 8, 1.0);
    out.push_back({std::move(p), circle_point(rng)});
  }
  return out;
}

Outcome ac1() {
  const auto t0 = std::chrono::steady_clock::now();
  double s_defect = 0, j_defect = 0, j_scaled = 0;
  for (const auto& [p, z] : unitarity_suite()) {
    const Matrixd m = plane_wave_transfer(p, z).value;
    const Matrixd j = pauli_J<double>(p.channels());
    const double d = max_abs(Matrixd(m.adjoint() * j * m - j));
    const double norm = singular_values(m)(0);
    j_defect = std::max(j_defect, d);
    j_scaled = std::max(j_scaled, d / (norm * norm));
    s_defect = std::max(s_defect, unitarity_defect(scattering_matrix(p, z).value));
  }
  const double t = seconds_since(t0);
  const bool passed = s_defect <= 1e-10 && j_defect <= 1e-11 && t < 30;
  return {passed, fmt("max|S*S-1| = %.3g (<= 1e-10), max|M*JM-J| = %.3g (<= 1e-11), "
                      "max|M*JM-J|/|M|^2 = %.3g, %.1f s (< 30 s)",
                      s_defect, j_defect, j_scaled, t)};
}

Outcome ac2() {
  double worst = 0;
  for (const auto& [p, z] : unitarity_suite()) {
    const Matrixd a = plane_wave_transfer_product(p, z).value;
    const Matrixd b = plane_wave_transfer_conjugation(p, z).value;
    const Matrixd c = wronskian_block_matrix(p, z, p.k_minus());
    worst = std::max({worst, max_abs(Matrixd(a - b)), max_abs(Matrixd(a - c)), max_abs(Matrixd(b - c))});
  }
  return {worst <= 1e-9, fmt("max pairwise difference %.3g (<= 1e-9)", worst)};
}

Outcome ac3() {
  const auto s = scattering_matrix(test::single_site(1), Complexd(0, 1));
  const Complexd t = s.t_minus()(0, 0);
  const double t_err = std::abs(t - Complexd(0.8, 0.4));
  const double sum_err = std::abs(std::norm(t) + std::norm(s.r_minus()(0, 0)) - 1);

  double two_site = 0;
  const auto p = test::fixture("two_site");
  const Matrixd id = Matrixd::Identity(2, 2);
  for (Complexd z : {Complexd(0, 1), std::polar(1.0, 0.4), std::polar(0.7, 2.0), Complexd(0.4, 0)}) {
    const Complexd inu = Complexd(0, 1) * nu_of(z);
    const Matrixd expected = id - inu * (p.at(0) + p.at(1) - z * p.at(1) * p.at(0));
    two_site = std::max(two_site, max_abs(Matrixd(plane_wave_transfer(p, z).m_minus() - expected)));
  }
  Matrixd a(2, 2);
  a << 1, 0.5, 0.5, -1;
  const Matrixd b = 0.3 * a + 0.7 * id;
  const Potential<double> q(2, -1, 1, {{0, a}, {1, b}});
  double commuting = 0;
  for (Complexd z : {Complexd(0, 1), std::polar(1.0, 2.5), Complexd(0.4, 0)}) {
    const Complexd inu = Complexd(0, 1) * nu_of(z);
    const Matrixd expected = id - inu * (a + b - z * a * b);
    commuting = std::max(commuting, max_abs(Matrixd(plane_wave_transfer(q, z).m_minus() - expected)));
  }
  const bool passed = t_err <= 1e-12 && sum_err <= 1e-12 && two_site <= 1e-12 && commuting <= 1e-12;
  return {passed, fmt("|T - (0.8+0.4i)| = %.3g, ||T|^2+|R|^2-1| = %.3g, two-site M_- (V(1)V(0) order) %.3g, "
                      "commuting pair %.3g (all <= 1e-12)",
                      t_err, sum_err, two_site, commuting)};
}

Outcome ac4() {
  UniformSource rng(4);
  double worst = 0;
  int mismatches = 0, states = 0;
  for (int i = 0; i < 20; ++i) {
    const auto p = random_potential(rng, 3, 6, 2.0);
    const auto direct = find_bound_states(p);
    const auto oracle = oracle_bound_state_energies(p);
    if (direct.size() != oracle.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t k = 0; k < direct.size(); ++k) {
      worst = std::max(worst, std::abs(direct[k].energy - oracle[k].energy));
      if (direct[k].multiplicity != oracle[k].multiplicity) ++mismatches;
      states += direct[k].multiplicity;
    }
  }
  const auto single = find_bound_states(test::single_site(1));
  const double golden = single.size() == 1 ? std::abs(single[0].energy - std::sqrt(5.0)) : 1.0;
  const bool passed = mismatches == 0 && worst <= 1e-8 && golden <= 1e-10;
  return {passed, fmt("20 potentials, %d bound states, max energy difference %.3g (<= 1e-8), "
                      "%d list mismatches, |E - sqrt 5| = %.3g (<= 1e-10)",
                      states, worst, mismatches, golden)};
}

Outcome ac5() {
  double generic = 0;
  for (const auto& f : test::fixture_suite()) {
    if (f.Jh_plus != 0) continue;
    const auto p = test::fixture(f.name);
    const Index L = p.channels();
    Matrixd swap = Matrixd::Zero(2 * L, 2 * L);
    swap.topRightCorner(L, L).setIdentity();
    swap.bottomLeftCorner(L, L).setIdentity();
    for (Edge e : {Edge::upper, Edge::lower}) {
      generic = std::max(generic, max_abs(Matrixd(band_edge_limit_S(p, e).limitS - swap)));
    }
  }
  const auto diag = band_edge_limit_S(test::fixture("diag_0_3"), Edge::upper);
  Matrixd proj = Matrixd::Zero(2, 2);
  proj(0, 0) = 1;
  const double projection = max_abs(Matrixd(diag.limitS.topLeftCorner(2, 2) - proj));
  int order_mismatches = 0;
  for (const auto& f : test::fixture_suite()) {
    const auto p = test::fixture(f.name);
    const auto states = find_bound_states(p);
    if (det_pole_order_check(p, Edge::upper, states).order != p.channels() - f.Jh_plus) ++order_mismatches;
    if (det_pole_order_check(p, Edge::lower, states).order != p.channels() - f.Jh_minus) ++order_mismatches;
  }
  const bool passed = generic <= 1e-8 && projection <= 1e-8 && order_mismatches == 0;
  return {passed, fmt("generic |limitS - [[0,1],[1,0]]| = %.3g, |T_+ - diag(1,0)| = %.3g (<= 1e-8), "
                      "%d pole-order mismatches",
                      generic, projection, order_mismatches)};
}

Outcome ac6() {
  double worst = 0, slowest = 0;
  bool counts = true;
  for (const auto& f : test::fixture_suite()) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = levinson_report(test::fixture(f.name));
    slowest = std::max(slowest, seconds_since(t0));
    worst = std::max(worst, std::abs(r.residual));
    counts = counts && r.Jb == f.Jb && r.Jh_plus == f.Jh_plus && r.Jh_minus == f.Jh_minus;
  }
  const bool passed = worst < 1e-6 && slowest < 60 && counts;
  return {passed, fmt("max residual %.3g (< 1e-6), counts %s, slowest fixture %.2f s (< 60 s)", worst,
                      counts ? "as expected" : "WRONG", slowest)};
}

Outcome ac7() {
  double defect = 0;
  int mismatches = 0;
  for (const auto& f : test::fixture_suite()) {
    const auto p = test::fixture(f.name);
    const auto states = find_bound_states(p);
    const auto w = annular_winding_clear(p, default_annulus_eps(states), states);
    const long expected = 2 * p.channels() - (f.Jh_plus + f.Jh_minus) - 2 * f.Jb;
    if (std::lround(w.negated_sum()) != expected) ++mismatches;
    defect = std::max(defect, w.defect());
  }
  return {mismatches == 0 && defect < 1e-3,
          fmt("%d mismatches against 2L - J_h - 2J_b, max pre-rounding defect %.3g (< 1e-3)", mismatches, defect)};
}

Outcome ac8() {
  double worst = 0;
  for (const auto& f : test::fixture_suite()) {
    const auto p = test::fixture(f.name);
    for (Complexd z : {Complexd(0.3), Complexd(0.4, 0.2)}) {
      const TruncatedResolvent<double> g(TruncatedOperator<double>(p, green_truncation(p, z)), z + 1.0 / z);
      const auto s = scattering_from_green(p, z, [&](std::int64_t n, std::int64_t m) { return g.block(n, m); });
      worst = std::max(worst, max_abs(Matrixd(s.value - scattering_matrix(p, z).value)));
    }
  }
  const Complexd g00 = truncated_green(test::fixture("free_l1"), Complexd(2.5), 0, 0, 200)(0, 0);
  const double golden = std::abs(g00 - Complexd(-2.0 / 3));
  return {worst <= 1e-7 && golden <= 1e-10,
          fmt("max |S_green - S| = %.3g (<= 1e-7), |G(0,0) + 2/3| = %.3g (<= 1e-10)", worst, golden)};
}

Outcome ac9() {
  double routes = 0;
  for (const auto& f : test::fixture_suite()) {
    const auto p = test::fixture(f.name);
    for (int j = 0; j < 100; ++j) {
      const auto t = time_delay(p, std::polar(1.0, 2 * std::numbers::pi * (j + 0.5) / 100));
      routes = std::max(routes, std::abs(t.determinant_form - t.difference_form));
    }
  }
  UniformSource rng(9);
  double trace = 0;
  for (int i = 0; i < 50; ++i) {
    const auto p = random_potential(rng, 4, 6, 1.0);
    const double a = rng.next(0.1, 1.5), b = rng.next(0.1, 1.5);
    // A path of J-unitaries through both the spectral parameter and the coupling.
    auto path = [&](double t) {
      std::vector<Potential<double>::Entry> entries = p.entries();
      for (auto& [n, v] : entries) v *= (1 + b * t);
      const Potential<double> q(p.channels(), p.k_minus(), p.k_plus(), entries);
      return plane_wave_transfer(q, std::polar(1.0, a + t)).value;
    };
    const auto r = trace_identity(path, rng.next(-0.05, 0.05));
    trace = std::max(trace, std::abs(r.lhs - r.rhs));
  }
  return {routes <= 1e-6 && trace <= 1e-6,
          fmt("max route difference %.3g at 100 points per fixture (<= 1e-6), trace identity %.3g (<= 1e-6)",
              routes, trace)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}};
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failures;
    std::printf("%s %s %s\n", name, o.passed ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
