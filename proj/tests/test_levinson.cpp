#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qjac/levinson.hpp"
#include "qjac/transfer.hpp"
#include "support.hpp"

using namespace qjac;

TEST_CASE("free time delay vanishes") {
  const auto p = test::fixture("free_l2");
  for (double k : {0.3, 1.5, 2.9}) {
    const auto t = time_delay(p, std::polar(1.0, k));
    CHECK(std::abs(t.determinant_form) == 0);
    CHECK(std::abs(t.difference_form) < 1e-12);
  }
}

TEST_CASE("single-site time delay at z = i by both routes") {
  const auto p = test::single_site(1);
  const auto t = time_delay(p, Complexd(0, 1));
  CHECK(std::abs(t.determinant_form - t.difference_form) < 1e-6);
  // d nu / dz vanishes at z = i.
  CHECK(std::abs(t.determinant_form) == 0);
  const Complexd z = std::polar(1.0, 0.5);
  const auto u = time_delay(p, z);
  CHECK(std::abs(u.determinant_form - u.difference_form) < 1e-6);
  CHECK(u.k_form(z) == doctest::Approx(-1.8288729195796001).epsilon(1e-12));
}

TEST_CASE("time delay routes agree on the fixtures") {
  for (const auto& f : test::fixture_suite()) {
    CAPTURE(f.name);
    const auto p = test::fixture(f.name);
    for (int j = 0; j < 12; ++j) {
      const Complexd z = std::polar(1.0, 2 * std::numbers::pi * (j + 0.5) / 12);
      const auto t = time_delay(p, z);
      CHECK(std::abs(t.determinant_form - t.difference_form) < 1e-6 * std::max(1.0, std::abs(t.determinant_form)));
    }
  }
}

TEST_CASE("trace identity on paths of transfer matrices") {
  UniformSource rng(41);
  for (int k = 0; k < 20; ++k) {
    const auto p = random_potential(rng, 3, 4, 1.0);
    auto path = [&p](double t) { return plane_wave_transfer(p, std::polar(1.0, t)).value; };
    const auto r = trace_identity(path, rng.next(0.2, 2.9));
    CHECK(std::abs(r.lhs - r.rhs) < 1e-6 * std::max(1.0, std::abs(r.lhs)));
  }
}

TEST_CASE("free band integral is zero") {
  const auto b = band_integral(test::fixture("free_l1"));
  CHECK(b.converged);
  CHECK(std::abs(b.value) == 0);
}

TEST_CASE("single-site band integral is zero") {
  const auto b = band_integral(test::single_site(1));
  CHECK(b.converged);
  CHECK(std::abs(b.value) < 1e-8);
}

TEST_CASE("diag(0,3) band integral matches the spectral counts") {
  const auto p = test::fixture("diag_0_3");
  const int jb = total_multiplicity(find_bound_states(p));
  const int jh = band_edge_limit_S(p, Edge::upper).Jh + band_edge_limit_S(p, Edge::lower).Jh;
  const auto b = band_integral(p);
  CHECK(std::abs(b.value.real() - (jb + 0.5 * jh - 2)) < 1e-8);
}

TEST_CASE("arc time delay matches the pointwise formula away from the edges") {
  const auto p = test::fixture("three_channel");
  const ArcTimeDelay g(p);
  for (double k : {0.4, 1.3, 2.7}) {
    const Complexd z = std::polar(1.0, k);
    CHECK(std::abs(g(z) - z * time_delay_determinant(p, z)) < 1e-12);
  }
  const double r = g.edge_radius(Edge::upper);
  CHECK(r > 0);
  // Inside the interpolated neighbourhood the value stays smooth.
  const double k0 = r / 8;
  const double mid = g.k_form(k0);
  CHECK(std::abs(mid - (g.k_form(k0 / 2) + g.k_form(3 * k0 / 2)) / 2) < 1e-3 * std::max(1.0, std::abs(mid)));
}

TEST_CASE("lower arc gives the same band integral") {
  BandIntegralOptions lower;
  lower.arc = Arc::lower;
  for (const char* name : {"two_site", "three_channel"}) {
    CAPTURE(name);
    const auto p = test::fixture(name);
    CHECK(std::abs(band_integral(p).value - band_integral(p, lower).value) < 1e-8);
  }
}

TEST_CASE("free annular windings vanish") {
  const auto w = annular_winding(test::fixture("free_l2"), 0.05);
  CHECK(w.inner.rounded() == 0);
  CHECK(w.outer.rounded() == 0);
  CHECK(w.defect() < 1e-3);
}

TEST_CASE("annular winding counts") {
  for (const auto& f : test::fixture_suite()) {
    CAPTURE(f.name);
    const auto p = test::fixture(f.name);
    const auto states = find_bound_states(p);
    const auto w = annular_winding_clear(p, default_annulus_eps(states), states);
    const long expected = 2 * p.channels() - (f.Jh_plus + f.Jh_minus) - 2 * f.Jb;
    CHECK(std::lround(w.negated_sum()) == expected);
    CHECK(w.defect() < 1e-3);
  }
}

TEST_CASE("annulus half-width must lie in (0, 1)") {
  CHECK_THROWS_AS(annular_winding(test::single_site(1), 0), DomainError);
  CHECK_THROWS_AS(annular_winding(test::single_site(1), 1), DomainError);
}

TEST_CASE("Levinson report for the free operator") {
  const auto r = levinson_report(test::fixture("free_l2"));
  CHECK(r.Jb == 0);
  CHECK(r.Jh_plus == 2);
  CHECK(r.Jh_minus == 2);
  CHECK(r.residual == 0);
  CHECK(r.passed());
}

TEST_CASE("Levinson report for a single site") {
  const auto r = levinson_report(test::single_site(1));
  CHECK(r.Jb == 1);
  CHECK(r.Jh_plus + r.Jh_minus == 0);
  CHECK(std::abs(r.residual) < 1e-6);
  CHECK(r.passed());
}

TEST_CASE("Levinson identity on random two-channel width-four potentials") {
  UniformSource rng(42);
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    std::vector<Potential<double>::Entry> entries;
    for (long n = 1; n <= 4; ++n) entries.emplace_back(n, random_hermitian(rng, 2, 1.0));
    const Potential<double> p(2, 0, 4, entries);
    const auto r = levinson_report(p);
    CHECK(r.passed());
    worst = std::max(worst, std::abs(r.residual));
  }
  CHECK(worst < 1e-6);
}
