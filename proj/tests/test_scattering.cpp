#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qjac/oracle.hpp"
#include "qjac/scattering.hpp"
#include "support.hpp"

using namespace qjac;

TEST_CASE("free scattering matrix is the identity") {
  const auto s = scattering_matrix(test::fixture("free_l2"), Complexd(0, 1));
  CHECK(max_abs(Matrixd(s.value - Matrixd::Identity(4, 4))) < 1e-15);
}

TEST_CASE("single site v = 1 at z = i") {
  const auto s = scattering_matrix(test::single_site(1), Complexd(0, 1));
  CHECK(std::abs(s.t_minus()(0, 0) - Complexd(0.8, 0.4)) < 1e-12);
  CHECK(std::abs(s.t_plus()(0, 0) - Complexd(0.8, 0.4)) < 1e-12);
  CHECK(std::abs(s.r_plus()(0, 0) - Complexd(-0.2, 0.4)) < 1e-12);
  const double t2 = std::norm(s.t_minus()(0, 0));
  const double r2 = std::norm(s.r_minus()(0, 0));
  CHECK(std::abs(t2 + r2 - 1) < 1e-12);
}

TEST_CASE("conjugation symmetries off the unit circle") {
  const auto p = test::fixture("two_site");
  const Matrixd k = pauli_K<double>(p.channels());
  for (Complexd z : {Complexd(0.5), Complexd(0.5, 0.1)}) {
    const Matrixd s = scattering_matrix(p, z).value;
    const Matrixd a = scattering_matrix(p, std::conj(z)).value;
    CHECK(max_abs(Matrixd(a - k * s.adjoint() * k)) < 1e-10 * std::max(1.0, max_abs(a)));
    const Matrixd dual = scattering_matrix(p, 1.0 / std::conj(z)).value;
    CHECK(max_abs(Matrixd(dual.adjoint() * s - Matrixd::Identity(4, 4))) < 1e-10 * std::max(1.0, max_abs(s)));
  }
}

TEST_CASE("scattering matrices are unitary on the unit circle") {
  UniformSource rng(21);
  for (int k = 0; k < 40; ++k) {
    const auto p = random_potential(rng, 4, 8, 1.0);
    const Complexd z = std::polar(1.0, rng.next(1e-3, std::numbers::pi - 1e-3));
    const auto s = scattering_matrix(p, z);
    CHECK(unitarity_defect(s.value) < 1e-10);
  }
}

TEST_CASE("reduced form agrees with the full form") {
  UniformSource rng(22);
  for (int k = 0; k < 20; ++k) {
    const auto p = random_potential(rng, 3, 4, 1.0);
    const Complexd z = std::polar(1.0, rng.next(0.05, 3.0));
    CHECK(max_abs(Matrixd(scattering_matrix(p, z).value - scattering_matrix_reduced(p, z))) < 1e-9);
  }
}

TEST_CASE("bound-state parameter is not in C0") {
  const double zb = (std::sqrt(5.0) - 1) / 2;
  CHECK_THROWS_AS(scattering_matrix(test::single_site(-1), Complexd(-zb)), NotInC0);
  CHECK_THROWS_AS(scattering_matrix(test::single_site(1), Complexd(zb)), NotInC0);
}

TEST_CASE("v_of_m of the identity") {
  const Matrixd id = Matrixd::Identity(4, 4);
  CHECK(max_abs(Matrixd(v_of_m(id) - id)) == 0);
}

TEST_CASE("v_of_m rejects matrices that are not J-unitary") {
  Matrixd m = Matrixd::Identity(2, 2);
  m(0, 1) = 1;
  CHECK_THROWS_AS(v_of_m(m), DomainError);
}

TEST_CASE("v_of_m is unitary on transfer matrices of random potentials") {
  UniformSource rng(23);
  for (int k = 0; k < 30; ++k) {
    const auto p = random_potential(rng, 3, 5, 1.0);
    const Complexd z = std::polar(1.0, rng.next(0.05, 3.0));
    const Matrixd m = plane_wave_transfer(p, z).value;
    CHECK(unitarity_defect(v_of_m(m)) < 1e-10);
    CHECK(max_abs(Matrixd(v_of_m(m) - scattering_matrix(p, z).value)) < 1e-9);
  }
}

namespace {

Matrixd green_assembly(const Potential<double>& p, Complexd z) {
  const TruncatedResolvent<double> g(TruncatedOperator<double>(p, green_truncation(p, z)), z + 1.0 / z);
  return scattering_from_green(p, z, [&](std::int64_t n, std::int64_t m) { return g.block(n, m); }).value;
}

}  // namespace

TEST_CASE("Green assembly for a single site") {
  const auto p = test::single_site(1);
  const Complexd z(0.3);
  CHECK(max_abs(Matrixd(green_assembly(p, z) - scattering_matrix(p, z).value)) < 1e-8);
}

TEST_CASE("Green assembly for the free operator") {
  const Matrixd s = green_assembly(test::fixture("free_l2"), Complexd(0.5));
  CHECK(max_abs(Matrixd(s - Matrixd::Identity(4, 4))) < 1e-12);
}

TEST_CASE("Green assembly for a random two-channel potential") {
  UniformSource rng(24);
  const Potential<double> p(2, 0, 3, {{1, random_hermitian(rng, 2, 1.0)}, {2, random_hermitian(rng, 2, 1.0)},
                                      {3, random_hermitian(rng, 2, 1.0)}});
  const Complexd z(0.4);
  CHECK(max_abs(Matrixd(green_assembly(p, z) - scattering_matrix(p, z).value)) < 1e-7);
}

TEST_CASE("Green assembly needs |z| < 1") {
  const auto p = test::single_site(1);
  CHECK_THROWS_AS(scattering_from_green(p, Complexd(1.5), [](std::int64_t, std::int64_t) { return Matrixd(1, 1); }),
                  DomainError);
}
