#include <doctest.h>

#include <cmath>

#include "qjac/potential_io.hpp"
#include "support.hpp"

using namespace qjac;

TEST_CASE("load minimal single-site document") {
  const auto p = load_potential(R"({"L":1,"k_minus":0,"k_plus":1,"entries":[{"n":1,"re":[[1.0]]}]})");
  CHECK(p.channels() == 1);
  CHECK(p.k_minus() == 0);
  CHECK(p.k_plus() == 1);
  CHECK(p.at(1)(0, 0) == Complexd(1, 0));
  CHECK(p.at(0)(0, 0) == Complexd(0, 0));
  CHECK(p.at(2)(0, 0) == Complexd(0, 0));
}

TEST_CASE("non-Hermitian site is rejected") {
  CHECK_THROWS_AS(load_potential(R"({"L":2,"k_minus":0,"k_plus":1,"entries":[{"n":1,"re":[[0,1],[0,0]]}]})"),
                  InputError);
  CHECK_THROWS_AS(load_potential_file(test::fixture_path("invalid/not_hermitian")), InputError);
}

TEST_CASE("diag(0,3) document is a valid rank-one potential") {
  const auto p = test::fixture("diag_0_3");
  CHECK(p.channels() == 2);
  CHECK(p.at(1)(0, 0) == Complexd(0));
  CHECK(p.at(1)(1, 1) == Complexd(3));
  CHECK(p.max_norm() == doctest::Approx(3));
}

TEST_CASE("malformed documents are input errors") {
  CHECK_THROWS_AS(load_potential("{"), InputError);
  CHECK_THROWS_AS(load_potential(R"({"L":0,"k_minus":0,"k_plus":1,"entries":[]})"), InputError);
  CHECK_THROWS_AS(load_potential(R"({"L":1,"k_minus":2,"k_plus":1,"entries":[]})"), InputError);
  CHECK_THROWS_AS(load_potential(R"({"L":1,"k_minus":0,"k_plus":1,"entries":[{"n":2,"re":[[1]]}]})"), InputError);
  CHECK_THROWS_AS(load_potential(R"({"L":1,"k_minus":0,"k_plus":2,"entries":[{"n":1,"re":[[1]]},{"n":1,"re":[[2]]}]})"),
                  InputError);
  CHECK_THROWS_AS(load_potential(R"({"L":2,"k_minus":0,"k_plus":1,"entries":[{"n":1,"re":[[1]]}]})"), InputError);
  CHECK_THROWS_AS(load_potential(R"({"L":1,"k_minus":0,"k_plus":1})"), InputError);
}

TEST_CASE("imaginary parts are read and symmetrized") {
  const auto p = load_potential(
      R"({"L":2,"k_minus":-1,"k_plus":0,"entries":[{"n":0,"re":[[1,0.5],[0.5,2]],"im":[[0,0.25],[-0.25,0]]}]})");
  CHECK(p.at(0)(0, 1) == Complexd(0.5, 0.25));
  CHECK(p.at(0)(1, 0) == Complexd(0.5, -0.25));
}

TEST_CASE("dump and load round trip") {
  for (const auto& f : test::fixture_suite()) {
    CAPTURE(f.name);
    const auto p = test::fixture(f.name);
    CHECK(load_potential(dump_potential(p)) == p);
  }
}

TEST_CASE("spectral point at z = i") {
  const auto pt = make_spectral_point(Complexd(0, 1));
  CHECK(std::abs(pt.energy) < 1e-15);
  CHECK(std::abs(pt.nu - Complexd(0.5, 0)) < 1e-15);
}

TEST_CASE("spectral point at z = 1/2") {
  const auto pt = make_spectral_point(Complexd(0.5, 0));
  CHECK(std::abs(pt.energy - Complexd(2.5, 0)) < 1e-15);
  CHECK(std::abs(pt.nu - Complexd(0, -2.0 / 3)) < 1e-15);
}

TEST_CASE("band edges and the origin are outside the domain") {
  CHECK_THROWS_AS(make_spectral_point(Complexd(1, 0)), DomainError);
  CHECK_THROWS_AS(make_spectral_point(Complexd(-1, 0)), DomainError);
  CHECK_THROWS_AS(make_spectral_point(Complexd(0, 0)), DomainError);
}

TEST_CASE("energy selects the root with positive imaginary part") {
  const Complexd z = z_from_energy(Complexd(1, 0.1));
  CHECK(z.imag() > 0);
  CHECK(std::abs(z + 1.0 / z - Complexd(1, 0.1)) < 1e-14);
  const Complexd w = z_from_energy(Complexd(2.5, 0));
  CHECK(std::abs(w - Complexd(0.5, 0)) < 1e-15);
  const Complexd u = z_from_energy(Complexd(0, 0));
  CHECK(std::abs(u - Complexd(0, 1)) < 1e-15);
}

TEST_CASE("negated potential flips every site") {
  const auto p = test::fixture("two_site");
  const auto q = p.negated();
  for (auto n = p.k_minus() + 1; n <= p.k_plus(); ++n) CHECK(max_abs(Matrixd(p.at(n) + q.at(n))) == 0);
}
