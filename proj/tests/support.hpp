#pragma once

#include <string>
#include <vector>

#include "qjac/cli.hpp"
#include "qjac/potential.hpp"
#include "qjac/potential_io.hpp"

namespace qjac::test {

inline Potential<double> fixture(const std::string& name) {
  return load_potential_file(std::string(QJAC_FIXTURE_DIR) + "/" + name + ".json");
}

inline std::string fixture_path(const std::string& name) { return std::string(QJAC_FIXTURE_DIR) + "/" + name + ".json"; }

/// The named fixtures with their spectral counts (J_b, J_h^+, J_h^-).
struct NamedFixture {
  std::string name;
  int Jb;
  int Jh_plus;
  int Jh_minus;
};

inline const std::vector<NamedFixture>& fixture_suite() {
  static const std::vector<NamedFixture> suite{
      {"free_l1", 0, 1, 1},           {"free_l2", 0, 2, 2},        {"single_site_plus1", 1, 0, 0},
      {"single_site_minus1", 1, 0, 0}, {"diag_0_3", 1, 1, 1},       {"two_site", 3, 0, 0},
      {"three_channel", 5, 0, 0}};
  return suite;
}

inline Potential<double> single_site(double v) {
  Matrixd m(1, 1);
  m(0, 0) = v;
  return Potential<double>(1, 0, 1, {{1, m}});
}

inline std::vector<Potential<double>> random_suite(std::uint64_t seed, int count, Index max_L,
                                                   std::int64_t max_width, double bound) {
  UniformSource rng(seed);
  std::vector<Potential<double>> out;
  for (int i = 0; i < count; ++i) out.push_back(random_potential(rng, max_L, max_width, bound));
  return out;
}

}  // namespace qjac::test
