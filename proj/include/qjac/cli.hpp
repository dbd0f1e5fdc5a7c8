#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>

#include "qjac/potential.hpp"

namespace qjac {

/// Parses "a+bi", "a-bi", "a", "bi", "i", "-i" (also with 'j').
/// Throws InputError on anything else.
Complexd parse_complex(std::string_view text);

/// %.17g with "inf"/"nan" spelled out.
std::string format_double(double x);

/// Deterministic uniform doubles in [0, 1) from mt19937_64, (x >> 11) * 2^-53.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed);
  double next();
  /// Uniform on [lo, hi).
  double next(double lo, double hi) { return lo + (hi - lo) * next(); }
  /// Uniform integer in [lo, hi].
  std::int64_t next_int(std::int64_t lo, std::int64_t hi);

 private:
  std::mt19937_64 engine_;
};

/// (A + A^*)/2 with real and imaginary parts of A uniform on [-bound, bound].
Matrixd random_hermitian(UniformSource& rng, Index L, double bound);

/// L uniform in [1, max_L], width uniform in [1, max_width], window {1, ..., width},
/// every site filled by random_hermitian.
Potential<double> random_potential(UniformSource& rng, Index max_L, std::int64_t max_width, double bound);

/// Runs the command-line interface. Returns the process exit code:
/// 0 success, 1 input error, 2 domain error, 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qjac
