#include "qjac/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qjac/jost.hpp"
#include "qjac/levinson.hpp"
#include "qjac/oracle.hpp"
#include "qjac/parallel.hpp"
#include "qjac/potential_io.hpp"
#include "qjac/scattering.hpp"
#include "qjac/spectral.hpp"

namespace qjac {

namespace {

using json = nlohmann::ordered_json;


bool parse_real(std::string_view text, double& out) {
  if (text.empty()) return false;
  const std::string s(text);
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

}  // namespace

Complexd parse_complex(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != ' ') s.push_back(c);
  }
  const auto fail = [&]() { return InputError("cannot parse complex number \"" + std::string(text) + "\""); };
  if (s.empty()) throw fail();
  double re = 0;
  double im = 0;
  if (s.back() != 'i' && s.back() != 'j') {
    if (!parse_real(s, re)) throw fail();
    return {re, 0};
  }
  s.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  std::string real_part = split == std::string::npos ? "" : s.substr(0, split);
  std::string imag_part = split == std::string::npos ? s : s.substr(split);
  if (!real_part.empty() && !parse_real(real_part, re)) throw fail();
  if (imag_part.empty() || imag_part == "+") {
    im = 1;
  } else if (imag_part == "-") {
    im = -1;
  } else if (!parse_real(imag_part, im)) {
    throw fail();
  }
  return {re, im};
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

UniformSource::UniformSource(std::uint64_t seed) : engine_(seed) {}

double UniformSource::next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::int64_t UniformSource::next_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  return std::min(hi, lo + static_cast<std::int64_t>(next() * span));
}

Matrixd random_hermitian(UniformSource& rng, Index L, double bound) {
  Matrixd a(L, L);
  for (Index i = 0; i < L; ++i) {
    for (Index j = 0; j < L; ++j) {
      const double re = rng.next(-bound, bound);
      const double im = rng.next(-bound, bound);
      a(i, j) = Complexd(re, im);
    }
  }
  return (a + a.adjoint()) / 2.0;
}

Potential<double> random_potential(UniformSource& rng, Index max_L, std::int64_t max_width, double bound) {
  const Index L = rng.next_int(1, max_L);
  const auto width = rng.next_int(1, max_width);
  std::vector<Potential<double>::Entry> entries;
  for (std::int64_t n = 1; n <= width; ++n) entries.emplace_back(n, random_hermitian(rng, L, bound));
  return Potential<double>(L, 0, width, entries);
}

namespace {

json to_json(Complexd c) { return json{{"re", c.real()}, {"im", c.imag()}}; }

json to_json(const Matrixd& m) {
  json re = json::array();
  json im = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json rr = json::array();
    json ri = json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

json to_json(const Vectord& v) {
  json re = json::array();
  json im = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

json to_json(const WindingResult& w) {
  return json{{"value", to_json(w.value)}, {"rounded", w.rounded()}, {"defect", w.defect()}, {"points", w.points}};
}

json to_json(const std::vector<BoundState>& states) {
  json list = json::array();
  for (const auto& b : states) {
    list.push_back(json{{"z", b.z},
                        {"energy", b.energy},
                        {"multiplicity", b.multiplicity},
                        {"winding_defect", b.winding_defect}});
  }
  return list;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

enum class Format { json, csv };

struct Config {
  std::string potential_path;
  std::string z_text;
  std::string energy_text;
  std::string format_text = "json";
  double k_start = 1e-3;
  double k_end = std::numbers::pi - 1e-3;
  int count = 101;
  std::string edge_text = "+1";
  std::string route_text = "direct";
  double rank_tol = 1e-10;
  double delta = 1e-6;
  int grid_points = 2000;
  double cauchy_radius = 1e-2;
  int cauchy_points = 64;
  bool oracle = false;
  double tol = 1e-6;
  double green_tol = 1e-7;
  std::int64_t half_width = 0;
  std::uint64_t seed = 1;
  int potentials = 6;
  std::vector<std::string> tolerances;
  unsigned threads = 0;
};

Format parse_format(const std::string& text) {
  if (text == "json") return Format::json;
  if (text == "csv") return Format::csv;
  throw InputError("unknown output format \"" + text + "\" (expected json or csv)");
}

Edge parse_edge(const std::string& text) {
  if (text == "+1" || text == "1" || text == "upper") return Edge::upper;
  if (text == "-1" || text == "lower") return Edge::lower;
  throw InputError("unknown band edge \"" + text + "\" (expected +1 or -1)");
}

/// z from exactly one of --z / --energy.
Complexd point_from(const Config& cfg) {
  const bool has_z = !cfg.z_text.empty();
  const bool has_e = !cfg.energy_text.empty();
  if (has_z == has_e) throw InputError("give exactly one of --z and --energy");
  if (has_z) return parse_complex(cfg.z_text);
  return z_from_energy(parse_complex(cfg.energy_text));
}

std::string nearest_bound_state_note(const Potential<double>& p, Complexd z) {
  try {
    const auto states = find_bound_states(p);
    if (states.empty()) return "; the potential has no bound states";
    const BoundState* best = &states.front();
    for (const auto& b : states) {
      if (std::abs(z - b.z) < std::abs(z - best->z)) best = &b;
    }
    return "; nearest bound state E = " + format_double(best->energy) + " at z = " + format_double(best->z) +
           " (multiplicity " + std::to_string(best->multiplicity) + ")";
  } catch (const Error&) {
    return "";
  }
}

void require_json(Format f, const char* command) {
  if (f != Format::json) throw InputError(std::string(command) + " supports only --format json");
}

int cmd_validate(const Config& cfg, std::ostream& out) {
  require_json(parse_format(cfg.format_text), "validate");
  const auto p = load_potential_file(cfg.potential_path);
  json sites = json::array();
  for (const auto& [n, v] : p.entries()) sites.push_back(n);
  json doc{{"valid", true},      {"L", p.channels()},         {"k_minus", p.k_minus()},
           {"k_plus", p.k_plus()}, {"width", p.width()},         {"nonzero_sites", sites},
           {"max_norm", p.max_norm()}, {"is_zero", p.is_zero()}};
  out << doc.dump(2) << '\n';
  return 0;
}

int cmd_smatrix(const Config& cfg, std::ostream& out) {
  const Format format = parse_format(cfg.format_text);
  const auto p = load_potential_file(cfg.potential_path);
  const Complexd z = point_from(cfg);
  require_regular_point(z);
  const auto m = plane_wave_transfer(p, z);
  ScatteringMatrix<double> s;
  try {
    s = scattering_from_transfer(m.value, z);
  } catch (const NotInC0& e) {
    throw NotInC0(e.z(), e.margin(), std::string(e.what()) + nearest_bound_state_note(p, z));
  }
  const auto b = blocks(m);
  const auto ib = inverse_blocks(m.value);
  if (format == Format::csv) {
    write_csv_row(out, {"row", "col", "re", "im"});
    for (Index i = 0; i < s.value.rows(); ++i) {
      for (Index j = 0; j < s.value.cols(); ++j) {
        write_csv_row(out, {std::to_string(i), std::to_string(j), format_double(s.value(i, j).real()),
                            format_double(s.value(i, j).imag())});
      }
    }
    return 0;
  }
  const bool on_circle = std::abs(std::abs(z) - 1) < 1e-12;
  json doc{{"z", to_json(z)},
           {"energy", to_json(z + 1.0 / z)},
           {"L", p.channels()},
           {"S", to_json(s.value)},
           {"T_plus", to_json(Matrixd(s.t_plus()))},
           {"R_minus", to_json(Matrixd(s.r_minus()))},
           {"R_plus", to_json(Matrixd(s.r_plus()))},
           {"T_minus", to_json(Matrixd(s.t_minus()))},
           {"on_unit_circle", on_circle},
           {"unitarity_defect", unitarity_defect(s.value)},
           {"c0_margin",
            json{{"m_plus", relative_smallest_singular_value(ib.m_plus)},
                 {"m_minus", relative_smallest_singular_value(b.m_minus)},
                 {"min", s.c0_margin}}}};
  out << doc.dump(2) << '\n';
  return 0;
}

int cmd_scan(const Config& cfg, std::ostream& out) {
  const Format format = parse_format(cfg.format_text);
  const auto p = load_potential_file(cfg.potential_path);
  if (cfg.count < 2) throw InputError("--count must be at least 2");
  if (!(cfg.k_start < cfg.k_end)) throw InputError("--k-start must be smaller than --k-end");
  if (!(cfg.k_start > 0 && cfg.k_end < std::numbers::pi)) {
    throw DomainError("the k grid must lie inside (0, pi); z = e^{ik} hits a band edge otherwise");
  }
  const Index n = 2 * p.channels();
  const ArcTimeDelay delay(p);
  const auto rows = parallel_map<std::vector<double>>(static_cast<std::size_t>(cfg.count), [&](std::size_t j) {
    const double k = cfg.k_start + (cfg.k_end - cfg.k_start) * double(j) / double(cfg.count - 1);
    const Complexd z = std::polar(1.0, k);
    const auto s = scattering_matrix(p, z);
    std::vector<double> row{k, 2 * std::cos(k)};
    for (Index a = 0; a < n; ++a) {
      for (Index c = 0; c < n; ++c) {
        row.push_back(s.value(a, c).real());
        row.push_back(s.value(a, c).imag());
      }
    }
    row.push_back(delay.k_form(k));
    row.push_back(unitarity_defect(s.value));
    return row;
  });
  std::vector<std::string> header{"k", "E"};
  for (Index a = 0; a < n; ++a) {
    for (Index c = 0; c < n; ++c) {
      header.push_back("S_" + std::to_string(a) + "_" + std::to_string(c) + "_re");
      header.push_back("S_" + std::to_string(a) + "_" + std::to_string(c) + "_im");
    }
  }
  header.push_back("time_delay");
  header.push_back("unitarity_defect");
  if (format == Format::csv) {
    write_csv_row(out, header);
    for (const auto& row : rows) {
      std::vector<std::string> cells;
      for (double x : row) cells.push_back(format_double(x));
      write_csv_row(out, cells);
    }
    return 0;
  }
  json list = json::array();
  for (const auto& row : rows) {
    json r;
    for (std::size_t i = 0; i < header.size(); ++i) r[header[i]] = row[i];
    list.push_back(std::move(r));
  }
  out << json{{"rows", std::move(list)}}.dump(2) << '\n';
  return 0;
}

int cmd_bound_states(const Config& cfg, std::ostream& out) {
  const Format format = parse_format(cfg.format_text);
  const auto p = load_potential_file(cfg.potential_path);
  BoundStateOptions opts;
  opts.delta = cfg.delta;
  opts.grid_points = cfg.grid_points;
  opts.rank_tol = cfg.rank_tol;
  const auto states = find_bound_states(p, opts);
  if (format == Format::csv) {
    write_csv_row(out, {"z", "energy", "multiplicity", "winding_defect"});
    for (const auto& b : states) {
      write_csv_row(out, {format_double(b.z), format_double(b.energy), std::to_string(b.multiplicity),
                          format_double(b.winding_defect)});
    }
    return 0;
  }
  json doc{{"L", p.channels()}, {"bound_states", to_json(states)}, {"J_b", total_multiplicity(states)}};
  if (cfg.oracle) {
    const auto oracle = oracle_bound_state_energies(p);
    json list = json::array();
    for (const auto& e : oracle) {
      list.push_back(
          json{{"energy", e.energy}, {"multiplicity", e.multiplicity}, {"error_estimate", e.error_estimate}});
    }
    bool matches = oracle.size() == states.size();
    double worst = 0;
    for (std::size_t i = 0; matches && i < states.size(); ++i) {
      worst = std::max(worst, std::abs(states[i].energy - oracle[i].energy));
      matches = states[i].multiplicity == oracle[i].multiplicity;
    }
    doc["oracle"] = std::move(list);
    doc["max_energy_difference"] = worst;
    doc["oracle_agrees"] = matches && worst <= 1e-8;
  }
  out << doc.dump(2) << '\n';
  return 0;
}

int cmd_band_edge(const Config& cfg, std::ostream& out) {
  require_json(parse_format(cfg.format_text), "band-edge");
  const auto p = load_potential_file(cfg.potential_path);
  const Edge edge = parse_edge(cfg.edge_text);
  BandEdgeOptions opts;
  opts.rank_tol = cfg.rank_tol;
  opts.cauchy_radius = cfg.cauchy_radius;
  opts.cauchy_points = cfg.cauchy_points;
  if (cfg.route_text == "inversion") {
    opts.route = EdgeRoute::inversion;
  } else if (cfg.route_text != "direct") {
    throw InputError("unknown route \"" + cfg.route_text + "\" (expected direct or inversion)");
  }
  const auto r = band_edge_limit_S(p, edge, opts);
  const auto states = find_bound_states(p);
  const auto pole = det_pole_order_check(p, edge, states);
  const Index L = p.channels();
  json sv = json::array();
  for (Index i = 0; i < r.singular_values.size(); ++i) sv.push_back(r.singular_values(i));
  json profiles = json::array();
  for (const auto& h : r.profiles) {
    json values = json::array();
    for (const auto& v : h.values) values.push_back(to_json(v));
    profiles.push_back(json{{"phi", to_json(h.phi)}, {"first_site", h.first_site}, {"values", std::move(values)}});
  }
  json doc{{"edge", edge_sign(edge)},
           {"L", L},
           {"F", to_json(r.F)},
           {"singular_values", std::move(sv)},
           {"J_h", r.Jh},
           {"rank_ambiguous", r.rank_ambiguous},
           {"alternative_J_h", r.alternative_Jh},
           {"limit_S", to_json(r.limitS)},
           {"T_plus", to_json(Matrixd(r.limitS.topLeftCorner(L, L)))},
           {"R_minus", to_json(Matrixd(r.limitS.topRightCorner(L, L)))},
           {"R_plus", to_json(Matrixd(r.limitS.bottomLeftCorner(L, L)))},
           {"T_minus", to_json(Matrixd(r.limitS.bottomRightCorner(L, L)))},
           {"unitarity_defect", unitarity_defect(r.limitS)},
           {"annihilation_defect", r.annihilation_defect},
           {"det_pole_order", json{{"order", pole.order}, {"expected", L - r.Jh}, {"radius", pole.radius},
                                   {"winding", to_json(pole.winding)}}},
           {"half_bound_profiles", std::move(profiles)}};
  out << doc.dump(2) << '\n';
  return 0;
}

int cmd_levinson(const Config& cfg, std::ostream& out) {
  require_json(parse_format(cfg.format_text), "levinson");
  const auto p = load_potential_file(cfg.potential_path);
  const auto r = levinson_report(p, cfg.tol);
  const long expected = 2L * r.L - (r.Jh_plus + r.Jh_minus) - 2L * r.Jb;
  json doc{{"L", r.L},
           {"J_b", r.Jb},
           {"J_h_plus", r.Jh_plus},
           {"J_h_minus", r.Jh_minus},
           {"bound_states", to_json(r.bound_states)},
           {"band_integral", json{{"value", to_json(r.band.value)}, {"nodes", r.band.nodes}}},
           {"residual", r.residual},
           {"windings", json{{"eps", r.winding.eps},
                             {"inner", to_json(r.winding.inner)},
                             {"outer", to_json(r.winding.outer)},
                             {"negated_sum", r.winding.negated_sum()},
                             {"expected", expected}}},
           {"tol", r.tol},
           {"passed", r.passed()}};
  out << doc.dump(2) << '\n';
  return r.passed() ? 0 : 3;
}

int cmd_green_check(const Config& cfg, std::ostream& out) {
  require_json(parse_format(cfg.format_text), "green-check");
  const auto p = load_potential_file(cfg.potential_path);
  const Complexd z = point_from(cfg);
  if (!(std::abs(z) < 1)) throw DomainError("green-check needs |z| < 1 (an energy off [-2, 2])");
  require_regular_point(z);
  const auto half_width = cfg.half_width > 0 ? cfg.half_width : green_truncation(p, z);
  const Complexd energy = z + 1.0 / z;
  const TruncatedResolvent<double> g(TruncatedOperator<double>(p, half_width), energy);
  const auto direct = scattering_matrix(p, z);
  const auto green = scattering_from_green(p, z, [&](std::int64_t n, std::int64_t m) { return g.block(n, m); });
  const auto ids = green_block_identities(p, z, half_width);
  const double diff = max_abs(Matrixd(direct.value - green.value));
  const bool passed = diff <= cfg.green_tol;
  json doc{{"z", to_json(z)},
           {"energy", to_json(energy)},
           {"half_width", half_width},
           {"S_direct", to_json(direct.value)},
           {"S_green", to_json(green.value)},
           {"max_difference", diff},
           {"m_minus_residual", ids.m_minus_residual},
           {"n_minus_residual", ids.n_minus_residual},
           {"tol", cfg.green_tol},
           {"passed", passed}};
  out << doc.dump(2) << '\n';
  return passed ? 0 : 3;
}

struct Invariant {
  std::string name;
  double tolerance;
  double max_defect = 0;
};

/// Per-potential defects, in the order of the invariant table.
struct PotentialDefects {
  std::vector<double> values;
  std::string error;
};

const std::vector<std::pair<std::string, double>>& invariant_defaults() {
  static const std::vector<std::pair<std::string, double>> table{
      {"unitarity", 1e-10},          {"j_unitarity_scaled", 1e-13},      {"triple_path", 1e-9},
      {"bound_state_energy", 1e-8},  {"bound_state_multiplicity", 0}, {"band_edge_pole_order", 0},
      {"levinson_residual", 1e-6},   {"annular_winding", 0},      {"green_dictionary", 1e-7},
      {"time_delay", 1e-6}};
  return table;
}

PotentialDefects selftest_potential(const Potential<double>& p) {
  PotentialDefects d;
  d.values.assign(invariant_defaults().size(), 0);
  auto bump = [&](std::size_t i, double x) { d.values[i] = std::max(d.values[i], std::isnan(x) ? 1e300 : x); };
  const Index L = p.channels();
  const Matrixd j = pauli_J<double>(L);
  try {
    constexpr int circle_points = 32;
    for (int k = 0; k < circle_points; ++k) {
      const Complexd z = std::polar(1.0, 2 * std::numbers::pi * (k + 0.5) / circle_points);
      const auto m = plane_wave_transfer_product(p, z).value;
      bump(1, max_abs(Matrixd(m.adjoint() * j * m - j)) / std::max(1.0, max_abs(m) * max_abs(m)));
      const auto mc = plane_wave_transfer_conjugation(p, z).value;
      const auto mw = wronskian_block_matrix(p, z, p.k_minus());
      bump(2, std::max({max_abs(Matrixd(m - mc)), max_abs(Matrixd(m - mw)), max_abs(Matrixd(mc - mw))}));
      const auto s = scattering_from_transfer(m, z);
      bump(0, unitarity_defect(s.value));
    }
    constexpr int delay_points = 16;
    for (int k = 0; k < delay_points; ++k) {
      const Complexd z = std::polar(1.0, 2 * std::numbers::pi * (k + 0.5) / delay_points);
      const auto t = time_delay(p, z);
      bump(9, std::abs(t.determinant_form - t.difference_form) / std::max(1.0, std::abs(t.determinant_form)));
    }
    const auto lev = levinson_report(p);
    const auto oracle = oracle_bound_state_energies(p);
    if (oracle.size() != lev.bound_states.size()) {
      bump(4, 1);
    } else {
      for (std::size_t i = 0; i < oracle.size(); ++i) {
        bump(3, std::abs(oracle[i].energy - lev.bound_states[i].energy));
        bump(4, std::abs(double(oracle[i].multiplicity - lev.bound_states[i].multiplicity)));
      }
    }
    for (Edge edge : {Edge::upper, Edge::lower}) {
      const int jh = edge == Edge::upper ? lev.Jh_plus : lev.Jh_minus;
      const auto pole = det_pole_order_check(p, edge, lev.bound_states);
      bump(5, std::abs(double(pole.order - (L - jh))));
    }
    bump(6, std::abs(lev.residual));
    const long expected = 2L * L - (lev.Jh_plus + lev.Jh_minus) - 2L * lev.Jb;
    bump(7, std::abs(double(std::lround(lev.winding.negated_sum()) - expected)));
    for (Complexd z : {Complexd(0.3, 0), Complexd(0.4, 0.2)}) {
      const auto hw = green_truncation(p, z);
      const TruncatedResolvent<double> g(TruncatedOperator<double>(p, hw), z + 1.0 / z);
      const auto direct = scattering_matrix(p, z);
      const auto green = scattering_from_green(p, z, [&](std::int64_t n, std::int64_t m) { return g.block(n, m); });
      bump(8, max_abs(Matrixd(direct.value - green.value)) / std::max(1.0, max_abs(direct.value)));
    }
  } catch (const Error& e) {
    d.error = e.what();
  }
  return d;
}

int cmd_selftest(const Config& cfg, std::ostream& out) {
  const Format format = parse_format(cfg.format_text);
  if (cfg.potentials < 1) throw InputError("--potentials must be at least 1");
  std::vector<Invariant> table;
  for (const auto& [name, tol] : invariant_defaults()) table.push_back({name, tol});
  for (const auto& item : cfg.tolerances) {
    const auto eq = item.find('=');
    double value = 0;
    if (eq == std::string::npos || !parse_real(std::string_view(item).substr(eq + 1), value)) {
      throw InputError("tolerance override must read name=value, got \"" + item + "\"");
    }
    const std::string name = item.substr(0, eq);
    auto it = std::find_if(table.begin(), table.end(), [&](const Invariant& v) { return v.name == name; });
    if (it == table.end()) throw InputError("unknown invariant \"" + name + "\"");
    it->tolerance = value;
  }
  UniformSource rng(cfg.seed);
  std::vector<Potential<double>> suite;
  for (int i = 0; i < cfg.potentials; ++i) suite.push_back(random_potential(rng, 3, 6, 2.0));
  const auto defects = parallel_map<PotentialDefects>(suite.size(), [&](std::size_t i) {
    return selftest_potential(suite[i]);
  });
  std::vector<std::string> errors;
  for (std::size_t i = 0; i < defects.size(); ++i) {
    if (!defects[i].error.empty()) errors.push_back("potential " + std::to_string(i) + ": " + defects[i].error);
    for (std::size_t k = 0; k < table.size(); ++k) {
      table[k].max_defect = std::max(table[k].max_defect, defects[i].values[k]);
    }
  }
  bool passed = errors.empty();
  for (const auto& v : table) passed = passed && v.max_defect <= v.tolerance;
  if (format == Format::csv) {
    write_csv_row(out, {"invariant", "max_defect", "tolerance", "passed"});
    for (const auto& v : table) {
      write_csv_row(out, {v.name, format_double(v.max_defect), format_double(v.tolerance),
                          v.max_defect <= v.tolerance ? "true" : "false"});
    }
    for (const auto& e : errors) write_csv_row(out, {"error", "", "", e});
  } else {
    json list = json::array();
    for (const auto& v : table) {
      list.push_back(json{{"name", v.name},
                          {"max_defect", v.max_defect},
                          {"tolerance", v.tolerance},
                          {"passed", v.max_defect <= v.tolerance}});
    }
    json shapes = json::array();
    for (const auto& p : suite) shapes.push_back(json{{"L", p.channels()}, {"width", p.width()}});
    json doc{{"seed", cfg.seed},     {"potentials", std::move(shapes)}, {"invariants", std::move(list)},
             {"errors", errors},     {"passed", passed}};
    out << doc.dump(2) << '\n';
  }
  return passed ? 0 : 3;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scattering theory for discrete Schroedinger operators with matrix potentials", "qjac"};
  app.require_subcommand(1);
  Config cfg;
  app.add_option("--threads", cfg.threads, "Worker threads for scans (0: hardware concurrency)");

  auto add_potential = [&](CLI::App* sub) {
    sub->add_option("potential", cfg.potential_path, "Potential JSON file")->required();
  };
  auto add_format = [&](CLI::App* sub) { sub->add_option("--format", cfg.format_text, "json or csv"); };
  auto add_point = [&](CLI::App* sub) {
    sub->add_option("--z", cfg.z_text, "Spectral parameter, e.g. 0.4+0.2i");
    sub->add_option("--energy", cfg.energy_text, "Energy; selects the root z with Im z > 0");
  };

  auto* validate = app.add_subcommand("validate", "Check a potential file");
  add_potential(validate);
  add_format(validate);

  auto* smatrix = app.add_subcommand("smatrix", "Scattering matrix at one point");
  add_potential(smatrix);
  add_point(smatrix);
  add_format(smatrix);

  auto* scan = app.add_subcommand("scan", "S, time delay and unitarity defect along the band");
  add_potential(scan);
  scan->add_option("--k-start", cfg.k_start, "First k in (0, pi)");
  scan->add_option("--k-end", cfg.k_end, "Last k in (0, pi)");
  scan->add_option("--count", cfg.count, "Number of grid nodes (>= 2)");
  std::string scan_format = "csv";
  scan->add_option("--format", scan_format, "csv or json");

  auto* bound = app.add_subcommand("bound-states", "Bound states as zeros of det M_-");
  add_potential(bound);
  add_format(bound);
  bound->add_option("--delta", cfg.delta, "Collar excluded at z = +-1");
  bound->add_option("--grid-points", cfg.grid_points, "Coarse grid points per side");
  bound->add_option("--rank-tol", cfg.rank_tol, "Relative singular value threshold");
  bound->add_flag("--oracle", cfg.oracle, "Compare with the truncated lattice");

  auto* edge = app.add_subcommand("band-edge", "Limits of S and half-bound states at z = +-1");
  add_potential(edge);
  add_format(edge);
  edge->add_option("--edge", cfg.edge_text, "+1 or -1");
  edge->add_option("--rank-tol", cfg.rank_tol, "Relative singular value threshold for ker F");
  edge->add_option("--cauchy-radius", cfg.cauchy_radius, "Radius of the averaging circle");
  edge->add_option("--cauchy-points", cfg.cauchy_points, "Nodes on the averaging circle");
  edge->add_option("--route", cfg.route_text, "direct or inversion");

  auto* levinson = app.add_subcommand("levinson", "Levinson identity and annular winding");
  add_potential(levinson);
  add_format(levinson);
  levinson->add_option("--tol", cfg.tol, "Residual tolerance");

  auto* green = app.add_subcommand("green-check", "S from the truncated resolvent against direct S");
  add_potential(green);
  add_point(green);
  add_format(green);
  green->add_option("--half-width", cfg.half_width, "Truncation half-width (0: automatic)");
  green->add_option("--tol", cfg.green_tol, "Tolerance on the difference");

  auto* selftest = app.add_subcommand("selftest", "Invariant suite on seeded random potentials");
  add_format(selftest);
  selftest->add_option("--seed", cfg.seed, "Random seed");
  selftest->add_option("--potentials", cfg.potentials, "Number of random potentials");
  selftest->add_option("--tolerance", cfg.tolerances, "Override as name=value")->allow_extra_args(false);

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    parallel_threads() = cfg.threads;
    if (validate->parsed()) return cmd_validate(cfg, out);
    if (smatrix->parsed()) return cmd_smatrix(cfg, out);
    if (scan->parsed()) {
      cfg.format_text = scan_format;
      return cmd_scan(cfg, out);
    }
    if (bound->parsed()) return cmd_bound_states(cfg, out);
    if (edge->parsed()) return cmd_band_edge(cfg, out);
    if (levinson->parsed()) return cmd_levinson(cfg, out);
    if (green->parsed()) return cmd_green_check(cfg, out);
    if (selftest->parsed()) return cmd_selftest(cfg, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 1;
}

}  // namespace qjac
