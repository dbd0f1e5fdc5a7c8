#include "qjac/potential_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qjac {

namespace {

using nlohmann::json;

Eigen::MatrixXd read_real_block(const json& rows, Index L, const std::string& what) {
  if (!rows.is_array() || rows.size() != static_cast<std::size_t>(L)) {
    throw InputError(what + " must be an array of " + std::to_string(L) + " rows");
  }
  Eigen::MatrixXd out(L, L);
  for (Index i = 0; i < L; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(L)) {
      throw InputError(what + " row " + std::to_string(i) + " must have " + std::to_string(L) + " entries");
    }
    for (Index j = 0; j < L; ++j) {
      const auto& x = row[static_cast<std::size_t>(j)];
      if (!x.is_number()) throw InputError(what + " entries must be numbers");
      out(i, j) = x.get<double>();
    }
  }
  return out;
}

std::int64_t read_int(const json& doc, const char* key) {
  if (!doc.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
  const auto& v = doc.at(key);
  if (!v.is_number_integer()) throw InputError(std::string("field \"") + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace

Potential<double> load_potential(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed potential document: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("potential document must be a JSON object");

  const auto L = read_int(doc, "L");
  if (L < 1) throw InputError("L must be at least 1");
  const auto k_minus = read_int(doc, "k_minus");
  const auto k_plus = read_int(doc, "k_plus");

  if (!doc.contains("entries")) throw InputError("missing \"entries\"");
  const auto& list = doc.at("entries");
  if (!list.is_array()) throw InputError("\"entries\" must be an array");
  std::vector<Potential<double>::Entry> entries;
  for (const auto& e : list) {
    if (!e.is_object()) throw InputError("each entry must be an object");
    const auto n = read_int(e, "n");
    const std::string where = "entry n=" + std::to_string(n);
    if (!e.contains("re")) throw InputError(where + " is missing \"re\"");
    Eigen::MatrixXd re = read_real_block(e.at("re"), L, where + " \"re\"");
    Eigen::MatrixXd im = Eigen::MatrixXd::Zero(L, L);
    if (e.contains("im")) im = read_real_block(e.at("im"), L, where + " \"im\"");
    Matrixd v(L, L);
    v.real() = re;
    v.imag() = im;
    entries.emplace_back(n, std::move(v));
  }
  return Potential<double>(L, k_minus, k_plus, entries);
}

Potential<double> load_potential_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open potential file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_potential(buf.str());
}

std::string dump_potential(const Potential<double>& potential) {
  json doc;
  doc["L"] = potential.channels();
  doc["k_minus"] = potential.k_minus();
  doc["k_plus"] = potential.k_plus();
  json entries = json::array();
  for (const auto& [n, v] : potential.entries()) {
    json re = json::array();
    json im = json::array();
    for (Index i = 0; i < v.rows(); ++i) {
      json rr = json::array();
      json ri = json::array();
      for (Index j = 0; j < v.cols(); ++j) {
        rr.push_back(v(i, j).real());
        ri.push_back(v(i, j).imag());
      }
      re.push_back(rr);
      im.push_back(ri);
    }
    entries.push_back({{"n", n}, {"re", re}, {"im", im}});
  }
  doc["entries"] = entries;
  return doc.dump(2);
}

}  // namespace qjac
