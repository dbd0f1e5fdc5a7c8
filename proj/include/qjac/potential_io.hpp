#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "qjac/potential.hpp"

namespace qjac {

/// Parses the potential JSON document
/// {"L", "k_minus", "k_plus", "entries": [{"n", "re", "im"?}]}.
/// Throws InputError on malformed or invalid input.
Potential<double> load_potential(std::string_view document);

Potential<double> load_potential_file(const std::filesystem::path& path);

/// Serializes to the same schema; entries at zero sites are omitted.
std::string dump_potential(const Potential<double>& potential);

}  // namespace qjac
