#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "stabcert/domain.hpp"
#include "stabcert/geometry.hpp"
#include "stabcert/operators.hpp"

namespace stabcert {

using Json = nlohmann::json;

// Domain header {dim, half_width, points_per_axis, periodic}.
Json to_json(const GridDomain& d);
GridDomain domain_from_json(const Json& j);

// {"domain": header, "values": [...]} in row-major cell order.
Json to_json(const GridFunction& f);
GridFunction grid_function_from_json(const Json& j);

// Flat binary record: "STGF" magic, header, cell count, little-endian doubles.
void write_binary(std::ostream& out, const GridFunction& f);
GridFunction read_grid_function_binary(std::istream& in);

// {"domain": header, "rle": [run, run, ...]} with runs alternating between
// absent and present cells, starting with absent.
Json to_json(const SetIndicator& e);
SetIndicator set_from_json(const Json& j);

Json to_json(const OperatorSpec& spec);
OperatorSpec operator_from_json(const Json& j, const GridDomain& domain);

// Hex SHA-256 of a canonical JSON dump.
std::string content_hash(const Json& j);
std::string content_hash(const OperatorSpec& spec, const GridDomain& domain);

// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace stabcert
