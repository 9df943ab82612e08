#pragma once

// JSON system and map files.
//
// System file keys: dimension, coordinates, box ([lo, hi] per coordinate),
// guard (predicate string), poisson {type, ...}, functions {name: expr},
// system {kind, generators, invariants_pool, coinduced_casimirs}.
// Map file keys: target_coordinates, forward, inverse, target_box,
// sample_guard (predicate in source coordinates).

#include "poissonkit/integrability.hpp"
#include "poissonkit/transform.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace poissonkit {

using Json = nlohmann::ordered_json;

struct SystemSpec {
  GeneratingSet system;
  /// Every named function of the file, in file order.
  std::vector<NamedExpression> functions;

  /// Throws ArgumentError for an unknown name.
  const Expression& function(const std::string& name) const;
};

/// Throws ArgumentError (schema), SyntaxError or UnknownIdentifier.
SystemSpec load_system(const Json& doc);
SystemSpec load_system_file(const std::string& path);

/// Poisson structure part only; used for files without a `system` block.
PoissonStructure load_structure(const Json& doc);

/// Serialises a generating set; round-trips through load_system. Throws
/// VariantError for structures with no expression form (products with a
/// symplectic-inverse factor).
Json export_system(const GeneratingSet& g);
/// A structure-only file with the given functions (may be empty).
Json export_structure(const PoissonStructure& w, const std::vector<NamedExpression>& functions = {});

struct MapSpec {
  ChartMap map;
  std::optional<Predicate> sample_guard;
};

MapSpec load_map(const Json& doc, const Chart& source);
MapSpec load_map_file(const std::string& path, const Chart& source);
Json export_map(const ChartMap& map, const std::optional<Predicate>& sample_guard = std::nullopt);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& doc);

}  // namespace poissonkit
