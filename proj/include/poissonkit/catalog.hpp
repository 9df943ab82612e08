#pragma once

// Built-in example systems with their expected verdicts.

#include "poissonkit/integrability.hpp"
#include "poissonkit/transform.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace poissonkit {

struct ReferenceMap {
  std::string name;
  ChartMap map;
  CanonicalFormSpec spec;
  /// Where the map is checked (e.g. away from the polar singularity).
  std::optional<Predicate> sample_guard;
};

struct CatalogEntry {
  std::string name;
  GeneratingSet system;
  std::vector<ReferenceMap> maps;
  std::map<SystemKind, VerdictStatus> expected;
  std::optional<int> expected_corank;
  std::optional<int> expected_ambient_rank;
  /// Algebra the fitted constants should reproduce.
  std::optional<StructureConstants> expected_algebra;
  /// Second structure on the same chart, paired with the ambient one by a
  /// recursion operator.
  std::optional<PoissonStructure> companion;
  std::string notes;
};

const std::vector<CatalogEntry>& catalog();
/// Throws ArgumentError for an unknown name.
const CatalogEntry& catalog_entry(const std::string& name);

/// Antisymmetric field on R^3 with w^{12} = x3, w^{13} = x3, w^{23} = x1,
/// box [-2, 2]^3. Its Jacobi residual is |x1|, so it fails off the plane
/// x1 = 0.
PoissonStructure corrupted_structure();

}  // namespace poissonkit
