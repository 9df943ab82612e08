#include "poissonkit/catalog.hpp"
#include "poissonkit/errors.hpp"
#include "poissonkit/sampling.hpp"
#include "poissonkit/spec_io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace poissonkit;

namespace {

Json canonical_r4(const Json& functions, const Json& system) {
  Json doc = Json::parse(R"({
    "dimension": 4,
    "coordinates": ["q1", "q2", "p1", "p2"],
    "box": [[-2, 2], [-2, 2], [-2, 2], [-2, 2]],
    "poisson": {"type": "canonical", "pairs": 2, "extra": 0}
  })");
  doc["functions"] = functions;
  doc["system"] = system;
  return doc;
}

Json r3(const Json& poisson) {
  Json doc = Json::parse(R"({"dimension": 3, "coordinates": ["x", "y", "z"], "box": [[-1, 1], [-1, 1], [-1, 1]]})");
  doc["poisson"] = poisson;
  return doc;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("poissonkit_spec_io_" + name);
}

}  // namespace

TEST_CASE("loading a hand-written system") {
  const SystemSpec s = load_system(canonical_r4(
      Json::parse(R"({"I1": "(q1^2+p1^2)/2", "I2": "(q2^2+p2^2)/2", "H": "q1"})"),
      Json::parse(R"({"kind": "completely_integrable", "generators": ["I1", "I2"], "invariants_pool": ["H"]})")));
  CHECK(s.functions.size() == 3);
  CHECK(s.system.size() == 2);
  CHECK(s.system.functions[1].name == "I2");
  CHECK(s.system.invariants_pool.size() == 1);
  CHECK(s.system.declared_kind == SystemKind::CompletelyIntegrable);
  CHECK(eval(s.function("H"), Eigen::Vector4d(0.5, 0, 0, 0)) == 0.5);
  CHECK_THROWS_AS(s.function("G"), ArgumentError);
  CHECK(bracket(s.system.ambient, parse("p1", s.system.ambient.chart().names()),
                parse("q1", s.system.ambient.chart().names()), Eigen::Vector4d::Zero()) == 1.0);
}

TEST_CASE("canonical coordinate orders") {
  Json doc = r3(Json::parse(R"({"type": "canonical", "pairs": 1, "extra": 1, "order": "zqp"})"));
  PoissonStructure w = load_structure(doc);
  // Slots (q, p, z) sit at chart indices (1, 2, 0).
  CHECK(bivector_matrix(w, Eigen::Vector3d::Zero())(2, 1) == 1.0);
  doc["poisson"]["order"] = "pqz";
  CHECK_THROWS_AS(load_structure(doc), ArgumentError);
  doc["poisson"].erase("order");
  doc["poisson"]["permutation"] = {2, 0, 1};
  w = load_structure(doc);
  CHECK(bivector_matrix(w, Eigen::Vector3d::Zero())(0, 2) == 1.0);
}

TEST_CASE("matrix entries use 0-based keys and reversed keys flip sign") {
  const PoissonStructure a = load_structure(r3(Json::parse(R"({"type": "matrix", "upper_entries": {"0,1": "z"}})")));
  const PoissonStructure b = load_structure(r3(Json::parse(R"({"type": "matrix", "upper_entries": {"1,0": "z"}})")));
  const Eigen::Vector3d p(0.1, 0.2, 0.7);
  CHECK(bivector_matrix(a, p)(0, 1) == 0.7);
  CHECK(bivector_matrix(b, p)(0, 1) == -0.7);
  CHECK_THROWS_AS(load_structure(r3(Json::parse(R"({"type": "matrix", "upper_entries": {"0,0": "z"}})"))),
                  ArgumentError);
  CHECK_THROWS_AS(load_structure(r3(Json::parse(R"({"type": "matrix", "upper_entries": {"0;1": "z"}})"))),
                  ArgumentError);
  CHECK_THROWS_AS(load_structure(r3(Json::parse(R"({"type": "matrix", "upper_entries": {"0,5": "z"}})"))),
                  ArgumentError);
  CHECK_THROWS_AS(load_structure(r3(Json::parse(R"({"type": "matrix", "upper_entries": {"0,1": "w"}})"))),
                  UnknownIdentifier);
  CHECK_THROWS_AS(load_structure(r3(Json::parse(R"({"type": "matrix", "upper_entries": {"0,1": "z +"}})"))),
                  SyntaxError);
}

TEST_CASE("Lie-Poisson and symplectic-inverse files") {
  const Json so3 = Json::parse(R"({"type": "lie_poisson", "structure_constants":
      [[[0,0,0],[0,0,1],[0,-1,0]], [[0,0,-1],[0,0,0],[1,0,0]], [[0,1,0],[-1,0,0],[0,0,0]]]})");
  const PoissonStructure w = load_structure(r3(so3));
  CHECK(bivector_matrix(w, Eigen::Vector3d(0, 0, 1))(0, 1) == 1.0);
  // [e1, e2] = e3, [e1, e3] = e1 violates Jacobi.
  const Json bad = Json::parse(R"({"type": "lie_poisson", "structure_constants":
      [[[0,0,1],[0,0,0],[-1,0,0]], [[0,0,0],[0,0,0],[0,0,0]], [[0,1,0],[-1,0,0],[0,0,0]]]})");
  CHECK_THROWS_AS(load_structure(r3(bad)), InvalidConstants);

  Json doc = Json::parse(R"({"dimension": 2, "coordinates": ["q", "p"], "box": [[-1, 1], [-1, 1]],
      "poisson": {"type": "symplectic_inverse", "form_upper_entries": {"0,1": "-1"}}})");
  CHECK(bivector_matrix(load_structure(doc), Eigen::Vector2d::Zero())(1, 0) == 1.0);
}

TEST_CASE("schema errors") {
  Json doc = canonical_r4(Json::parse(R"({"I1": "q1"})"), Json::parse(R"({"generators": ["I1"]})"));
  CHECK_NOTHROW(load_system(doc));
  Json bad = doc;
  bad.erase("coordinates");
  CHECK_THROWS_AS(load_system(bad), ArgumentError);
  bad = doc;
  bad["dimension"] = 3;
  CHECK_THROWS_AS(load_system(bad), ArgumentError);
  bad = doc;
  bad["box"][0] = {1, -1};
  CHECK_THROWS_AS(load_system(bad), ArgumentError);
  bad = doc;
  bad["poisson"]["type"] = "quantum";
  CHECK_THROWS_AS(load_system(bad), ArgumentError);
  bad = doc;
  bad["system"]["generators"] = {"I9"};
  CHECK_THROWS_AS(load_system(bad), ArgumentError);
  bad = doc;
  bad["system"]["kind"] = "sort_of_integrable";
  CHECK_THROWS_AS(load_system(bad), ArgumentError);
  bad = doc;
  bad["dimension"] = "four";
  CHECK_THROWS_AS(load_system(bad), ArgumentError);
  bad = doc;
  bad["coordinates"][1] = "q1";
  CHECK_THROWS_AS(load_system(bad), ArgumentError);
}

TEST_CASE("catalog entries round-trip through files") {
  for (const auto& e : catalog()) {
    const Json doc = export_system(e.system);
    const SystemSpec loaded = load_system(Json::parse(doc.dump()));
    CHECK_MESSAGE(export_system(loaded.system) == doc, e.name);
    const ClassificationReport r = classify(loaded.system);
    for (const auto& [kind, status] : e.expected)
      CHECK_MESSAGE(r.verdicts.at(kind).status == status, e.name, " ", to_string(kind));
    for (const auto& z : sample_points(e.system.ambient.chart(), 10, 5, e.system.guard))
      CHECK((bivector_matrix(loaded.system.ambient, z) - bivector_matrix(e.system.ambient, z)).isZero(0.0));
  }
}

TEST_CASE("structure-only export") {
  const PoissonStructure w = corrupted_structure();
  const Json doc = export_structure(w);
  CHECK_FALSE(doc.contains("system"));
  const PoissonStructure back = load_structure(doc);
  CHECK(jacobi_residual(back, Eigen::Vector3d(0.5, 0.1, 0.2)) == doctest::Approx(0.5));
}

TEST_CASE("structures without an expression form are rejected on export") {
  const Chart c = Chart::uniform({"q", "p"}, -1, 1);
  const PoissonStructure s = PoissonStructure::symplectic_inverse(c, {{0, 1, parse("-1", c.names())}});
  const PoissonStructure prod = product(s, PoissonStructure::zero(Chart::uniform({"y"}, -1, 1)));
  CHECK_THROWS_AS(export_structure(prod), VariantError);
  GeneratingSet g = catalog_entry("oscillator2").system;
  g.guard = parse_predicate("q1 > 0", g.ambient.chart().names());
  CHECK_THROWS_AS(export_system(g), VariantError);
}

TEST_CASE("map files") {
  const CatalogEntry& e = catalog_entry("oscillator2");
  const ReferenceMap& m = e.maps.front();
  const Json doc = export_map(m.map, m.sample_guard);
  const MapSpec back = load_map(Json::parse(doc.dump()), e.system.ambient.chart());
  CHECK(export_map(back.map, back.sample_guard) == doc);
  REQUIRE(back.sample_guard.has_value());
  const auto pts = sample_points(e.system.ambient.chart(), 20, 1, back.sample_guard);
  for (const auto& z : pts) CHECK((back.map.apply(z) - m.map.apply(z)).norm() == 0.0);
  CHECK(back.map.roundtrip_residual(pts) <= 1e-10);

  Json bad = doc;
  bad["forward"].erase(0);
  CHECK_THROWS_AS(load_map(bad, e.system.ambient.chart()), ArgumentError);
}

TEST_CASE("file helpers") {
  const auto path = temp_path("doc.json");
  write_json_file(path.string(), Json::parse(R"({"a": [1, 2]})"));
  CHECK(read_json_file(path.string())["a"][1] == 2);
  {
    std::ofstream out(path);
    out << "{\"a\": [1, 2";
  }
  CHECK_THROWS_AS(read_json_file(path.string()), ArgumentError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_json_file(path.string()), ArgumentError);
  CHECK_THROWS_AS(load_system_file(path.string()), ArgumentError);
}
