#include "poissonkit/catalog.hpp"

#include "poissonkit/errors.hpp"
#include "poissonkit/liealg.hpp"

namespace poissonkit {

namespace {

using Names = std::vector<std::string>;

NamedExpression named(const std::string& name, const std::string& text, const Names& coords) {
  return {name, parse(text, coords)};
}

const Names kCanonical4 = {"q1", "q2", "p1", "p2"};

const std::string kRadius = "sqrt(q1^2 + q2^2)";
const std::string kEnergy = "((p1^2 + p2^2)/2 - 1/" + kRadius + ")";
// Textbook angular momentum q1 p2 - q2 p1; the generator M12 is its negative.
const std::string kL = "(q1*p2 - q2*p1)";
const std::string kA1 = "(p2*" + kL + " - q1/" + kRadius + ")";
const std::string kA2 = "(-p1*" + kL + " - q2/" + kRadius + ")";

Chart kepler_chart(bool negative) {
  std::vector<Interval> box = {{-2, 2}, {-2, 2}, {-1.5, 1.5}, {-1.5, 1.5}};
  // The energy margin keeps the 1/sqrt(2|H|) normalisation away from its pole.
  const std::string guard = kEnergy + (negative ? " < -0.01" : " > 0.01") + " and " + kRadius + " > 0.05";
  return Chart(kCanonical4, box, parse_predicate(guard, kCanonical4));
}

GeneratingSet kepler_set(bool negative) {
  const Chart chart = kepler_chart(negative);
  const std::string norm = negative ? "sqrt(-2*" + kEnergy + ")" : "sqrt(2*" + kEnergy + ")";
  const NamedExpression m12 = named("M12", "q2*p1 - q1*p2", kCanonical4);
  const NamedExpression k1 = named("K1", kA1 + "/" + norm, kCanonical4);
  const NamedExpression k2 = named("K2", kA2 + "/" + norm, kCanonical4);
  GeneratingSet g{PoissonStructure::canonical(chart, 2, 0), {}, std::nullopt, SystemKind::LieAlgebraSuperintegrable,
                  {named("H", kEnergy, kCanonical4)}, {}};
  if (negative) {
    g.functions = {m12, k1, k2};
    g.coinduced_casimirs = {parse("x1^2 + x2^2 + x3^2", {"x1", "x2", "x3"})};
  } else {
    g.functions = {k1, k2, m12};
    g.coinduced_casimirs = {parse("x1^2 + x2^2 - x3^2", {"x1", "x2", "x3"})};
  }
  return g;
}

CatalogEntry oscillator2() {
  const Chart chart = Chart::uniform(kCanonical4, -2, 2);
  GeneratingSet g{PoissonStructure::canonical(chart, 2, 0),
                  {named("I1", "(q1^2 + p1^2)/2", kCanonical4), named("I2", "(q2^2 + p2^2)/2", kCanonical4)},
                  std::nullopt,
                  SystemKind::CompletelyIntegrable,
                  {},
                  {}};
  const Names target = {"I1", "I2", "phi1", "phi2"};
  ChartMap polar(chart, Chart::uniform(target, -10, 10),
                 {parse("(q1^2 + p1^2)/2", kCanonical4), parse("(q2^2 + p2^2)/2", kCanonical4),
                  parse("atan2(-p1, q1)", kCanonical4), parse("atan2(-p2, q2)", kCanonical4)},
                 std::vector<Expression>{parse("sqrt(2*I1)*cos(phi1)", target), parse("sqrt(2*I2)*cos(phi2)", target),
                                         parse("-sqrt(2*I1)*sin(phi1)", target),
                                         parse("-sqrt(2*I2)*sin(phi2)", target)});
  CatalogEntry e;
  e.name = "oscillator2";
  e.system = std::move(g);
  e.maps.push_back({"polar", std::move(polar), {{0, 1}, {2, 3}, {}, BlockPattern::SymplecticAA},
                    parse_predicate("q1^2 + p1^2 > 0.01 and q2^2 + p2^2 > 0.01", kCanonical4)});
  e.expected = {{SystemKind::CompletelyIntegrable, VerdictStatus::Pass}};
  e.expected_ambient_rank = 4;
  e.notes = "Two uncoupled harmonic oscillators with their actions; polar action-angle map phi = atan2(-p, q).";
  return e;
}

CatalogEntry kepler(bool negative) {
  CatalogEntry e;
  e.name = negative ? "kepler2_neg" : "kepler2_pos";
  e.system = kepler_set(negative);
  e.expected = {{SystemKind::Superintegrable, VerdictStatus::Pass},
                {SystemKind::LieAlgebraSuperintegrable, VerdictStatus::Pass}};
  e.expected_corank = 1;
  e.expected_ambient_rank = 4;
  e.expected_algebra = negative ? so3() : so21();
  e.notes = negative ? "Planar Kepler problem on H < -0.01, r > 0.05: (M12, K1, K2) with K = A/sqrt(-2H) span so(3)."
                     : "Planar Kepler problem on H > 0.01, r > 0.05: (K1, K2, M12) with K = A/sqrt(2H) span so(2,1).";
  e.notes += " Box q in [-2,2]^2, p in [-1.5,1.5]^2, energy margin |H| > 0.01. Derivation: docs/derive_kepler.py.";
  return e;
}

CatalogEntry so3_rigid() {
  const Names z = {"z1", "z2", "z3"};
  CatalogEntry e;
  e.name = "so3_rigid";
  e.system = GeneratingSet{lie_poisson(so3()),
                           {named("H", "z1^2/2 + z2^2/4 + z3^2/6", z)},
                           std::nullopt,
                           SystemKind::CommutativePartiallyIntegrable,
                           {named("C", "z1^2 + z2^2 + z3^2", z)},
                           {}};
  e.expected = {{SystemKind::CommutativePartiallyIntegrable, VerdictStatus::Pass}};
  e.expected_ambient_rank = 2;
  e.notes = "Free rigid body on so(3)* with inertia (1, 2, 3); Casimir C = |z|^2.";
  return e;
}

CatalogEntry kepler_x6_product() {
  const GeneratingSet base = kepler_set(true);
  const PoissonStructure ambient =
      product(base.ambient, PoissonStructure::zero(Chart::uniform({"y1", "y2"}, -1, 1)));
  const std::size_t dim = ambient.dimension();
  GeneratingSet g{ambient, {}, std::nullopt, SystemKind::PartiallySuperintegrable, {}, {}};
  for (const auto& f : base.functions) g.functions.push_back({f.name, embed(f.expr, dim)});
  g.invariants_pool = {{"H", embed(base.invariants_pool.front().expr, dim)},
                       {"y1", Expression::coordinate(4, dim)},
                       {"y2", Expression::coordinate(5, dim)}};
  CatalogEntry e;
  e.name = "kepler_x6_product";
  e.system = std::move(g);
  e.expected = {{SystemKind::PartiallySuperintegrable, VerdictStatus::Pass}};
  e.expected_corank = 1;
  e.expected_ambient_rank = 4;
  e.expected_algebra = so3();
  e.notes = "kepler2_neg generators on the product with the zero structure on R^2 (y1, y2); rank 4 = k + m = 3 + 1.";
  return e;
}

PoissonStructure bi20_structure(const Chart& chart, const std::string& tphi) {
  const Names& n = chart.names();
  return PoissonStructure::matrix(chart, {{1, 3, Expression::constant(1.0, 5)},
                                          {2, 4, Expression::constant(1.0, 5)},
                                          {3, 4, parse(tphi, n)}});
}

CatalogEntry bi20_model() {
  const Chart chart = Chart::uniform({"x", "J1", "J2", "t", "phi"}, -1, 1);
  const Names& n = chart.names();
  CatalogEntry e;
  e.name = "bi20_model";
  e.system = GeneratingSet{bi20_structure(chart, "x"),
                           {named("J1", "J1", n), named("J2", "J2", n)},
                           std::nullopt,
                           SystemKind::CommutativePartiallyIntegrable,
                           {},
                           {}};
  e.companion = bi20_structure(chart, "1 + x^2");
  e.expected = {{SystemKind::CommutativePartiallyIntegrable, VerdictStatus::Pass}};
  e.expected_ambient_rank = 4;
  e.notes = "Bi-Poisson pair w = dJ1^dt + dJ2^dphi + x dt^dphi, w' = same with (1 + x^2) dt^dphi; "
            "common rank-4 characteristic distribution, x is a Casimir of both.";
  return e;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> v;
    v.push_back(oscillator2());
    v.push_back(kepler(true));
    v.push_back(kepler(false));
    v.push_back(so3_rigid());
    v.push_back(kepler_x6_product());
    v.push_back(bi20_model());
    return v;
  }();
  return entries;
}

const CatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return e;
  throw ArgumentError("no catalog entry named '" + name + "'");
}

PoissonStructure corrupted_structure() {
  const Chart chart = Chart::uniform({"x1", "x2", "x3"}, -2, 2);
  return PoissonStructure::matrix(chart, {{0, 1, Expression::coordinate(2, 3)},
                                          {0, 2, Expression::coordinate(2, 3)},
                                          {1, 2, Expression::coordinate(0, 3)}});
}

}  // namespace poissonkit
