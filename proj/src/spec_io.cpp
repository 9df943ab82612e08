#include "poissonkit/spec_io.hpp"

#include "poissonkit/errors.hpp"
#include "poissonkit/liealg.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace poissonkit {

namespace {

const Json& require(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw ArgumentError(std::string("missing key '") + key + "'");
  return doc.at(key);
}

template <typename T>
T get_as(const Json& v, const std::string& what) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ArgumentError("'" + what + "' has the wrong type");
  }
}

std::vector<AntisymmetricField::Entry> load_entries(const Json& obj, const std::vector<std::string>& coords,
                                                    const std::string& what) {
  if (!obj.is_object()) throw ArgumentError("'" + what + "' must be an object");
  std::vector<AntisymmetricField::Entry> out;
  for (const auto& [key, value] : obj.items()) {
    std::size_t row = 0, col = 0;
    char comma = 0;
    std::istringstream is(key);
    if (!(is >> row >> comma >> col) || comma != ',' || !is.eof())
      throw ArgumentError("entry key '" + key + "' in '" + what + "' must read \"i,j\"");
    if (row >= coords.size() || col >= coords.size() || row == col)
      throw ArgumentError("entry key '" + key + "' in '" + what + "' is out of range");
    Expression e = parse(get_as<std::string>(value, what + "." + key), coords);
    if (row > col) {
      std::swap(row, col);
      e = -e;
    }
    out.push_back({row, col, e});
  }
  return out;
}

Json entries_json(const std::vector<AntisymmetricField::Entry>& entries, const std::vector<std::string>& coords) {
  Json out = Json::object();
  for (const auto& e : entries) out[std::to_string(e.row) + "," + std::to_string(e.col)] = print(e.value, coords);
  return out;
}

Chart load_chart(const Json& doc) {
  const auto dim = get_as<std::size_t>(require(doc, "dimension"), "dimension");
  const auto coords = get_as<std::vector<std::string>>(require(doc, "coordinates"), "coordinates");
  if (coords.size() != dim) throw ArgumentError("'coordinates' must list 'dimension' names");
  const Json& box = require(doc, "box");
  if (!box.is_array() || box.size() != dim) throw ArgumentError("'box' needs one [lo, hi] pair per coordinate");
  std::vector<Interval> intervals;
  for (const auto& iv : box) {
    const auto pair = get_as<std::vector<double>>(iv, "box");
    if (pair.size() != 2) throw ArgumentError("'box' entries must be [lo, hi]");
    intervals.push_back({pair[0], pair[1]});
  }
  std::optional<Predicate> guard;
  if (doc.contains("guard") && !doc.at("guard").is_null())
    guard = parse_predicate(get_as<std::string>(doc.at("guard"), "guard"), coords);
  return Chart(coords, intervals, guard);
}

Json chart_json(const Chart& chart) {
  Json doc;
  doc["dimension"] = chart.dimension();
  doc["coordinates"] = chart.names();
  Json box = Json::array();
  for (const auto& iv : chart.box()) box.push_back({iv.lo, iv.hi});
  doc["box"] = box;
  if (chart.guard()) doc["guard"] = print(*chart.guard(), chart.names());
  return doc;
}

// Upper entries of any structure with an expression form.
std::vector<AntisymmetricField::Entry> expression_entries(const PoissonStructure& w) {
  const std::size_t dim = w.dimension();
  return std::visit(
      [&](const auto& v) -> std::vector<AntisymmetricField::Entry> {
        using V = std::decay_t<decltype(v)>;
        std::vector<AntisymmetricField::Entry> out;
        if constexpr (std::is_same_v<V, CanonicalVariant>) {
          for (std::size_t i = 0; i < v.pairs; ++i) {
            std::size_t q = v.slot_to_coordinate[i], p = v.slot_to_coordinate[v.pairs + i];
            // w^{qp} = -1, i.e. {p, q} = 1.
            const double value = q < p ? -1.0 : 1.0;
            out.push_back({std::min(q, p), std::max(q, p), Expression::constant(value, dim)});
          }
        } else if constexpr (std::is_same_v<V, MatrixVariant>) {
          out = v.entries.entries();
        } else if constexpr (std::is_same_v<V, LiePoissonVariant>) {
          const std::size_t k = v.constants.dimension();
          for (std::size_t m = 0; m < k; ++m)
            for (std::size_t n = m + 1; n < k; ++n) {
              std::optional<Expression> sum;
              for (std::size_t h = 0; h < k; ++h) {
                const double c = v.constants(h, m, n);
                if (c == 0.0) continue;
                const Expression term = c * Expression::coordinate(h, dim);
                sum = sum ? *sum + term : term;
              }
              if (sum) out.push_back({m, n, *sum});
            }
        } else if constexpr (std::is_same_v<V, SymplecticInverseVariant>) {
          throw VariantError("a symplectic-inverse factor has no expression form for export");
        } else {
          const std::size_t d1 = v.first->dimension();
          for (const auto& e : expression_entries(*v.first)) out.push_back({e.row, e.col, embed(e.value, dim, 0)});
          for (const auto& e : expression_entries(*v.second))
            out.push_back({e.row + d1, e.col + d1, embed(e.value, dim, d1)});
        }
        return out;
      },
      w.variant());
}

bool is_zero_matrix(const PoissonStructure& w) {
  const auto* m = std::get_if<MatrixVariant>(&w.variant());
  return m && m->entries.entries().empty();
}

Json poisson_json(const PoissonStructure& w) {
  const auto& names = w.chart().names();
  Json p;
  if (const auto* c = std::get_if<CanonicalVariant>(&w.variant())) {
    p["type"] = "canonical";
    p["pairs"] = c->pairs;
    p["extra"] = c->extra;
    p["permutation"] = c->slot_to_coordinate;
  } else if (const auto* l = std::get_if<LiePoissonVariant>(&w.variant())) {
    p["type"] = "lie_poisson";
    p["structure_constants"] = l->constants.nested();
  } else if (const auto* s = std::get_if<SymplecticInverseVariant>(&w.variant())) {
    p["type"] = "symplectic_inverse";
    p["form_upper_entries"] = entries_json(s->form.entries(), names);
  } else if (const auto* pr = std::get_if<ProductVariant>(&w.variant());
             pr && std::holds_alternative<CanonicalVariant>(pr->first->variant()) && is_zero_matrix(*pr->second)) {
    const auto& c = std::get<CanonicalVariant>(pr->first->variant());
    std::vector<std::size_t> perm = c.slot_to_coordinate;
    for (std::size_t i = 0; i < pr->second->dimension(); ++i) perm.push_back(pr->first->dimension() + i);
    p["type"] = "canonical";
    p["pairs"] = c.pairs;
    p["extra"] = c.extra + pr->second->dimension();
    p["permutation"] = perm;
  } else {
    p["type"] = "matrix";
    p["upper_entries"] = entries_json(expression_entries(w), names);
  }
  return p;
}

}  // namespace

const Expression& SystemSpec::function(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return f.expr;
  throw ArgumentError("no function named '" + name + "'");
}

PoissonStructure load_structure(const Json& doc) {
  const Chart chart = load_chart(doc);
  const auto& coords = chart.names();
  const Json& p = require(doc, "poisson");
  const auto type = get_as<std::string>(require(p, "type"), "poisson.type");
  if (type == "canonical") {
    const auto pairs = get_as<std::size_t>(require(p, "pairs"), "poisson.pairs");
    const std::size_t extra = p.contains("extra") ? get_as<std::size_t>(p.at("extra"), "poisson.extra") : 0;
    std::vector<std::size_t> perm;
    if (p.contains("permutation")) {
      perm = get_as<std::vector<std::size_t>>(p.at("permutation"), "poisson.permutation");
    } else if (p.contains("order")) {
      const auto order = get_as<std::string>(p.at("order"), "poisson.order");
      if (order == "zqp") {
        for (std::size_t i = 0; i < 2 * pairs; ++i) perm.push_back(extra + i);
        for (std::size_t i = 0; i < extra; ++i) perm.push_back(i);
      } else if (order != "qpz") {
        throw ArgumentError("poisson.order must be \"qpz\" or \"zqp\"");
      }
    }
    return PoissonStructure::canonical(chart, pairs, extra, perm);
  }
  if (type == "matrix")
    return PoissonStructure::matrix(chart, load_entries(require(p, "upper_entries"), coords, "upper_entries"));
  if (type == "lie_poisson") {
    const auto nested =
        get_as<std::vector<std::vector<std::vector<double>>>>(require(p, "structure_constants"), "structure_constants");
    return lie_poisson(StructureConstants::from_nested(nested), chart);
  }
  if (type == "symplectic_inverse")
    return PoissonStructure::symplectic_inverse(
        chart, load_entries(require(p, "form_upper_entries"), coords, "form_upper_entries"));
  throw ArgumentError("unknown poisson.type '" + type + "'");
}

SystemSpec load_system(const Json& doc) {
  SystemSpec spec;
  spec.system.ambient = load_structure(doc);
  const auto& coords = spec.system.ambient.chart().names();
  if (doc.contains("functions")) {
    const Json& fs = doc.at("functions");
    if (!fs.is_object()) throw ArgumentError("'functions' must be an object");
    for (const auto& [name, text] : fs.items()) {
      if (!is_valid_identifier(name)) throw ArgumentError("invalid function name '" + name + "'");
      spec.functions.push_back({name, parse(get_as<std::string>(text, "functions." + name), coords)});
    }
  }
  auto lookup = [&](const std::string& name) -> NamedExpression {
    return {name, spec.function(name)};
  };
  if (doc.contains("system")) {
    const Json& s = doc.at("system");
    if (s.contains("kind")) spec.system.declared_kind = system_kind_from_string(get_as<std::string>(s.at("kind"), "kind"));
    for (const auto& n : get_as<std::vector<std::string>>(require(s, "generators"), "generators"))
      spec.system.functions.push_back(lookup(n));
    if (s.contains("invariants_pool"))
      for (const auto& n : get_as<std::vector<std::string>>(s.at("invariants_pool"), "invariants_pool"))
        spec.system.invariants_pool.push_back(lookup(n));
    if (s.contains("coinduced_casimirs")) {
      std::vector<std::string> targets;
      for (std::size_t i = 1; i <= spec.system.functions.size(); ++i) targets.push_back("x" + std::to_string(i));
      for (const auto& text : get_as<std::vector<std::string>>(s.at("coinduced_casimirs"), "coinduced_casimirs"))
        spec.system.coinduced_casimirs.push_back(parse(text, targets));
    }
    spec.system.validate();
  }
  return spec;
}

SystemSpec load_system_file(const std::string& path) { return load_system(read_json_file(path)); }

Json export_structure(const PoissonStructure& w, const std::vector<NamedExpression>& functions) {
  Json doc = chart_json(w.chart());
  doc["poisson"] = poisson_json(w);
  Json fs = Json::object();
  for (const auto& f : functions) fs[f.name] = print(f.expr, w.chart().names());
  doc["functions"] = fs;
  return doc;
}

Json export_system(const GeneratingSet& g) {
  std::vector<NamedExpression> all = g.functions;
  all.insert(all.end(), g.invariants_pool.begin(), g.invariants_pool.end());
  if (g.guard) throw VariantError("export needs the guard folded into the chart");
  Json doc = export_structure(g.ambient, all);
  Json s;
  s["kind"] = to_string(g.declared_kind);
  Json gens = Json::array(), pool = Json::array(), cas = Json::array();
  for (const auto& f : g.functions) gens.push_back(f.name);
  for (const auto& f : g.invariants_pool) pool.push_back(f.name);
  std::vector<std::string> targets;
  for (std::size_t i = 1; i <= g.size(); ++i) targets.push_back("x" + std::to_string(i));
  for (const auto& c : g.coinduced_casimirs) cas.push_back(print(c, targets));
  s["generators"] = gens;
  s["invariants_pool"] = pool;
  s["coinduced_casimirs"] = cas;
  doc["system"] = s;
  return doc;
}

MapSpec load_map(const Json& doc, const Chart& source) {
  const auto targets = get_as<std::vector<std::string>>(require(doc, "target_coordinates"), "target_coordinates");
  std::vector<Interval> box(targets.size(), Interval{-1e6, 1e6});
  if (doc.contains("target_box")) {
    const auto pairs = get_as<std::vector<std::vector<double>>>(doc.at("target_box"), "target_box");
    if (pairs.size() != targets.size()) throw ArgumentError("'target_box' needs one pair per target coordinate");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].size() != 2) throw ArgumentError("'target_box' entries must be [lo, hi]");
      box[i] = {pairs[i][0], pairs[i][1]};
    }
  }
  std::vector<Expression> forward;
  for (const auto& text : get_as<std::vector<std::string>>(require(doc, "forward"), "forward"))
    forward.push_back(parse(text, source.names()));
  std::optional<std::vector<Expression>> inverse;
  if (doc.contains("inverse") && !doc.at("inverse").is_null()) {
    inverse.emplace();
    for (const auto& text : get_as<std::vector<std::string>>(doc.at("inverse"), "inverse"))
      inverse->push_back(parse(text, targets));
  }
  MapSpec out{ChartMap(source, Chart(targets, box), forward, inverse), std::nullopt};
  if (doc.contains("sample_guard") && !doc.at("sample_guard").is_null())
    out.sample_guard = parse_predicate(get_as<std::string>(doc.at("sample_guard"), "sample_guard"), source.names());
  return out;
}

MapSpec load_map_file(const std::string& path, const Chart& source) { return load_map(read_json_file(path), source); }

Json export_map(const ChartMap& map, const std::optional<Predicate>& sample_guard) {
  Json doc;
  const auto& src = map.source().names();
  const auto& tgt = map.target().names();
  doc["target_coordinates"] = tgt;
  Json box = Json::array();
  for (const auto& iv : map.target().box()) box.push_back({iv.lo, iv.hi});
  doc["target_box"] = box;
  Json fwd = Json::array();
  for (const auto& e : map.forward()) fwd.push_back(print(e, src));
  doc["forward"] = fwd;
  if (map.inverse()) {
    Json inv = Json::array();
    for (const auto& e : *map.inverse()) inv.push_back(print(e, tgt));
    doc["inverse"] = inv;
  }
  if (sample_guard) doc["sample_guard"] = print(*sample_guard, src);
  return doc;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace poissonkit
