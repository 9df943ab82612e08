#include "poissonkit/cli.hpp"

#include "poissonkit/catalog.hpp"
#include "poissonkit/errors.hpp"
#include "poissonkit/flows.hpp"
#include "poissonkit/integrability.hpp"
#include "poissonkit/sampling.hpp"
#include "poissonkit/spec_io.hpp"
#include "poissonkit/transform.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#ifndef POISSONKIT_VERSION
#define POISSONKIT_VERSION "0.0.0"
#endif

namespace poissonkit::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string range(const RankRange& r) {
  return r.constant() ? std::to_string(r.min) : std::to_string(r.min) + ".." + std::to_string(r.max);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

Eigen::VectorXd parse_point(const std::string& text, std::size_t dim) {
  const auto parts = split(text);
  if (parts.size() != dim)
    throw ArgumentError("expected " + std::to_string(dim) + " comma-separated values, got " +
                        std::to_string(parts.size()));
  Eigen::VectorXd z(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(parts[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != parts[i].size()) throw ArgumentError("'" + parts[i] + "' is not a number");
    z(static_cast<Eigen::Index>(i)) = v;
  }
  return z;
}

/// Indices of names (or plain indices) among `coords`.
std::vector<std::size_t> parse_indices(const std::string& text, const std::vector<std::string>& coords) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  for (const auto& item : split(text)) {
    const auto it = std::find(coords.begin(), coords.end(), item);
    if (it != coords.end()) {
      out.push_back(static_cast<std::size_t>(it - coords.begin()));
      continue;
    }
    if (!item.empty() && item.find_first_not_of("0123456789") == std::string::npos) {
      out.push_back(std::stoul(item));
      continue;
    }
    throw ArgumentError("unknown target coordinate '" + item + "'");
  }
  return out;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("POISSONKIT_SEED");
  if (!env || !*env) return 42;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ArgumentError(std::string("POISSONKIT_SEED is not an unsigned integer: '") + env + "'");
  return v;
}

int exit_for(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass: return kPass;
    case VerdictStatus::Fail: return kFail;
    default: return kInconclusive;
  }
}

Json fit_json(const FitResult& fit) {
  Json j;
  j["constants"] = fit.constants.nested();
  j["rms_residual"] = fit.rms_residual;
  j["validation_rms_residual"] = fit.validation_rms_residual;
  j["gram_condition"] = fit.gram_condition;
  return j;
}

Json report_json(const ClassificationReport& r, const ClassifyConfig& cfg, bool meta) {
  Json j;
  j["tool"] = "poissonkit";
  j["version"] = POISSONKIT_VERSION;
  Json c;
  c["samples"] = cfg.samples;
  c["seed"] = cfg.seed;
  c["tol_residual"] = cfg.tolerances.residual;
  c["tol_rank_rel"] = cfg.tolerances.rank_rel;
  c["tol_fit"] = cfg.tolerances.fit;
  c["tol_factorization"] = cfg.tolerances.factorization;
  c["cross_validation_ratio"] = cfg.tolerances.cross_validation_ratio;
  j["config"] = c;
  if (meta) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["meta"] = {{"generated_at", buf}};
  }
  auto rank_json = [](const RankRange& rr) { return Json{{"min", rr.min}, {"max", rr.max}}; };
  Json rep;
  rep["declared_kind"] = to_string(r.declared_kind);
  rep["k"] = r.k;
  rep["dimension"] = r.dimension;
  rep["samples"] = r.samples;
  rep["jacobian_rank"] = rank_json(r.jacobian_rank);
  rep["structure_matrix_rank"] = rank_json(r.structure_matrix_rank);
  rep["corank_m"] = r.corank_m;
  rep["ambient_rank"] = rank_json(r.ambient_rank);
  if (r.joint_jacobian_rank) rep["joint_jacobian_rank"] = rank_json(*r.joint_jacobian_rank);
  Json inv;
  inv["generators"] = r.involution.generators;
  if (r.involution.pool) inv["pool"] = *r.involution.pool;
  if (r.involution.mixed) inv["mixed"] = *r.involution.mixed;
  rep["involution"] = inv;
  rep["fiber_factorization_residual"] = r.fiber_factorization_residual;
  if (r.fit) rep["fit"] = fit_json(*r.fit);
  else rep["fit_error"] = r.fit_error;
  if (r.pullback_casimir_residual) rep["pullback_casimir_residual"] = *r.pullback_casimir_residual;
  Json verdicts;
  for (const auto& [kind, v] : r.verdicts) verdicts[to_string(kind)] = {{"status", to_string(v.status)}, {"reason", v.reason}};
  rep["verdicts"] = verdicts;
  const Verdict d = r.declared();
  rep["declared_verdict"] = {{"status", to_string(d.status)}, {"reason", d.reason}};
  j["report"] = rep;
  return j;
}

void print_constants(std::ostream& out, const StructureConstants& c) {
  const std::size_t k = c.dimension();
  bool any = false;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      for (std::size_t h = 0; h < k; ++h)
        if (std::abs(c(h, i, j)) > 1e-9) {
          out << "  c^" << h + 1 << "_" << i + 1 << j + 1 << " = " << num(c(h, i, j)) << '\n';
          any = true;
        }
  if (!any) out << "  (all constants vanish)\n";
}

void print_report(std::ostream& out, const ClassificationReport& r, const ClassifyConfig& cfg) {
  out << "declared kind: " << to_string(r.declared_kind) << "\n";
  out << "k = " << r.k << ", dimension = " << r.dimension << ", samples = " << r.samples << ", seed = " << cfg.seed
      << "\n";
  out << "jacobian rank: " << range(r.jacobian_rank) << "\n";
  out << "structure-matrix rank: " << range(r.structure_matrix_rank) << ", corank m = " << r.corank_m << "\n";
  out << "ambient rank: " << range(r.ambient_rank) << "\n";
  if (r.joint_jacobian_rank) out << "joint jacobian rank (generators + pool): " << range(*r.joint_jacobian_rank) << "\n";
  out << "involution residual: generators " << num(r.involution.generators);
  if (r.involution.pool) out << ", pool " << num(*r.involution.pool);
  if (r.involution.mixed) out << ", mixed " << num(*r.involution.mixed);
  out << "\n";
  out << "fibre factorisation residual: " << num(r.fiber_factorization_residual) << "\n";
  if (r.fit) {
    out << "fit: rms " << num(r.fit->rms_residual) << ", validation rms " << num(r.fit->validation_rms_residual)
        << ", gram condition " << num(r.fit->gram_condition) << "\n";
    print_constants(out, r.fit->constants);
  } else {
    out << "fit: " << r.fit_error << "\n";
  }
  if (r.pullback_casimir_residual) out << "pull-back Casimir residual: " << num(*r.pullback_casimir_residual) << "\n";
  out << "verdicts:\n";
  for (const auto& [kind, v] : r.verdicts) {
    out << "  " << to_string(kind) << ": " << to_string(v.status);
    if (!v.reason.empty()) out << " (" << v.reason << ")";
    out << "\n";
  }
  const Verdict d = r.declared();
  out << "declared verdict: " << to_string(d.status) << "\n";
}

struct Options {
  // verify / fit / check-map
  std::string spec;
  std::size_t samples = 200;
  std::optional<std::uint64_t> seed;
  double tol = 1e-8;
  std::string json_out;
  bool no_meta = false;
  // flow
  std::string hamiltonian, from, csv;
  double t_end = 0.0, step = 1e-3;
  std::size_t record_every = 1;
  std::vector<std::string> monitors;
  // recursion
  std::string spec_b, at;
  double recursion_tol = 1e-8;
  // check-map
  std::string map, pattern, actions, angles, passive;
  std::size_t map_samples = 100;
  double map_tol = 1e-10;
  // catalog
  bool list = false;
  std::vector<std::string> export_system, export_map, export_companion;
};

int cmd_verify(const Options& o, std::ostream& out) {
  const SystemSpec spec = load_system_file(o.spec);
  ClassifyConfig cfg;
  cfg.samples = o.samples;
  cfg.seed = o.seed.value_or(default_seed());
  cfg.tolerances.residual = o.tol;
  const ClassificationReport r = classify(spec.system, cfg);
  print_report(out, r, cfg);
  if (!o.json_out.empty()) write_json_file(o.json_out, report_json(r, cfg, !o.no_meta));
  return exit_for(r.declared().status);
}

int cmd_flow(const Options& o, std::ostream& out, std::ostream& err) {
  const SystemSpec spec = load_system_file(o.spec);
  const PoissonStructure& w = spec.system.ambient;
  const Expression& h = spec.function(o.hamiltonian);
  std::vector<NamedExpression> monitors;
  for (const auto& group : o.monitors)
    for (const auto& name : split(group)) monitors.push_back({name, spec.function(name)});
  FlowConfig cfg;
  cfg.step = o.step;
  cfg.t_end = o.t_end;
  cfg.record_every = o.record_every;
  const Trajectory traj = integrate(w, h, parse_point(o.from, w.dimension()), cfg, monitors);
  if (o.csv.empty()) {
    write_csv(out, traj, w.chart().names());
  } else {
    std::ofstream f(o.csv);
    if (!f) throw ArgumentError("cannot write '" + o.csv + "'");
    write_csv(f, traj, w.chart().names());
    out << "wrote " << traj.times.size() << " rows to " << o.csv << "\n";
  }
  if (traj.aborted()) {
    err << "flow aborted: " << *traj.abort_reason << " at t=" << traj.abort_time << "\n";
    return kFlowAborted;
  }
  return kPass;
}

int cmd_fit(const Options& o, std::ostream& out) {
  const SystemSpec spec = load_system_file(o.spec);
  const GeneratingSet& g = spec.system;
  const std::uint64_t seed = o.seed.value_or(default_seed());
  PointSampler sampler(g.ambient.chart(), seed, g.guard);
  const std::size_t count = std::max(o.samples, minimum_fit_samples(g.size()));
  const auto points = sampler.draw(count);
  const auto validation = sampler.draw(count);
  FitResult fit;
  try {
    fit = fit_structure_constants(g, points, validation);
  } catch (const IllConditioned& e) {
    out << "fit failed: " << e.what() << "\n";
    return kFail;
  }
  const Tolerances tol;
  out << "samples = " << count << ", seed = " << seed << "\n";
  out << "rms residual " << num(fit.rms_residual) << ", validation rms " << num(fit.validation_rms_residual)
      << ", gram condition " << num(fit.gram_condition) << "\n";
  print_constants(out, fit.constants);
  const bool ok = fit.rms_residual <= tol.fit && fit_cross_validates(fit, tol.cross_validation_ratio);
  out << (ok ? "constant structure constants: yes" : "constant structure constants: no") << "\n";
  return ok ? kPass : kFail;
}

void print_matrix(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m) {
  out << name << ":\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << "  ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << num(m(r, c));
    out << "\n";
  }
}

int cmd_recursion(const Options& o, std::ostream& out) {
  const PoissonStructure a = load_structure(read_json_file(o.spec));
  const PoissonStructure b = load_structure(read_json_file(o.spec_b));
  if (a.chart().names() != b.chart().names()) throw ArgumentError("the two structures use different coordinates");
  const Eigen::VectorXd z = parse_point(o.at, a.dimension());
  RecursionResult r;
  try {
    r = recursion_operator(a, b, z, o.recursion_tol);
  } catch (const DistributionsDiffer& e) {
    out << "no recursion operator: characteristic distributions differ; principal angles:";
    for (double angle : e.principal_angles()) out << " " << num(angle);
    out << "\n";
    return kFail;
  } catch (const SingularRestriction& e) {
    out << "no recursion operator: " << e.what() << "\n";
    return kFail;
  }
  out << "characteristic rank: " << r.characteristic_rank << "\n";
  print_matrix(out, "R", r.R);
  print_matrix(out, "R_dual", r.R_dual);
  out << "residual ||w' - R w||: " << num(r.residual_forward) << "\n";
  out << "residual ||w' - w R_dual||: " << num(r.residual_dual) << "\n";
  out << "det R: " << num(r.determinant) << "\n";
  return r.residual_forward <= o.recursion_tol && r.residual_dual <= o.recursion_tol ? kPass : kFail;
}

int cmd_check_map(const Options& o, std::ostream& out) {
  const SystemSpec spec = load_system_file(o.spec);
  const PoissonStructure& w = spec.system.ambient;
  const MapSpec m = load_map_file(o.map, w.chart());
  const auto& targets = m.map.target().names();
  CanonicalFormSpec cf;
  cf.pattern = block_pattern_from_string(o.pattern);
  cf.actions = parse_indices(o.actions, targets);
  cf.angles = parse_indices(o.angles, targets);
  cf.passive = parse_indices(o.passive, targets);
  const std::uint64_t seed = o.seed.value_or(default_seed());
  const auto points = sample_points(w.chart(), o.map_samples, seed, m.sample_guard);
  const CanonicalFormResult r = canonical_form_check(w, m.map, cf, points, o.map_tol);
  out << "pattern " << to_string(cf.pattern) << " at " << points.size() << " points: "
      << (r.pass ? "Pass" : "Fail") << ", max deviation " << num(r.max_deviation) << "\n";
  if (!r.pass) out << r.reason << "\n";
  return r.pass ? kPass : kFail;
}

int cmd_catalog(const Options& o, std::ostream& out) {
  if (o.list) {
    for (const auto& e : catalog()) out << e.name << ": " << e.notes << "\n";
  }
  if (!o.export_system.empty()) {
    write_json_file(o.export_system[1], export_system(catalog_entry(o.export_system[0]).system));
    out << "wrote " << o.export_system[1] << "\n";
  }
  if (!o.export_map.empty()) {
    const CatalogEntry& e = catalog_entry(o.export_map[0]);
    if (e.maps.empty()) throw ArgumentError("catalog entry '" + e.name + "' has no reference map");
    write_json_file(o.export_map[1], export_map(e.maps.front().map, e.maps.front().sample_guard));
    out << "wrote " << o.export_map[1] << "\n";
  }
  if (!o.export_companion.empty()) {
    const CatalogEntry& e = catalog_entry(o.export_companion[0]);
    if (!e.companion) throw ArgumentError("catalog entry '" + e.name + "' has no companion structure");
    write_json_file(o.export_companion[1], export_structure(*e.companion));
    out << "wrote " << o.export_companion[1] << "\n";
  }
  if (!o.list && o.export_system.empty() && o.export_map.empty() && o.export_companion.empty())
    throw ArgumentError("catalog needs --list or an --export option");
  return kPass;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sampled verification of Poisson structures and (super)integrable systems", "poissonkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", POISSONKIT_VERSION);
  Options o;

  auto* verify = app.add_subcommand("verify", "Classify a system file and check its declared kind");
  verify->add_option("spec", o.spec, "System JSON file")->required();
  verify->add_option("--samples", o.samples, "Number of sample points")->check(CLI::PositiveNumber);
  verify->add_option("--seed", o.seed, "Random seed (default 42 or POISSONKIT_SEED)");
  verify->add_option("--tol", o.tol, "Residual tolerance")->check(CLI::PositiveNumber);
  verify->add_option("--json", o.json_out, "Write the machine-readable report here");
  verify->add_flag("--no-meta", o.no_meta, "Omit the timestamp from the JSON report");

  auto* flow = app.add_subcommand("flow", "Integrate a Hamiltonian flow and write a CSV trajectory");
  flow->add_option("spec", o.spec, "System JSON file")->required();
  flow->add_option("--hamiltonian", o.hamiltonian, "Function name of the Hamiltonian")->required();
  flow->add_option("--from", o.from, "Initial point \"v1,v2,...\"")->required();
  flow->add_option("--t-end", o.t_end, "Final time (negative integrates backwards)")->required();
  flow->add_option("--step", o.step, "RK4 step")->check(CLI::PositiveNumber);
  flow->add_option("--record-every", o.record_every, "Record every n-th step")->check(CLI::PositiveNumber);
  flow->add_option("--monitor", o.monitors, "Function names to monitor");
  flow->add_option("--csv", o.csv, "Output CSV (default stdout)");

  auto* fit = app.add_subcommand("fit", "Fit structure constants of the generators' brackets");
  fit->add_option("spec", o.spec, "System JSON file")->required();
  fit->add_option("--samples", o.samples, "Number of sample points")->check(CLI::PositiveNumber);
  fit->add_option("--seed", o.seed, "Random seed");

  auto* rec = app.add_subcommand("recursion", "Recursion operator of two structures at a point");
  rec->add_option("spec_a", o.spec, "First structure file")->required();
  rec->add_option("spec_b", o.spec_b, "Second structure file")->required();
  rec->add_option("--at", o.at, "Point \"v1,v2,...\"")->required();
  rec->add_option("--tol", o.recursion_tol, "Principal-angle and residual tolerance")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check-map", "Check a canonical form in mapped coordinates");
  check->add_option("spec", o.spec, "System JSON file")->required();
  check->add_option("--map", o.map, "Map JSON file")->required();
  check->add_option("--pattern", o.pattern, "symplectic-aa | poisson-aa | poisson-aa-block")
      ->required()
      ->check(CLI::IsMember({"symplectic-aa", "poisson-aa", "poisson-aa-block"}));
  check->add_option("--actions", o.actions, "Action coordinates (names or indices)");
  check->add_option("--angles", o.angles, "Angle coordinates, paired with actions");
  check->add_option("--passive", o.passive, "Passive coordinates (default: the rest)");
  check->add_option("--samples", o.map_samples, "Number of sample points")->check(CLI::PositiveNumber);
  check->add_option("--seed", o.seed, "Random seed");
  check->add_option("--tol", o.map_tol, "Deviation tolerance")->check(CLI::PositiveNumber);

  auto* cat = app.add_subcommand("catalog", "List or export built-in systems");
  cat->add_flag("--list", o.list, "List entries");
  cat->add_option("--export", o.export_system, "NAME OUT: write the entry as a system file")->expected(2);
  cat->add_option("--export-map", o.export_map, "NAME OUT: write the entry's reference map")->expected(2);
  cat->add_option("--export-companion", o.export_companion, "NAME OUT: write the entry's second structure")
      ->expected(2);

  std::vector<const char*> argv{"poissonkit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kInputError;
  }

  try {
    if (*verify) return cmd_verify(o, out);
    if (*flow) return cmd_flow(o, out, err);
    if (*fit) return cmd_fit(o, out);
    if (*rec) return cmd_recursion(o, out);
    if (*check) return cmd_check_map(o, out);
    if (*cat) return cmd_catalog(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace poissonkit::cli
