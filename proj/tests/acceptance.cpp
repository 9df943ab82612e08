// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include "poissonkit/catalog.hpp"
#include "poissonkit/cli.hpp"
#include "poissonkit/errors.hpp"
#include "poissonkit/flows.hpp"
#include "poissonkit/liealg.hpp"
#include "poissonkit/sampling.hpp"
#include "poissonkit/spec_io.hpp"
#include "support/random_expr.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <unistd.h>

using namespace poissonkit;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

PoissonStructure canonical(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) names.push_back("p" + std::to_string(i));
  return PoissonStructure::canonical(Chart::uniform(names, -2, 2), n, 0);
}

Expression random_polynomial(std::mt19937_64& rng, const PoissonStructure& w) {
  return parse(testsupport::random_polynomial_text(rng, w.chart().names()), w.chart().names());
}

/// Every valid structure the catalog ships, with the guard its points obey.
std::vector<std::pair<std::string, GeneratingSet>> valid_structures() {
  std::vector<std::pair<std::string, GeneratingSet>> out;
  for (const auto& e : catalog()) {
    out.emplace_back(e.name, e.system);
    if (e.companion) {
      GeneratingSet c = e.system;
      c.ambient = *e.companion;
      out.emplace_back(e.name + "'", c);
    }
  }
  return out;
}

double max_abs_difference(const StructureConstants& a, const StructureConstants& b) {
  double worst = 0.0;
  const std::size_t k = a.dimension();
  for (std::size_t h = 0; h < k; ++h)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) worst = std::max(worst, std::abs(a(h, i, j) - b(h, i, j)));
  return worst;
}

Outcome ad_correctness() {
  std::mt19937_64 rng(1000);
  std::uniform_real_distribution<double> u(-2, 2);
  double worst_g = 0.0, worst_h = 0.0;
  int accepted = 0;
  while (accepted < 1000) {
    const auto names = testsupport::coordinate_names(1 + rng() % 4);
    const Expression e = parse(testsupport::random_expression_text(rng, names, 6), names);
    Eigen::VectorXd z(static_cast<Eigen::Index>(names.size()));
    for (auto& v : z) v = u(rng);
    Jet2 j;
    try {
      j = eval_jet2(e, z);
    } catch (const DomainError&) {
      continue;
    }
    // Keep the finite-difference oracle inside its accurate range.
    if (!std::isfinite(j.value) || std::abs(j.value) > 1e4 || j.hessian.cwiseAbs().maxCoeff() > 1e4) continue;
    const auto g = testsupport::fd_gradient(e, z, 1e-5);
    const auto h = testsupport::fd_hessian(e, z, 1e-4);
    if (!g || !h) continue;
    ++accepted;
    worst_g = std::max(worst_g, testsupport::relative_error(j.gradient, *g));
    worst_h = std::max(worst_h, testsupport::relative_error(j.hessian, *h));
  }
  return {worst_g <= 1e-6 && worst_h <= 1e-4, "1000 expressions, max gradient rel err " + fmt(worst_g) +
                                                  " (<= 1e-6), max Hessian rel err " + fmt(worst_h) + " (<= 1e-4)"};
}

Outcome bracket_axioms() {
  const std::vector<std::pair<std::string, PoissonStructure>> structures = {
      {"canonical R^4", canonical(2)},
      {"so(3)", lie_poisson(so3())},
      {"so(2,1)", lie_poisson(so21())},
      {"canonical x so(3)", product(canonical(1), lie_poisson(so3()))},
      {"canonical x zero", catalog_entry("kepler_x6_product").system.ambient.with_chart(
                               catalog_entry("kepler_x6_product").system.ambient.chart().with_guard(std::nullopt))},
  };
  std::mt19937_64 rng(2);
  double anti = 0.0, leibniz = 0.0, jacobi = 0.0;
  for (const auto& [name, w] : structures) {
    for (const auto& z : sample_points(w.chart(), 200, 2)) {
      const Expression f = random_polynomial(rng, w), g = random_polynomial(rng, w), h = random_polynomial(rng, w);
      anti = std::max(anti, std::abs(bracket(w, f, g, z) + bracket(w, g, f, z)));
      leibniz = std::max(leibniz, std::abs(bracket(w, h, f * g, z) - bracket(w, h, f, z) * eval(g, z) -
                                           eval(f, z) * bracket(w, h, g, z)));
      const Eigen::MatrixXd m = bivector_matrix(w, z);
      auto outer = [&](const Expression& a, const Expression& b, const Expression& c) {
        return eval_jet1(a, z).gradient.dot(m * bracket_gradient(w, b, c, z));
      };
      jacobi = std::max(jacobi, std::abs(outer(f, g, h) + outer(g, h, f) + outer(h, f, g)));
    }
  }
  return {anti <= 1e-8 && leibniz <= 1e-8 && jacobi <= 1e-8,
          "5 structures x 200 points, antisymmetry " + fmt(anti) + ", Leibniz " + fmt(leibniz) + ", Jacobi " +
              fmt(jacobi) + " (each <= 1e-8)"};
}

Outcome jacobi_discrimination() {
  double worst_valid = 0.0;
  for (const auto& [name, g] : valid_structures())
    for (const auto& z : sample_points(g.ambient.chart(), 200, 3, g.guard))
      worst_valid = std::max(worst_valid, jacobi_residual(g.ambient, z));
  // The corrupted residual vanishes only on the plane x1 = 0; a generic
  // sample must clear 0.1 at all but a thin slab of points.
  const PoissonStructure bad = corrupted_structure();
  const auto pts = sample_points(bad.chart(), 200, 3);
  std::size_t above = 0;
  for (const auto& z : pts) above += jacobi_residual(bad, z) >= 0.1;
  const double fraction = static_cast<double>(above) / static_cast<double>(pts.size());
  return {worst_valid <= 1e-12 && fraction >= 0.9,
          "valid catalog max " + fmt(worst_valid) + " (<= 1e-12); corrupted >= 0.1 at " + fmt(100 * fraction) +
              "% of 200 points (>= 90%)"};
}

Outcome rank_laws() {
  bool ok = true;
  std::string detail;
  const Chart c3 = Chart::uniform({"a", "b", "c"}, -2, 2);
  for (const auto& z : sample_points(c3, 50, 4)) ok &= rank_at(PoissonStructure::zero(c3), z) == 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const PoissonStructure w = canonical(n);
    for (const auto& z : sample_points(w.chart(), 20, 4)) ok &= rank_at(w, z) == static_cast<int>(2 * n);
    for (std::size_t r = 1; r <= 3; ++r) {
      std::vector<std::string> names;
      for (std::size_t i = 1; i <= r; ++i) names.push_back("y" + std::to_string(i));
      const PoissonStructure p = product(w, PoissonStructure::zero(Chart::uniform(names, -1, 1)));
      for (const auto& z : sample_points(p.chart(), 20, 4)) ok &= rank_at(p, z) == static_cast<int>(2 * n);
    }
  }
  detail = "zero 0, canonical 2n (n = 1..4), canonical-2n x zero-r = 2n (r = 1..3)";
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  bool parity = true;
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + static_cast<int>(rng() % 8);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n * n; ++i) a.data()[i] = g(rng);
    if (rng() % 2) a.col(0) = a.col(n - 1);  // force some rank deficiency
    parity &= numerical_rank(a - a.transpose(), kDefaultRankTolerance) % 2 == 0;
  }
  for (const auto& [name, gs] : valid_structures())
    for (const auto& z : sample_points(gs.ambient.chart(), 50, 4, gs.guard)) parity &= rank_at(gs.ambient, z) % 2 == 0;
  detail += parity ? "; parity even on 1000 random antisymmetric matrices and all catalog samples" : "; odd rank seen";
  return {ok && parity, detail};
}

Outcome kepler() {
  const GeneratingSet& neg = catalog_entry("kepler2_neg").system;
  const GeneratingSet& pos = catalog_entry("kepler2_pos").system;
  const auto pts = sample_points(neg.ambient.chart(), 200, 5, neg.guard);
  const IndependenceResult ind = independence_check(neg, pts);
  const CorankResult cr = corank_structure(neg, pts);
  const FitResult fn = fit_structure_constants(neg, pts, sample_points(neg.ambient.chart(), 200, 6, neg.guard));
  const auto ppts = sample_points(pos.ambient.chart(), 200, 5, pos.guard);
  const FitResult fp = fit_structure_constants(pos, ppts, sample_points(pos.ambient.chart(), 200, 6, pos.guard));
  const double dn = max_abs_difference(fn.constants, so3()), dp = max_abs_difference(fp.constants, so21());
  const bool ok = ind.min_rank == 3 && cr.m == 1 && cr.regular() && fn.rms_residual <= 1e-6 && dn <= 1e-6 &&
                  fp.rms_residual <= 1e-6 && dp <= 1e-6 && fit_cross_validates(fn, 10.0) &&
                  fit_cross_validates(fp, 10.0);
  return {ok, "rank " + std::to_string(ind.min_rank) + ", m = " + std::to_string(cr.m) + " at 200 points; so(3) rms " +
                  fmt(fn.rms_residual) + " (val " + fmt(fn.validation_rms_residual) + ", |c - c0| " + fmt(dn) +
                  "); so(2,1) rms " + fmt(fp.rms_residual) + " (val " + fmt(fp.validation_rms_residual) +
                  ", |c - c0| " + fmt(dp) + ")"};
}

Outcome product_rank_law() {
  const ClassificationReport r = classify(catalog_entry("kepler_x6_product").system);
  const VerdictStatus s = r.verdicts.at(SystemKind::PartiallySuperintegrable).status;
  const bool ok = r.ambient_rank.min == 4 && r.ambient_rank.max == 4 && r.k == 3 && r.corank_m == 1 &&
                  s == VerdictStatus::Pass;
  return {ok, "ambient rank " + std::to_string(r.ambient_rank.max) + " = k + m = " + std::to_string(r.k) + " + " +
                  std::to_string(r.corank_m) + ", PartiallySuperintegrable " + to_string(s)};
}

Outcome commutator_identity() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (const auto& [name, g] : valid_structures()) {
    const auto pts = sample_points(g.ambient.chart(), 100, 7, g.guard);
    for (const auto& z : pts) {
      const Expression f = random_polynomial(rng, g.ambient), h = random_polynomial(rng, g.ambient);
      worst = std::max(worst, field_commutator_residual(g.ambient, f, h, z));
    }
  }
  const PoissonStructure bad = corrupted_structure();
  double bad_worst = 0.0;
  for (const auto& z : sample_points(bad.chart(), 100, 7)) {
    const Expression f = random_polynomial(rng, bad), h = random_polynomial(rng, bad);
    bad_worst = std::max(bad_worst, field_commutator_residual(bad, f, h, z));
  }
  return {worst <= 1e-8 && bad_worst > 1e-3,
          "valid catalog max " + fmt(worst) + " (<= 1e-8, 100 pairs each); corrupted max " + fmt(bad_worst) +
              " (> 1e-3)"};
}

Outcome flow_conservation() {
  const PoissonStructure w = lie_poisson(so3());
  const auto& n = w.chart().names();
  const Expression h = parse("z1^2/2 + z2^2/1 + z3^2/0.8", n);
  FlowConfig cfg;
  cfg.t_end = 100.0;
  cfg.step = 1e-3;
  cfg.record_every = 100;
  const auto start = std::chrono::steady_clock::now();
  const Trajectory tr =
      integrate(w, h, Eigen::Vector3d(0.3, 0.4, 0.5), cfg, {{"C", parse("z1^2+z2^2+z3^2", n)}, {"H", h}});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto d = conservation_report(tr, {"C", "H"});

  const std::vector<std::string> qp = {"q", "p"};
  FlowConfig osc;
  osc.t_end = 2 * M_PI;
  const Trajectory o = integrate(PoissonStructure::canonical(Chart::uniform(qp, -2, 2), 1, 0),
                                 parse("(p^2 + q^2)/2", qp), Eigen::Vector2d(1, 0), osc);
  const double ret = (o.final_state() - Eigen::Vector2d(1, 0)).norm();
  const bool ok = !tr.aborted() && d.at("C") <= 1e-8 && d.at("H") <= 1e-8 && seconds <= 30.0 && ret <= 1e-6;
  return {ok, "rigid body |dC| " + fmt(d.at("C")) + ", |dH| " + fmt(d.at("H")) + " (<= 1e-8) in " + fmt(seconds) +
                  " s (<= 30); oscillator return " + fmt(ret) + " (<= 1e-6)"};
}

Outcome commuting_flows() {
  const PoissonStructure w = canonical(2);
  const auto& n = w.chart().names();
  FlowConfig cfg;
  cfg.t_end = 1.0;
  const double defect = commutation_defect(w, parse("(q1^2 + p1^2)/2", n), parse("(q2^2 + p2^2)/2", n),
                                           Eigen::Vector4d(0.5, -0.3, 0.2, 0.7), 1.0, 1.0, cfg);
  const GeneratingSet& g = catalog_entry("kepler2_neg").system;
  FlowConfig probe;
  probe.t_end = 10.0;
  const FiberProbeResult r =
      invariant_fiber_probe(g, {{"S", pullback(g, g.coinduced_casimirs).front()}}, Eigen::Vector4d(1, 0, 0, 0.95), probe);
  return {defect <= 1e-7 && r.max_drift() <= 1e-6,
          "oscillator action defect " + fmt(defect) + " (<= 1e-7); Kepler pull-back Casimir fibre drift " +
              fmt(r.max_drift()) + " (<= 1e-6)"};
}

Outcome recursion_operators() {
  const PoissonStructure w = canonical(2);
  const Eigen::VectorXd z = Eigen::Vector4d(0.1, -0.2, 0.3, 0.4);
  const RecursionResult id = recursion_operator(w, w, z);
  const bool identity = id.R == Eigen::MatrixXd::Identity(4, 4) && id.residual_forward == 0.0 && id.residual_dual == 0.0;

  const Eigen::Vector3d y(0.3, -0.4, 1.2);
  const Eigen::MatrixXd m = bivector_matrix(lie_poisson(so3()), y);
  const RecursionResult sc = recursion_operator(m, 2.0 * m);
  const Eigen::Vector3d nrm = y.normalized();
  const Eigen::Matrix3d p = Eigen::Matrix3d::Identity() - nrm * nrm.transpose();
  const double scaled = (sc.R - (2.0 * p + (Eigen::Matrix3d::Identity() - p))).cwiseAbs().maxCoeff();

  const CatalogEntry& bi = catalog_entry("bi20_model");
  double res = 0.0, min_det = INFINITY;
  for (const auto& q : sample_points(bi.system.ambient.chart(), 50, 10)) {
    const RecursionResult r = recursion_operator(bi.system.ambient, *bi.companion, q);
    res = std::max({res, r.residual_forward, r.residual_dual});
    min_det = std::min(min_det, std::abs(r.determinant));
  }

  bool mismatch = false;
  try {
    recursion_operator(canonical(1), PoissonStructure::zero(canonical(1).chart()), Eigen::Vector2d(0.1, 0.2));
  } catch (const DistributionsDiffer&) {
    mismatch = true;
  }
  const bool ok = identity && scaled <= 1e-12 && res <= 1e-10 && min_det > 0.0 && mismatch;
  return {ok, std::string("identity ") + (identity ? "exact" : "inexact") + "; scaled |R - (2P + I - P)| " +
                  fmt(scaled) + " (<= 1e-12); bi20 residuals " + fmt(res) + " (<= 1e-10), min |det R| " +
                  fmt(min_det) + "; canonical vs zero " + (mismatch ? "raises DistributionsDiffer" : "accepted")};
}

Outcome canonical_forms() {
  const CatalogEntry& e = catalog_entry("oscillator2");
  const ReferenceMap& m = e.maps.front();
  const auto pts = sample_points(e.system.ambient.chart(), 100, 11, m.sample_guard);
  const CanonicalFormResult polar = canonical_form_check(e.system.ambient, m.map, m.spec, pts);

  const auto& n = e.system.ambient.chart().names();
  const Chart target = Chart::uniform({"u1", "u2", "v1", "v2"}, -10, 10);
  const ChartMap scaling(e.system.ambient.chart(), target,
                         {parse("2*q1", n), parse("q2", n), parse("p1", n), parse("p2", n)});
  CanonicalFormSpec spec;
  spec.actions = {2, 3};
  spec.angles = {0, 1};
  const CanonicalFormResult scaled = canonical_form_check(e.system.ambient, scaling, spec, pts);
  return {polar.pass && polar.max_deviation <= 1e-10 && !scaled.pass && scaled.max_deviation >= 0.5,
          "polar map deviation " + fmt(polar.max_deviation) + " at 100 points (<= 1e-10); scaling map deviation " +
              fmt(scaled.max_deviation) + " (>= 0.5)"};
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / ("poissonkit_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool identical = true, stable = true;
  std::size_t entries = 0;
  for (const auto& e : catalog()) {
    const auto spec = (dir / (e.name + ".json")).string();
    write_json_file(spec, export_system(e.system));
    std::string text[2], report[2];
    for (int i = 0; i < 2; ++i) {
      std::ostringstream out, err;
      const auto json = dir / ("report" + std::to_string(i) + ".json");
      cli::run({"verify", spec, "--seed", "42", "--json", json.string(), "--no-meta"}, out, err);
      text[i] = out.str();
      report[i] = slurp(json);
    }
    identical &= text[0] == text[1] && report[0] == report[1] && !report[0].empty();
    for (std::uint64_t seed : {42ULL, 7ULL, 2024ULL}) {
      ClassifyConfig cfg;
      cfg.seed = seed;
      const ClassificationReport r = classify(e.system, cfg);
      for (const auto& [kind, status] : e.expected) stable &= r.verdicts.at(kind).status == status;
    }
    ++entries;
  }
  std::filesystem::remove_all(dir);
  return {identical && stable, "verify byte-identical across two runs: " + std::string(identical ? "yes" : "no") +
                                   "; expected verdicts on " + std::to_string(entries) +
                                   " catalog entries under seeds 42, 7, 2024: " + (stable ? "stable" : "unstable")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AD correctness", ad_correctness},
      {"Bracket axioms", bracket_axioms},
      {"Jacobi discrimination", jacobi_discrimination},
      {"Rank laws", rank_laws},
      {"Kepler n=2 superintegrability", kepler},
      {"Product rank law", product_rank_law},
      {"Field commutator identity", commutator_identity},
      {"Flow conservation", flow_conservation},
      {"Commuting flows", commuting_flows},
      {"Recursion operators", recursion_operators},
      {"Canonical-form verification", canonical_forms},
      {"Determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
