#include "poissonkit/integrability.hpp"

#include "poissonkit/errors.hpp"
#include "poissonkit/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace poissonkit {

namespace {

Eigen::MatrixXd jacobian(const std::vector<NamedExpression>& fs, const Eigen::VectorXd& z) {
  Eigen::MatrixXd j(static_cast<Eigen::Index>(fs.size()), z.size());
  for (std::size_t i = 0; i < fs.size(); ++i)
    j.row(static_cast<Eigen::Index>(i)) = eval_jet1(fs[i].expr, z).gradient.transpose();
  return j;
}

void widen(RankRange& r, int value, bool& first) {
  if (first) {
    r = {value, value};
    first = false;
  } else {
    r.min = std::min(r.min, value);
    r.max = std::max(r.max, value);
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// Combines individual findings into one verdict: any failure wins, then
// non-regularity, then untested parts.
class VerdictBuilder {
 public:
  void fail(const std::string& why) { fails_.push_back(why); }
  void non_regular(const std::string& why) { non_regular_.push_back(why); }
  void not_tested(const std::string& why) { not_tested_.push_back(why); }

  Verdict build() const {
    if (!fails_.empty()) return {VerdictStatus::Fail, join(fails_)};
    if (!non_regular_.empty()) return {VerdictStatus::NonRegular, join(non_regular_)};
    if (!not_tested_.empty()) return {VerdictStatus::NotTested, join(not_tested_)};
    return {VerdictStatus::Pass, ""};
  }

 private:
  static std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
    return out;
  }
  std::vector<std::string> fails_, non_regular_, not_tested_;
};

}  // namespace

std::string to_string(SystemKind k) {
  switch (k) {
    case SystemKind::CompletelyIntegrable: return "completely_integrable";
    case SystemKind::CommutativePartiallyIntegrable: return "commutative_partially_integrable";
    case SystemKind::Superintegrable: return "superintegrable";
    case SystemKind::LieAlgebraSuperintegrable: return "lie_algebra_superintegrable";
    case SystemKind::PartiallySuperintegrable: return "partially_superintegrable";
    case SystemKind::Unspecified: return "unspecified";
  }
  return "unspecified";
}

SystemKind system_kind_from_string(const std::string& s) {
  for (SystemKind k : {SystemKind::CompletelyIntegrable, SystemKind::CommutativePartiallyIntegrable,
                       SystemKind::Superintegrable, SystemKind::LieAlgebraSuperintegrable,
                       SystemKind::PartiallySuperintegrable, SystemKind::Unspecified})
    if (to_string(k) == s) return k;
  throw ArgumentError("unknown system kind '" + s + "'");
}

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass: return "Pass";
    case VerdictStatus::Fail: return "Fail";
    case VerdictStatus::NonRegular: return "NonRegular";
    case VerdictStatus::NotTested: return "NotTested";
  }
  return "NotTested";
}

void GeneratingSet::validate() const {
  const std::size_t dim = ambient.dimension();
  std::set<std::string> names;
  if (functions.empty()) throw ArgumentError("generating set is empty");
  for (const auto* group : {&functions, &invariants_pool})
    for (const auto& f : *group) {
      if (f.expr.arity() != dim)
        throw ArgumentError("function '" + f.name + "' has arity " + std::to_string(f.expr.arity()) +
                            ", chart dimension is " + std::to_string(dim));
      if (!names.insert(f.name).second) throw ArgumentError("duplicate function name '" + f.name + "'");
    }
  if (guard && guard->arity() != dim) throw ArgumentError("guard arity does not match chart dimension");
  for (const auto& c : coinduced_casimirs)
    if (c.arity() != functions.size())
      throw ArgumentError("coinduced Casimir arity must equal the number of generators");
}

IndependenceResult independence_check(const GeneratingSet& g, const std::vector<Eigen::VectorXd>& points,
                                      double tol_rel) {
  IndependenceResult out;
  const int k = static_cast<int>(g.size());
  out.min_rank = k;
  for (const auto& z : points) {
    const int r = numerical_rank(jacobian(g.functions, z), tol_rel);
    out.min_rank = std::min(out.min_rank, r);
    if (r < k) out.failing_points.push_back(z);
  }
  out.pass = out.min_rank == k;
  return out;
}

Eigen::MatrixXd structure_matrix(const GeneratingSet& g, const Eigen::VectorXd& z) {
  const std::size_t k = g.size();
  const Eigen::MatrixXd w = bivector_matrix(g.ambient, z);
  std::vector<Eigen::VectorXd> grads;
  for (const auto& f : g.functions) grads.push_back(eval_jet1(f.expr, z).gradient);
  const auto n = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double v = grads[i].dot(w * grads[j]);
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      s(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = -v;
    }
  return s;
}

double fiber_factorization_residual(const GeneratingSet& g, const std::vector<Eigen::VectorXd>& points,
                                    double tol_rel) {
  const std::size_t k = g.size();
  double worst = 0.0;
  for (const auto& z : points) {
    // Row scaling leaves the row space unchanged and keeps the basis
    // accurate when generators differ in magnitude by orders.
    Eigen::MatrixXd jt = jacobian(g.functions, z).transpose();
    for (Eigen::Index c = 0; c < jt.cols(); ++c)
      if (jt.col(c).norm() > 0.0) jt.col(c).normalize();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jt, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    if (s.size() > 0 && s(0) > 0.0)
      while (r < s.size() && s(r) >= tol_rel * s(0)) ++r;
    const Eigen::MatrixXd basis = svd.matrixU().leftCols(r);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        const Eigen::VectorXd grad = bracket_gradient(g.ambient, g.functions[i].expr, g.functions[j].expr, z);
        const Eigen::VectorXd orth = grad - basis * (basis.transpose() * grad);
        worst = std::max(worst, orth.norm() / std::max(grad.norm(), 1.0));
      }
  }
  return worst;
}

CorankResult corank_structure(const GeneratingSet& g, const std::vector<Eigen::VectorXd>& points,
                              double tol_rel) {
  CorankResult out;
  bool first = true;
  for (const auto& z : points) widen(out.rank, numerical_rank(structure_matrix(g, z), tol_rel), first);
  out.m = static_cast<int>(g.size()) - out.rank.max;
  return out;
}

std::size_t minimum_fit_samples(std::size_t k) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(k * k * k) / 2.0)) + 10;
}

FitResult fit_structure_constants(const GeneratingSet& g, const std::vector<Eigen::VectorXd>& points,
                                  const std::vector<Eigen::VectorXd>& validation) {
  const std::size_t k = g.size();
  if (points.size() < minimum_fit_samples(k))
    throw ArgumentError("structure-constant fit needs at least " + std::to_string(minimum_fit_samples(k)) +
                        " sample points");
  const auto kn = static_cast<Eigen::Index>(k);
  const std::size_t pairs = k * (k - 1) / 2;

  auto assemble = [&](const std::vector<Eigen::VectorXd>& pts, Eigen::MatrixXd& values, Eigen::MatrixXd& targets) {
    values.resize(static_cast<Eigen::Index>(pts.size()), kn);
    targets.resize(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(pairs));
    for (std::size_t s = 0; s < pts.size(); ++s) {
      const auto row = static_cast<Eigen::Index>(s);
      for (std::size_t h = 0; h < k; ++h) values(row, static_cast<Eigen::Index>(h)) = eval(g.functions[h].expr, pts[s]);
      const Eigen::MatrixXd sm = structure_matrix(g, pts[s]);
      std::size_t p = 0;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j, ++p)
          targets(row, static_cast<Eigen::Index>(p)) = sm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  };

  Eigen::MatrixXd values, targets;
  assemble(points, values, targets);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(values);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  const double condition = smin > 0.0 ? (sv(0) / smin) * (sv(0) / smin) : INFINITY;
  if (!(condition <= 1e12)) throw IllConditioned(condition);

  // One least-squares problem per pair (i < j); antisymmetry by construction.
  const Eigen::MatrixXd coeffs = values.colPivHouseholderQr().solve(targets);

  FitResult out;
  out.gram_condition = condition;
  out.constants = StructureConstants(k);
  std::size_t p = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j, ++p)
      for (std::size_t h = 0; h < k; ++h)
        out.constants.set_bracket(h, i, j, coeffs(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(p)));

  auto rms = [&](const Eigen::MatrixXd& v, const Eigen::MatrixXd& t) {
    if (t.size() == 0) return 0.0;
    return std::sqrt((v * coeffs - t).squaredNorm() / static_cast<double>(t.size()));
  };
  out.rms_residual = rms(values, targets);
  if (!validation.empty()) {
    Eigen::MatrixXd vvalues, vtargets;
    assemble(validation, vvalues, vtargets);
    out.validation_rms_residual = rms(vvalues, vtargets);
  }
  return out;
}

bool fit_cross_validates(const FitResult& fit, double ratio) {
  return fit.validation_rms_residual <= ratio * std::max(fit.rms_residual, 1e-12);
}

InvolutionResiduals involution_residual(const GeneratingSet& g, const std::vector<Eigen::VectorXd>& points) {
  InvolutionResiduals out;
  const auto& fs = g.functions;
  const auto& pool = g.invariants_pool;
  if (!pool.empty()) {
    out.pool = 0.0;
    out.mixed = 0.0;
  }
  for (const auto& z : points) {
    const Eigen::MatrixXd w = bivector_matrix(g.ambient, z);
    std::vector<Eigen::VectorXd> gf, gp;
    for (const auto& f : fs) gf.push_back(eval_jet1(f.expr, z).gradient);
    for (const auto& f : pool) gp.push_back(eval_jet1(f.expr, z).gradient);
    for (std::size_t i = 0; i < gf.size(); ++i)
      for (std::size_t j = i + 1; j < gf.size(); ++j)
        out.generators = std::max(out.generators, std::abs(gf[i].dot(w * gf[j])));
    for (std::size_t i = 0; i < gp.size(); ++i)
      for (std::size_t j = i + 1; j < gp.size(); ++j)
        *out.pool = std::max(*out.pool, std::abs(gp[i].dot(w * gp[j])));
    for (const auto& a : gf)
      for (const auto& b : gp) *out.mixed = std::max(*out.mixed, std::abs(a.dot(w * b)));
  }
  return out;
}

std::vector<Expression> pullback(const GeneratingSet& g, const std::vector<Expression>& casimirs) {
  std::vector<Expression> fs;
  for (const auto& f : g.functions) fs.push_back(f.expr);
  std::vector<Expression> out;
  for (const auto& c : casimirs) {
    if (c.arity() != fs.size()) throw ArgumentError("Casimir arity must equal the number of generators");
    out.push_back(substitute(c, fs));
  }
  return out;
}

double pullback_casimir_check(const GeneratingSet& g, const std::vector<Expression>& casimirs,
                              const std::vector<Eigen::VectorXd>& points) {
  const std::vector<Expression> pulled = pullback(g, casimirs);
  double worst = 0.0;
  for (const auto& z : points) {
    const Eigen::MatrixXd w = bivector_matrix(g.ambient, z);
    for (const auto& s : pulled) {
      const Eigen::VectorXd gs = eval_jet1(s, z).gradient;
      for (const auto& f : g.functions)
        worst = std::max(worst, std::abs(gs.dot(w * eval_jet1(f.expr, z).gradient)));
    }
  }
  return worst;
}

Verdict ClassificationReport::declared() const {
  if (declared_kind == SystemKind::Unspecified) return {VerdictStatus::Pass, "no declared kind"};
  const auto it = verdicts.find(declared_kind);
  return it == verdicts.end() ? Verdict{} : it->second;
}

ClassificationReport classify(const GeneratingSet& g, const ClassifyConfig& config) {
  g.validate();
  const Tolerances& tol = config.tolerances;
  const std::size_t k = g.size();
  const std::size_t dim = g.ambient.dimension();

  ClassificationReport rep;
  rep.k = k;
  rep.dimension = dim;
  rep.declared_kind = g.declared_kind;

  PointSampler sampler(g.ambient.chart(), config.seed, g.guard);
  const std::size_t count = std::max(config.samples, minimum_fit_samples(k));
  const std::vector<Eigen::VectorXd> points = sampler.draw(count);
  const std::vector<Eigen::VectorXd> validation = sampler.draw(count);
  rep.samples = points.size();

  const IndependenceResult indep = independence_check(g, points, tol.rank_rel);
  {
    bool first = true;
    for (const auto& z : points) widen(rep.jacobian_rank, numerical_rank(jacobian(g.functions, z), tol.rank_rel), first);
  }
  if (!g.invariants_pool.empty()) {
    std::vector<NamedExpression> joint = g.functions;
    joint.insert(joint.end(), g.invariants_pool.begin(), g.invariants_pool.end());
    RankRange r;
    bool first = true;
    for (const auto& z : points) widen(r, numerical_rank(jacobian(joint, z), tol.rank_rel), first);
    rep.joint_jacobian_rank = r;
  }

  const CorankResult corank = corank_structure(g, points, tol.rank_rel);
  rep.structure_matrix_rank = corank.rank;
  rep.corank_m = corank.m;
  rep.ambient_rank = rank_over(g.ambient, points, tol.rank_rel);
  rep.involution = involution_residual(g, points);
  rep.fiber_factorization_residual = fiber_factorization_residual(g, points, tol.rank_rel);
  try {
    rep.fit = fit_structure_constants(g, points, validation);
  } catch (const IllConditioned& e) {
    rep.fit_error = e.what();
  }
  if (!g.coinduced_casimirs.empty())
    rep.pullback_casimir_residual = pullback_casimir_check(g, g.coinduced_casimirs, points);

  const int ki = static_cast<int>(k);
  const int di = static_cast<int>(dim);
  const bool ambient_regular = rep.ambient_rank.constant();
  const bool nondegenerate = ambient_regular && rep.ambient_rank.max == di;

  auto require_independent = [&](VerdictBuilder& v) {
    if (!indep.pass)
      v.fail("generators dependent at " + std::to_string(indep.failing_points.size()) +
             " sample(s); min Jacobian rank " + std::to_string(indep.min_rank) + " < k = " + std::to_string(k));
  };
  auto require_fit = [&](VerdictBuilder& v) {
    if (!rep.fit) {
      v.fail("structure-constant fit unavailable: " + rep.fit_error);
      return;
    }
    if (!(rep.fit->rms_residual <= tol.fit))
      v.fail("fit rms residual " + fmt(rep.fit->rms_residual) + " > " + fmt(tol.fit));
    if (!fit_cross_validates(*rep.fit, tol.cross_validation_ratio))
      v.fail("fit does not cross-validate (" + fmt(rep.fit->validation_rms_residual) + " vs " +
             fmt(rep.fit->rms_residual) + ")");
  };
  auto require_ambient_rank = [&](VerdictBuilder& v, int expected, const std::string& what) {
    if (!ambient_regular) {
      v.non_regular("ambient rank varies between " + std::to_string(rep.ambient_rank.min) + " and " +
                    std::to_string(rep.ambient_rank.max));
    } else if (rep.ambient_rank.max != expected) {
      v.fail("ambient rank " + std::to_string(rep.ambient_rank.max) + " != " + what + " = " +
             std::to_string(expected));
    }
  };
  auto require_involution = [&](VerdictBuilder& v, bool with_pool) {
    if (!(rep.involution.generators <= tol.residual))
      v.fail("generators not in involution (max |{F_i,F_j}| = " + fmt(rep.involution.generators) + ")");
    if (with_pool && rep.involution.pool && !(*rep.involution.pool <= tol.residual))
      v.fail("pool not in involution (" + fmt(*rep.involution.pool) + ")");
    if (with_pool && rep.involution.mixed && !(*rep.involution.mixed <= tol.residual))
      v.fail("generators do not commute with the pool (" + fmt(*rep.involution.mixed) + ")");
  };

  // Completely integrable.
  {
    VerdictBuilder v;
    require_independent(v);
    require_involution(v, false);
    if (nondegenerate && 2 * ki != di)
      v.fail("k = " + std::to_string(k) + " differs from n = " + std::to_string(dim / 2));
    rep.verdicts[SystemKind::CompletelyIntegrable] = v.build();
  }
  // Commutative partially integrable.
  {
    VerdictBuilder v;
    require_independent(v);
    require_involution(v, true);
    require_ambient_rank(v, 2 * ki, "2k");
    rep.verdicts[SystemKind::CommutativePartiallyIntegrable] = v.build();
  }
  // Superintegrable.
  {
    VerdictBuilder v;
    if (!ambient_regular) {
      v.non_regular("ambient rank varies");
    } else if (!nondegenerate) {
      v.fail("ambient structure is degenerate (rank " + std::to_string(rep.ambient_rank.max) + " < " +
             std::to_string(dim) + ")");
    }
    if (di % 2 == 0 && !(ki >= di / 2 && ki < di))
      v.fail("k = " + std::to_string(k) + " outside [n, 2n)");
    require_independent(v);
    if (!(rep.fiber_factorization_residual <= tol.factorization))
      v.fail("brackets do not factor through F (residual " + fmt(rep.fiber_factorization_residual) + ")");
    if (!corank.regular())
      v.non_regular("structure-matrix rank varies between " + std::to_string(corank.rank.min) + " and " +
                    std::to_string(corank.rank.max));
    else if (rep.corank_m != di - ki)
      v.fail("corank m = " + std::to_string(rep.corank_m) + " != 2n - k = " + std::to_string(di - ki));
    rep.verdicts[SystemKind::Superintegrable] = v.build();
  }
  // Lie-algebra superintegrable.
  {
    VerdictBuilder v;
    const Verdict& base = rep.verdicts[SystemKind::Superintegrable];
    if (base.status == VerdictStatus::Fail) v.fail(base.reason);
    else if (base.status == VerdictStatus::NonRegular) v.non_regular(base.reason);
    require_fit(v);
    rep.verdicts[SystemKind::LieAlgebraSuperintegrable] = v.build();
  }
  // Partially superintegrable.
  {
    VerdictBuilder v;
    require_independent(v);
    require_fit(v);
    if (rep.involution.mixed && !(*rep.involution.mixed <= tol.residual))
      v.fail("generators do not commute with the pool (" + fmt(*rep.involution.mixed) + ")");
    if (rep.involution.pool && !(*rep.involution.pool <= tol.residual))
      v.fail("pool not in involution (" + fmt(*rep.involution.pool) + ")");
    require_ambient_rank(v, ki + rep.corank_m, "k + m");
    if (g.invariants_pool.empty()) v.not_tested("invariants pool is empty");
    rep.verdicts[SystemKind::PartiallySuperintegrable] = v.build();
  }
  return rep;
}

}  // namespace poissonkit
