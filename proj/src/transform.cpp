#include "poissonkit/transform.hpp"

#include "poissonkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace poissonkit {

ChartMap::ChartMap(Chart source, Chart target, std::vector<Expression> forward,
                   std::optional<std::vector<Expression>> inverse)
    : source_(std::move(source)), target_(std::move(target)), forward_(std::move(forward)), inverse_(std::move(inverse)) {
  if (forward_.size() != target_.dimension())
    throw ArgumentError("map needs one forward expression per target coordinate");
  for (const auto& e : forward_)
    if (e.arity() != source_.dimension()) throw ArgumentError("forward expression arity must equal source dimension");
  if (inverse_) {
    if (inverse_->size() != source_.dimension())
      throw ArgumentError("map needs one inverse expression per source coordinate");
    for (const auto& e : *inverse_)
      if (e.arity() != target_.dimension()) throw ArgumentError("inverse expression arity must equal target dimension");
  }
}

Eigen::VectorXd ChartMap::apply(const Eigen::VectorXd& z) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(forward_.size()));
  for (std::size_t i = 0; i < forward_.size(); ++i) y(static_cast<Eigen::Index>(i)) = eval(forward_[i], z);
  return y;
}

Eigen::VectorXd ChartMap::apply_inverse(const Eigen::VectorXd& y) const {
  if (!inverse_) throw ArgumentError("map has no inverse");
  Eigen::VectorXd z(static_cast<Eigen::Index>(inverse_->size()));
  for (std::size_t i = 0; i < inverse_->size(); ++i) z(static_cast<Eigen::Index>(i)) = eval((*inverse_)[i], y);
  return z;
}

Eigen::MatrixXd ChartMap::jacobian(const Eigen::VectorXd& z) const {
  Eigen::MatrixXd j(static_cast<Eigen::Index>(forward_.size()), static_cast<Eigen::Index>(source_.dimension()));
  for (std::size_t i = 0; i < forward_.size(); ++i)
    j.row(static_cast<Eigen::Index>(i)) = eval_jet1(forward_[i], z).gradient.transpose();
  return j;
}

double ChartMap::roundtrip_residual(const std::vector<Eigen::VectorXd>& points) const {
  double worst = 0.0;
  for (const auto& z : points) {
    const Eigen::VectorXd y = apply(z);
    worst = std::max(worst, (apply(apply_inverse(y)) - y).cwiseAbs().maxCoeff());
  }
  return worst;
}

Eigen::MatrixXd pushforward_bivector(const PoissonStructure& w, const ChartMap& phi, const Eigen::VectorXd& z) {
  if (phi.source().dimension() != w.dimension()) throw ArgumentError("map source does not match the structure chart");
  const Eigen::MatrixXd j = phi.jacobian(z);
  const Eigen::MatrixXd m = j * bivector_matrix(w, z) * j.transpose();
  return 0.5 * (m - m.transpose());
}

Eigen::MatrixXd pullback_twoform(const AntisymmetricField& omega, const ChartMap& phi, const Eigen::VectorXd& z) {
  if (omega.dimension() != phi.target().dimension()) throw ArgumentError("form dimension does not match map target");
  const Eigen::MatrixXd j = phi.jacobian(z);
  const Eigen::MatrixXd m = j.transpose() * omega.matrix(phi.apply(z)) * j;
  return 0.5 * (m - m.transpose());
}

std::string to_string(BlockPattern p) {
  switch (p) {
    case BlockPattern::SymplecticAA: return "symplectic-aa";
    case BlockPattern::PoissonAA: return "poisson-aa";
    case BlockPattern::PoissonAAWithBlock: return "poisson-aa-block";
  }
  return "symplectic-aa";
}

BlockPattern block_pattern_from_string(const std::string& s) {
  for (BlockPattern p : {BlockPattern::SymplecticAA, BlockPattern::PoissonAA, BlockPattern::PoissonAAWithBlock})
    if (to_string(p) == s) return p;
  throw ArgumentError("unknown pattern '" + s + "'");
}

void CanonicalFormSpec::validate(std::size_t target_dimension) const {
  if (actions.size() != angles.size()) throw ArgumentError("actions and angles must pair up");
  std::set<std::size_t> seen;
  for (const auto* group : {&actions, &angles, &passive})
    for (std::size_t i : *group) {
      if (i >= target_dimension) throw ArgumentError("coordinate index " + std::to_string(i) + " out of range");
      if (!seen.insert(i).second) throw ArgumentError("coordinate index " + std::to_string(i) + " used twice");
    }
}

CanonicalFormResult canonical_form_check(const PoissonStructure& w, const ChartMap& phi,
                                         const CanonicalFormSpec& spec,
                                         const std::vector<Eigen::VectorXd>& points, double tol) {
  const std::size_t dim = phi.target().dimension();
  spec.validate(dim);
  if (dim != phi.source().dimension()) throw RankError("canonical-form check needs a square map");

  std::vector<std::size_t> passive = spec.passive;
  if (passive.empty()) {
    std::set<std::size_t> used(spec.actions.begin(), spec.actions.end());
    used.insert(spec.angles.begin(), spec.angles.end());
    for (std::size_t i = 0; i < dim; ++i)
      if (!used.count(i)) passive.push_back(i);
  }

  // expected(i, j): target value, or NaN where the entry is unconstrained.
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t a = 0; a < spec.actions.size(); ++a) {
    const auto i = static_cast<Eigen::Index>(spec.actions[a]);
    const auto j = static_cast<Eigen::Index>(spec.angles[a]);
    expected(i, j) = 1.0;
    expected(j, i) = -1.0;
  }
  if (spec.pattern != BlockPattern::PoissonAA)
    for (std::size_t a : passive)
      for (std::size_t b : passive) expected(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = NAN;
  // Coordinates outside every index set are not part of the pattern.
  std::set<std::size_t> covered(passive.begin(), passive.end());
  covered.insert(spec.actions.begin(), spec.actions.end());
  covered.insert(spec.angles.begin(), spec.angles.end());
  for (std::size_t i = 0; i < dim; ++i)
    if (!covered.count(i)) {
      expected.row(static_cast<Eigen::Index>(i)).setConstant(NAN);
      expected.col(static_cast<Eigen::Index>(i)).setConstant(NAN);
    }

  CanonicalFormResult out;
  out.pass = true;
  for (const auto& z : points) {
    const Eigen::MatrixXd j = phi.jacobian(z);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || !(s(s.size() - 1) > 1e-12 * std::max(1.0, s(0))))
      throw RankError("map Jacobian is singular at a sample point");
    const Eigen::MatrixXd wt = pushforward_bivector(w, phi, z);
    double dev = 0.0;
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c)
        if (!std::isnan(expected(r, c))) dev = std::max(dev, std::abs(wt(r, c) - expected(r, c)));
    if (out.worst_point.size() == 0 || dev > out.max_deviation) {
      out.max_deviation = dev;
      out.worst_point = z;
    }
    if (spec.pattern == BlockPattern::SymplecticAA && numerical_rank(wt, kDefaultRankTolerance) != n) {
      out.pass = false;
      out.reason = "transformed structure is degenerate";
    }
  }
  if (!(out.max_deviation <= tol)) {
    out.pass = false;
    if (out.reason.empty()) out.reason = "deviation from the canonical pattern exceeds tolerance";
  }
  return out;
}

namespace {

Eigen::MatrixXd column_basis(const Eigen::MatrixXd& m, int& rank) {
  rank = numerical_rank(m, kDefaultRankTolerance);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);
  return svd.matrixU().leftCols(rank);
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, int rank) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.cols(), m.rows());
  for (int i = 0; i < rank; ++i) out += svd.matrixV().col(i) * (1.0 / s(i)) * svd.matrixU().col(i).transpose();
  return out;
}

}  // namespace

RecursionResult recursion_operator(const Eigen::MatrixXd& w, const Eigen::MatrixXd& w_prime, double tol) {
  if (w.rows() != w.cols() || w.rows() != w_prime.rows() || w_prime.rows() != w_prime.cols())
    throw ArgumentError("recursion operator needs two square matrices of equal size");
  const Eigen::Index n = w.rows();
  RecursionResult out;

  int r = 0, r_prime = 0;
  const Eigen::MatrixXd u = column_basis(w, r);
  const Eigen::MatrixXd u_prime = column_basis(w_prime, r_prime);
  // Sines of the principal angles; asin stays accurate for tiny angles.
  std::vector<double> angles;
  if (r != r_prime) {
    angles.assign(static_cast<std::size_t>(std::abs(r - r_prime)), M_PI / 2);
  } else if (r > 0) {
    const Eigen::MatrixXd residual = u_prime - u * (u.transpose() * u_prime);
    const Eigen::VectorXd s = residual.jacobiSvd().singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) angles.push_back(std::asin(std::min(1.0, s(i))));
  }
  if (r != r_prime || std::any_of(angles.begin(), angles.end(), [&](double a) { return a > tol; }))
    throw DistributionsDiffer(angles);

  out.characteristic_rank = r;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  if (w == w_prime) {
    out.R = identity;
    out.R_dual = identity;
  } else {
    const Eigen::MatrixXd w_plus = pseudo_inverse(w, r);
    const Eigen::MatrixXd block = u.transpose() * w_prime * w_plus * u;
    const Eigen::MatrixXd block_dual = u.transpose() * w_plus * w_prime * u;
    for (const Eigen::MatrixXd* b : {&block, &block_dual}) {
      if (r == 0) break;
      const Eigen::VectorXd s = b->jacobiSvd().singularValues();
      if (!(s(s.size() - 1) > 1e-12 * std::max(1.0, s(0))))
        throw SingularRestriction("restriction of w' w^+ to the characteristic subspace is singular");
    }
    const Eigen::MatrixXd complement = identity - u * u.transpose();
    out.R = u * block * u.transpose() + complement;
    out.R_dual = u * block_dual * u.transpose() + complement;
  }
  out.residual_forward = (w_prime - out.R * w).norm();
  out.residual_dual = (w_prime - w * out.R_dual).norm();
  out.determinant = out.R.determinant();
  return out;
}

RecursionResult recursion_operator(const PoissonStructure& w, const PoissonStructure& w_prime,
                                   const Eigen::VectorXd& z, double tol) {
  if (w.dimension() != w_prime.dimension()) throw ArgumentError("structures live on charts of different dimension");
  return recursion_operator(bivector_matrix(w, z), bivector_matrix(w_prime, z), tol);
}

}  // namespace poissonkit
