#pragma once

// Sampled verification of (super)integrability conditions for a declared
// generating set F_1..F_k on a Poisson chart. Every "for all points"
// statement is checked on seeded random samples; a Pass is a sampled
// verification, not a proof.

#include "poissonkit/poisson.hpp"
#include "poissonkit/structure_constants.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace poissonkit {

enum class SystemKind {
  CompletelyIntegrable,
  CommutativePartiallyIntegrable,
  Superintegrable,
  LieAlgebraSuperintegrable,
  PartiallySuperintegrable,
  Unspecified,
};

std::string to_string(SystemKind k);
/// Accepts the snake_case spellings used in system files.
SystemKind system_kind_from_string(const std::string& s);

struct NamedExpression {
  std::string name;
  Expression expr;
};

struct GeneratingSet {
  PoissonStructure ambient;
  std::vector<NamedExpression> functions;
  std::optional<Predicate> guard;  // in addition to the chart guard
  SystemKind declared_kind = SystemKind::Unspecified;
  std::vector<NamedExpression> invariants_pool;
  /// Expressions in k target variables x1..xk, pulled back through F.
  std::vector<Expression> coinduced_casimirs;

  std::size_t size() const { return functions.size(); }
  /// Throws ArgumentError on arity mismatches or repeated names.
  void validate() const;
};

struct Tolerances {
  double residual = 1e-8;        // brackets that must vanish
  double rank_rel = 1e-9;        // relative singular-value cut-off
  double fit = 1e-6;             // rms misfit of the structure-constant fit
  double factorization = 1e-6;   // fibre-factorisation residual
  double cross_validation_ratio = 10.0;
};

struct IndependenceResult {
  int min_rank = 0;
  std::vector<Eigen::VectorXd> failing_points;
  bool pass = false;
};

IndependenceResult independence_check(const GeneratingSet& g, const std::vector<Eigen::VectorXd>& points,
                                      double tol_rel = kDefaultRankTolerance);

/// s_ij = {F_i, F_j} at z; exactly antisymmetric.
Eigen::MatrixXd structure_matrix(const GeneratingSet& g, const Eigen::VectorXd& z);

/// Largest relative component of grad {F_i, F_j} orthogonal to the row space
/// of dF, over points and pairs.
double fiber_factorization_residual(const GeneratingSet& g, const std::vector<Eigen::VectorXd>& points,
                                    double tol_rel = kDefaultRankTolerance);

struct CorankResult {
  int m = 0;
  RankRange rank;
  bool regular() const { return rank.constant(); }
};

CorankResult corank_structure(const GeneratingSet& g, const std::vector<Eigen::VectorXd>& points,
                              double tol_rel = kDefaultRankTolerance);

struct FitResult {
  StructureConstants constants;
  double rms_residual = 0.0;
  double validation_rms_residual = 0.0;
  double gram_condition = 0.0;
};

/// Least-squares fit of {F_i, F_j} = sum_h c^h_ij F_h over `points`, pair by
/// pair, with the misfit of the same constants reported on `validation`.
/// Throws IllConditioned when the Gram matrix of F values has condition
/// number above 1e12.
FitResult fit_structure_constants(const GeneratingSet& g, const std::vector<Eigen::VectorXd>& points,
                                  const std::vector<Eigen::VectorXd>& validation);

/// Minimum sample count for a fit with k generators: k^3/2 + 10.
std::size_t minimum_fit_samples(std::size_t k);

/// Cross-validation rule: second-sample misfit below ratio times the first
/// (with the first floored at 1e-12, the round-off level).
bool fit_cross_validates(const FitResult& fit, double ratio);

struct InvolutionResiduals {
  double generators = 0.0;            // max |{F_i, F_j}|
  std::optional<double> pool;         // max |{f, f'}| over pool pairs
  std::optional<double> mixed;        // max |{F_i, f}|
};

InvolutionResiduals involution_residual(const GeneratingSet& g, const std::vector<Eigen::VectorXd>& points);

/// S_l = C_l(F_1, ..., F_k); returns max |{S_l, F_i}| over points.
double pullback_casimir_check(const GeneratingSet& g, const std::vector<Expression>& casimirs,
                              const std::vector<Eigen::VectorXd>& points);

/// The pull-back expressions S_l = C_l(F) on the ambient chart.
std::vector<Expression> pullback(const GeneratingSet& g, const std::vector<Expression>& casimirs);

enum class VerdictStatus { Pass, Fail, NonRegular, NotTested };
std::string to_string(VerdictStatus s);

struct Verdict {
  VerdictStatus status = VerdictStatus::NotTested;
  std::string reason;
};

struct ClassifyConfig {
  std::size_t samples = 200;
  std::uint64_t seed = 42;
  Tolerances tolerances;
};

struct ClassificationReport {
  std::size_t k = 0;
  std::size_t dimension = 0;
  std::size_t samples = 0;
  RankRange jacobian_rank;
  RankRange structure_matrix_rank;
  int corank_m = 0;
  std::optional<FitResult> fit;
  std::string fit_error;
  InvolutionResiduals involution;
  double fiber_factorization_residual = 0.0;
  RankRange ambient_rank;
  std::optional<double> pullback_casimir_residual;
  /// Rank of the joint Jacobian of generators and pool; informational only.
  std::optional<RankRange> joint_jacobian_rank;
  std::map<SystemKind, Verdict> verdicts;
  SystemKind declared_kind = SystemKind::Unspecified;

  /// Verdict of the declared kind; Unspecified yields a synthetic Pass.
  Verdict declared() const;
};

ClassificationReport classify(const GeneratingSet& g, const ClassifyConfig& config = {});

}  // namespace poissonkit
