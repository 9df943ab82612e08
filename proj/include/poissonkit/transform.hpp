#pragma once

// Coordinate maps, push-forward of bivectors, pull-back of two-forms,
// canonical-form checks and recursion operators.

#include "poissonkit/poisson.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace poissonkit {

class ChartMap {
 public:
  ChartMap() = default;
  /// `forward` holds target-dimension expressions in source coordinates;
  /// `inverse`, when given, source-dimension expressions in target coordinates.
  ChartMap(Chart source, Chart target, std::vector<Expression> forward,
           std::optional<std::vector<Expression>> inverse = std::nullopt);

  const Chart& source() const { return source_; }
  const Chart& target() const { return target_; }
  const std::vector<Expression>& forward() const { return forward_; }
  const std::optional<std::vector<Expression>>& inverse() const { return inverse_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& z) const;
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& y) const;  // throws ArgumentError without inverse
  /// J(i, j) = d forward_i / d z_j.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& z) const;

  /// max |forward(inverse(forward(z))) - forward(z)| over points.
  double roundtrip_residual(const std::vector<Eigen::VectorXd>& points) const;

 private:
  Chart source_;
  Chart target_;
  std::vector<Expression> forward_;
  std::optional<std::vector<Expression>> inverse_;
};

/// J w J^T at phi(z).
Eigen::MatrixXd pushforward_bivector(const PoissonStructure& w, const ChartMap& phi, const Eigen::VectorXd& z);

/// J^T Omega(phi(z)) J, with Omega given by upper entries in target coordinates.
Eigen::MatrixXd pullback_twoform(const AntisymmetricField& omega, const ChartMap& phi, const Eigen::VectorXd& z);

enum class BlockPattern { SymplecticAA, PoissonAA, PoissonAAWithBlock };

std::string to_string(BlockPattern p);
/// Accepts "symplectic-aa", "poisson-aa" and "poisson-aa-block".
BlockPattern block_pattern_from_string(const std::string& s);

struct CanonicalFormSpec {
  std::vector<std::size_t> actions;
  std::vector<std::size_t> angles;   // paired with actions by position
  std::vector<std::size_t> passive;  // empty: every remaining target coordinate
  BlockPattern pattern = BlockPattern::SymplecticAA;

  /// Throws ArgumentError on overlapping, out-of-range or unpaired indices.
  void validate(std::size_t target_dimension) const;
};

struct CanonicalFormResult {
  bool pass = false;
  double max_deviation = 0.0;
  Eigen::VectorXd worst_point;
  std::string reason;
};

/// Transforms the bivector to target coordinates at every point and measures
/// the largest deviation from the declared pattern. In target coordinates the
/// pattern asks {I_i, y^j} = delta_ij, no action-action, angle-angle or
/// passive couplings, and (for PoissonAA) a vanishing passive block.
/// SymplecticAA further requires the transformed bivector to be
/// nondegenerate. Throws RankError when the map Jacobian is singular.
CanonicalFormResult canonical_form_check(const PoissonStructure& w, const ChartMap& phi,
                                         const CanonicalFormSpec& spec,
                                         const std::vector<Eigen::VectorXd>& points, double tol = 1e-10);

struct RecursionResult {
  Eigen::MatrixXd R;
  Eigen::MatrixXd R_dual;
  double residual_forward = 0.0;  // ||W' - R W||_F
  double residual_dual = 0.0;     // ||W' - W R_dual||_F
  int characteristic_rank = 0;
  double determinant = 0.0;
};

/// Recursion operator of the pair (w, w') at z. R acts as W' W^+ on the
/// common characteristic subspace and as the identity on its orthogonal
/// complement. Throws DistributionsDiffer when the column spaces disagree by
/// more than `tol` radians, SingularRestriction when the restricted block is
/// singular.
RecursionResult recursion_operator(const PoissonStructure& w, const PoissonStructure& w_prime,
                                   const Eigen::VectorXd& z, double tol = 1e-8);

/// Matrix-level variant used by the structure-level one.
RecursionResult recursion_operator(const Eigen::MatrixXd& w, const Eigen::MatrixXd& w_prime, double tol = 1e-8);

}  // namespace poissonkit
