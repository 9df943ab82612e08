#pragma once

// Poisson structures on a coordinate chart.
//
// Sign convention: the stored matrix is W(mu, nu) = w^{mu nu} and
//
//   {f, g}      = sum_{mu,nu} w^{mu nu} d_mu f d_nu g,
//   theta_f^nu  = sum_mu w^{mu nu} d_mu f        (Hamiltonian vector field),
//
// with canonical coordinates satisfying {p_i, q^j} = delta_i^j. In (q, p)
// order the canonical matrix is [[0, -1], [1, 0]]. The flow of H then reads
// dq/dt = dH/dp, dp/dt = -dH/dq.

#include "poissonkit/expr.hpp"
#include "poissonkit/structure_constants.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace poissonkit {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Coordinate chart: names, a sampling box and an optional domain guard.
class Chart {
 public:
  Chart() = default;
  Chart(std::vector<std::string> names, std::vector<Interval> box,
        std::optional<Predicate> guard = std::nullopt);

  /// Chart with the given names and box [lo, hi] on every axis.
  static Chart uniform(std::vector<std::string> names, double lo, double hi);

  std::size_t dimension() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Interval>& box() const { return box_; }
  const std::optional<Predicate>& guard() const { return guard_; }

  Chart with_guard(std::optional<Predicate> guard) const;
  std::size_t index_of(const std::string& name) const;

  bool in_box(const Eigen::VectorXd& z) const;
  bool admits(const Eigen::VectorXd& z) const;  // in box and guard holds

 private:
  std::vector<std::string> names_;
  std::vector<Interval> box_;
  std::optional<Predicate> guard_;
};

/// Antisymmetric matrix field given by its strict upper triangle.
class AntisymmetricField {
 public:
  struct Entry {
    std::size_t row, col;  // row < col
    Expression value;
  };

  AntisymmetricField() = default;
  AntisymmetricField(std::size_t dimension, std::vector<Entry> entries);

  std::size_t dimension() const { return dim_; }
  const std::vector<Entry>& entries() const { return entries_; }

  Eigen::MatrixXd matrix(const Eigen::VectorXd& z) const;
  /// Matrix plus partials[rho](i, j) = d_rho M(i, j).
  Eigen::MatrixXd matrix(const Eigen::VectorXd& z, std::vector<Eigen::MatrixXd>& partials) const;

 private:
  std::size_t dim_ = 0;
  std::vector<Entry> entries_;
};

struct CanonicalVariant {
  std::size_t pairs = 0;
  std::size_t extra = 0;
  /// slot -> chart index; slots are (q^1..q^m, p_1..p_m, z^1..z^extra).
  std::vector<std::size_t> slot_to_coordinate;
};

struct MatrixVariant {
  AntisymmetricField entries;
};

struct LiePoissonVariant {
  StructureConstants constants;
};

struct SymplecticInverseVariant {
  AntisymmetricField form;
};

class PoissonStructure;

struct ProductVariant {
  std::shared_ptr<const PoissonStructure> first;
  std::shared_ptr<const PoissonStructure> second;
};

/// Bivector field evaluated at a point, with first partial derivatives.
struct BivectorAt {
  Eigen::VectorXd point;
  Eigen::MatrixXd matrix;
  std::vector<Eigen::MatrixXd> partials;  // partials[rho](mu, nu) = d_rho w^{mu nu}
};

class PoissonStructure {
 public:
  using Variant = std::variant<CanonicalVariant, MatrixVariant, LiePoissonVariant,
                               SymplecticInverseVariant, ProductVariant>;

  /// Empty structure on a zero-dimensional chart; assign before use.
  PoissonStructure() = default;

  /// Coordinates ordered (q-block, p-block, zero-block) unless a permutation
  /// slot -> chart index is supplied.
  static PoissonStructure canonical(Chart chart, std::size_t pairs, std::size_t extra,
                                    std::vector<std::size_t> slot_to_coordinate = {});
  static PoissonStructure matrix(Chart chart, std::vector<AntisymmetricField::Entry> upper);
  static PoissonStructure zero(Chart chart);
  static PoissonStructure lie_poisson(Chart chart, StructureConstants c);
  /// The structure inverse to a symplectic form given by its upper entries.
  static PoissonStructure symplectic_inverse(Chart chart,
                                             std::vector<AntisymmetricField::Entry> form_upper);

  const Chart& chart() const { return chart_; }
  std::size_t dimension() const { return chart_.dimension(); }
  const Variant& variant() const { return variant_; }
  PoissonStructure with_chart(Chart chart) const;

  const char* variant_name() const;

 private:
  friend PoissonStructure product(const PoissonStructure&, const PoissonStructure&);
  PoissonStructure(Chart chart, Variant v) : chart_(std::move(chart)), variant_(std::move(v)) {}

  Chart chart_;
  Variant variant_;
};

BivectorAt bivector_at(const PoissonStructure& w, const Eigen::VectorXd& z);
/// Matrix only; no partials.
Eigen::MatrixXd bivector_matrix(const PoissonStructure& w, const Eigen::VectorXd& z);

double bracket(const PoissonStructure& w, const Expression& f, const Expression& g,
               const Eigen::VectorXd& z);
/// Gradient of {f, g} at z.
Eigen::VectorXd bracket_gradient(const PoissonStructure& w, const Expression& f,
                                 const Expression& g, const Eigen::VectorXd& z);

Eigen::VectorXd hamiltonian_field(const PoissonStructure& w, const Expression& f,
                                  const Eigen::VectorXd& z);
Eigen::VectorXd sharp(const PoissonStructure& w, const Eigen::VectorXd& covector,
                      const Eigen::VectorXd& z);
/// Inverse of sharp; requires a SymplecticInverse structure.
Eigen::VectorXd flat(const PoissonStructure& w, const Eigen::VectorXd& vector,
                     const Eigen::VectorXd& z);
/// The two-form matrix Omega(mu, nu) of a SymplecticInverse structure.
Eigen::MatrixXd two_form_matrix(const PoissonStructure& w, const Eigen::VectorXd& z);

/// max over (l, m, n) of |sum_cyclic sum_rho w^{l rho} d_rho w^{m n}|.
double jacobi_residual(const PoissonStructure& w, const Eigen::VectorXd& z);
double jacobi_residual(const BivectorAt& b);

inline constexpr double kDefaultRankTolerance = 1e-9;

/// Number of singular values >= tol_rel * largest, rounded up to even.
int numerical_rank(const Eigen::MatrixXd& m, double tol_rel);
int rank_at(const PoissonStructure& w, const Eigen::VectorXd& z,
            double tol_rel = kDefaultRankTolerance);

struct RankRange {
  int min = 0;
  int max = 0;
  bool constant() const { return min == max; }
};
RankRange rank_over(const PoissonStructure& w, const std::vector<Eigen::VectorXd>& points,
                    double tol_rel = kDefaultRankTolerance);

/// Block-diagonal product w + w'. Clashing names of the second factor get a
/// numeric suffix.
PoissonStructure product(const PoissonStructure& first, const PoissonStructure& second);

/// Norm of [theta_f, theta_g] - theta_{f,g} at z.
double field_commutator_residual(const PoissonStructure& w, const Expression& f,
                                 const Expression& g, const Eigen::VectorXd& z);

}  // namespace poissonkit
