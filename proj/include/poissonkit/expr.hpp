#pragma once

// Scalar expressions over a fixed coordinate list, with exact first and
// second derivatives by forward propagation.

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace poissonkit {

enum class NodeKind {
  Constant,
  Coordinate,
  Negate,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Sin,
  Cos,
  Tan,
  Exp,
  Ln,
  Sqrt,
  Atan2,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind;
  double value = 0.0;       // Constant
  std::size_t index = 0;    // Coordinate
  std::array<NodePtr, 2> args{};
  bool varies = false;      // some Coordinate occurs below
};

/// Value, gradient and Hessian of a scalar field at a point.
struct Jet2 {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// First-order jet; what flows and brackets need.
struct Jet1 {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Immutable parsed expression. Copies share the tree.
class Expression {
 public:
  Expression() = default;
  Expression(NodePtr root, std::size_t arity);

  static Expression constant(double c, std::size_t arity);
  static Expression coordinate(std::size_t index, std::size_t arity);

  const NodePtr& root() const { return root_; }
  std::size_t arity() const { return arity_; }
  bool empty() const { return root_ == nullptr; }

  /// True when no Coordinate node occurs in the tree.
  bool is_constant() const;

 private:
  NodePtr root_;
  std::size_t arity_ = 0;
};

Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression operator*(double c, const Expression& a);
Expression pow(const Expression& base, const Expression& exponent);

Expression parse(std::string_view text, std::span<const std::string> coordinates);
Expression parse(std::string_view text, std::initializer_list<std::string> coordinates);

/// Fully parenthesised text that parses back to the same tree.
std::string print(const Expression& e, std::span<const std::string> coordinates);
/// As above, with coordinates printed as x0, x1, ...
std::string print(const Expression& e);

bool structurally_equal(const Expression& a, const Expression& b);

double eval(const Expression& e, const Eigen::VectorXd& z);
Jet1 eval_jet1(const Expression& e, const Eigen::VectorXd& z);
Jet2 eval_jet2(const Expression& e, const Eigen::VectorXd& z);

/// Replace coordinate i of `e` by `replacements[i]`; all replacements share
/// one arity, which becomes the arity of the result.
Expression substitute(const Expression& e, std::span<const Expression> replacements);

/// Reinterpret `e` on a larger chart whose coordinate j is old coordinate
/// j - offset (so new coordinates [offset, offset + e.arity()) are used).
Expression embed(const Expression& e, std::size_t new_arity, std::size_t offset = 0);

bool is_valid_identifier(std::string_view name);
bool is_reserved_word(std::string_view name);
/// Throws ArgumentError if names are invalid, reserved or repeated.
void check_coordinate_names(std::span<const std::string> names);

// ---------------------------------------------------------------- predicates

enum class Comparison { Less, LessEqual, Greater, GreaterEqual };

struct PredicateNode;
using PredicatePtr = std::shared_ptr<const PredicateNode>;

struct PredicateNode {
  enum class Kind { Compare, And, Or } kind;
  Comparison op = Comparison::Less;
  Expression lhs, rhs;
  PredicatePtr left, right;
};

/// Boolean guard built from comparisons of expressions.
class Predicate {
 public:
  Predicate() = default;
  Predicate(PredicatePtr root, std::size_t arity) : root_(std::move(root)), arity_(arity) {}

  static Predicate compare(Expression lhs, Comparison op, Expression rhs);
  Predicate operator&&(const Predicate& other) const;
  Predicate operator||(const Predicate& other) const;

  const PredicatePtr& root() const { return root_; }
  std::size_t arity() const { return arity_; }

 private:
  PredicatePtr root_;
  std::size_t arity_ = 0;
};

Predicate parse_predicate(std::string_view text, std::span<const std::string> coordinates);
std::string print(const Predicate& p, std::span<const std::string> coordinates);
bool eval_predicate(const Predicate& p, const Eigen::VectorXd& z);
Predicate embed(const Predicate& p, std::size_t new_arity, std::size_t offset = 0);

/// Guard evaluation that treats a domain error as "outside".
bool satisfies(const std::optional<Predicate>& guard, const Eigen::VectorXd& z);

}  // namespace poissonkit
