#include "poissonkit/expr.hpp"

#include "poissonkit/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <unordered_set>

namespace poissonkit {

namespace {

const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Constant: return "constant";
    case NodeKind::Coordinate: return "coordinate";
    case NodeKind::Negate: return "negate";
    case NodeKind::Add: return "add";
    case NodeKind::Sub: return "sub";
    case NodeKind::Mul: return "mul";
    case NodeKind::Div: return "div";
    case NodeKind::Pow: return "pow";
    case NodeKind::Sin: return "sin";
    case NodeKind::Cos: return "cos";
    case NodeKind::Tan: return "tan";
    case NodeKind::Exp: return "exp";
    case NodeKind::Ln: return "ln";
    case NodeKind::Sqrt: return "sqrt";
    case NodeKind::Atan2: return "atan2";
  }
  return "?";
}

NodePtr make_constant(double c) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Constant;
  n->value = c;
  return n;
}

NodePtr make_coordinate(std::size_t i) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Coordinate;
  n->index = i;
  n->varies = true;
  return n;
}

NodePtr make_node(NodeKind k, NodePtr a, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->varies = a->varies || (b && b->varies);
  n->args = {std::move(a), std::move(b)};
  return n;
}

bool is_binary(NodeKind k) {
  return k == NodeKind::Add || k == NodeKind::Sub || k == NodeKind::Mul ||
         k == NodeKind::Div || k == NodeKind::Pow || k == NodeKind::Atan2;
}

const std::unordered_set<std::string_view>& reserved() {
  static const std::unordered_set<std::string_view> words = {
      "sin", "cos", "tan", "exp", "ln", "sqrt", "atan2", "pi", "and", "or"};
  return words;
}

[[noreturn]] void domain_error(NodeKind k, const Eigen::VectorXd& z) {
  throw DomainError(kind_name(k), std::vector<double>(z.data(), z.data() + z.size()));
}

// ------------------------------------------------------------------ lexing

enum class Tok { Number, Ident, Op, End };

struct Token {
  Tok type;
  std::string text;
  double number = 0.0;
  std::size_t pos = 0;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
          i = j;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        } else {
          throw SyntaxError(j, "digits in exponent");
        }
      }
      std::string text(s.substr(start, i - start));
      out.push_back({Tok::Number, text, std::strtod(text.c_str(), nullptr), start});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), 0.0, start});
      continue;
    }
    if ((c == '<' || c == '>') && i + 1 < s.size() && s[i + 1] == '=') {
      out.push_back({Tok::Op, std::string(s.substr(i, 2)), 0.0, start});
      i += 2;
      continue;
    }
    if (std::string_view("+-*/^(),<>").find(c) != std::string_view::npos) {
      out.push_back({Tok::Op, std::string(1, c), 0.0, start});
      ++i;
      continue;
    }
    throw SyntaxError(i, "a number, identifier or operator");
  }
  out.push_back({Tok::End, "", 0.0, s.size()});
  return out;
}

// ----------------------------------------------------------------- parsing

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> coords)
      : tokens_(tokenize(text)), coords_(coords) {}

  NodePtr expression() {
    NodePtr lhs = term();
    while (peek_op("+") || peek_op("-")) {
      const NodeKind k = next().text == "+" ? NodeKind::Add : NodeKind::Sub;
      lhs = make_node(k, lhs, term());
    }
    return lhs;
  }

  std::shared_ptr<const PredicateNode> predicate() {
    auto lhs = conjunction();
    while (peek_ident("or")) {
      next();
      auto n = std::make_shared<PredicateNode>();
      n->kind = PredicateNode::Kind::Or;
      n->left = lhs;
      n->right = conjunction();
      lhs = n;
    }
    return lhs;
  }

  void expect_end() {
    if (tokens_[pos_].type != Tok::End) throw SyntaxError(tokens_[pos_].pos, "end of input");
  }

  bool at_end() const { return tokens_[pos_].type == Tok::End; }

 private:
  std::shared_ptr<const PredicateNode> conjunction() {
    auto lhs = comparison();
    while (peek_ident("and")) {
      next();
      auto n = std::make_shared<PredicateNode>();
      n->kind = PredicateNode::Kind::And;
      n->left = lhs;
      n->right = comparison();
      lhs = n;
    }
    return lhs;
  }

  std::shared_ptr<const PredicateNode> comparison() {
    // Try "expr op expr" first; fall back to a parenthesised predicate.
    const std::size_t save = pos_;
    try {
      NodePtr lhs = expression();
      Comparison op;
      if (!comparison_op(op)) throw SyntaxError(tokens_[pos_].pos, "comparison operator");
      NodePtr rhs = expression();
      auto n = std::make_shared<PredicateNode>();
      n->kind = PredicateNode::Kind::Compare;
      n->op = op;
      n->lhs = Expression(lhs, coords_.size());
      n->rhs = Expression(rhs, coords_.size());
      return n;
    } catch (const SyntaxError&) {
      pos_ = save;
      if (!peek_op("(")) throw;
      next();
      auto inner = predicate();
      expect_op(")");
      return inner;
    }
  }

  bool comparison_op(Comparison& op) {
    const Token& t = tokens_[pos_];
    if (t.type != Tok::Op) return false;
    if (t.text == "<") op = Comparison::Less;
    else if (t.text == "<=") op = Comparison::LessEqual;
    else if (t.text == ">") op = Comparison::Greater;
    else if (t.text == ">=") op = Comparison::GreaterEqual;
    else return false;
    ++pos_;
    return true;
  }

  NodePtr term() {
    NodePtr lhs = factor();
    while (peek_op("*") || peek_op("/")) {
      const NodeKind k = next().text == "*" ? NodeKind::Mul : NodeKind::Div;
      lhs = make_node(k, lhs, factor());
    }
    return lhs;
  }

  // '^' binds tighter than unary minus and associates to the right.
  NodePtr factor() {
    if (peek_op("-")) {
      next();
      return make_node(NodeKind::Negate, factor());
    }
    NodePtr base = atom();
    if (peek_op("^")) {
      next();
      return make_node(NodeKind::Pow, base, factor());
    }
    return base;
  }

  NodePtr atom() {
    const Token& t = tokens_[pos_];
    if (t.type == Tok::Number) {
      ++pos_;
      return make_constant(t.number);
    }
    if (t.type == Tok::Op && t.text == "(") {
      ++pos_;
      NodePtr inner = expression();
      expect_op(")");
      return inner;
    }
    if (t.type == Tok::Ident) {
      ++pos_;
      if (peek_op("(")) return call(t);
      if (t.text == "pi") return make_constant(std::numbers::pi);
      for (std::size_t i = 0; i < coords_.size(); ++i)
        if (coords_[i] == t.text) return make_coordinate(i);
      throw UnknownIdentifier(t.text);
    }
    throw SyntaxError(t.pos, "a number, identifier or '('");
  }

  NodePtr call(const Token& name) {
    next();  // '('
    std::vector<NodePtr> args{expression()};
    while (peek_op(",")) {
      next();
      args.push_back(expression());
    }
    expect_op(")");
    static const std::pair<const char*, NodeKind> unary[] = {
        {"sin", NodeKind::Sin}, {"cos", NodeKind::Cos}, {"tan", NodeKind::Tan},
        {"exp", NodeKind::Exp}, {"ln", NodeKind::Ln},   {"sqrt", NodeKind::Sqrt}};
    for (const auto& [fname, kind] : unary) {
      if (name.text == fname) {
        if (args.size() != 1) throw ArityError(name.text, args.size());
        return make_node(kind, args[0]);
      }
    }
    if (name.text == "atan2") {
      if (args.size() != 2) throw ArityError(name.text, args.size());
      return make_node(NodeKind::Atan2, args[0], args[1]);
    }
    throw UnknownIdentifier(name.text);
  }

  bool peek_op(std::string_view op) const {
    return tokens_[pos_].type == Tok::Op && tokens_[pos_].text == op;
  }
  bool peek_ident(std::string_view id) const {
    return tokens_[pos_].type == Tok::Ident && tokens_[pos_].text == id;
  }
  const Token& next() { return tokens_[pos_++]; }
  void expect_op(std::string_view op) {
    if (!peek_op(op)) throw SyntaxError(tokens_[pos_].pos, "'" + std::string(op) + "'");
    ++pos_;
  }

  std::vector<Token> tokens_;
  std::span<const std::string> coords_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- printing

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_node(const Node& n, std::span<const std::string> coords, std::ostringstream& os) {
  auto name_of = [&](std::size_t i) {
    return coords.empty() ? "x" + std::to_string(i) : coords[i];
  };
  switch (n.kind) {
    case NodeKind::Constant:
      if (n.value < 0 || std::signbit(n.value)) {
        // Not produced by the parser; printed as a negation.
        os << "(-" << format_number(-n.value) << ")";
      } else {
        os << format_number(n.value);
      }
      return;
    case NodeKind::Coordinate: os << name_of(n.index); return;
    case NodeKind::Negate:
      os << "(-";
      print_node(*n.args[0], coords, os);
      os << ")";
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div:
    case NodeKind::Pow: {
      const char* op = n.kind == NodeKind::Add   ? " + "
                       : n.kind == NodeKind::Sub ? " - "
                       : n.kind == NodeKind::Mul ? "*"
                       : n.kind == NodeKind::Div ? "/"
                                                 : "^";
      os << "(";
      print_node(*n.args[0], coords, os);
      os << op;
      print_node(*n.args[1], coords, os);
      os << ")";
      return;
    }
    case NodeKind::Atan2:
      os << "atan2(";
      print_node(*n.args[0], coords, os);
      os << ", ";
      print_node(*n.args[1], coords, os);
      os << ")";
      return;
    default:
      os << kind_name(n.kind) << "(";
      print_node(*n.args[0], coords, os);
      os << ")";
      return;
  }
}

bool nodes_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == NodeKind::Constant) return a.value == b.value;
  if (a.kind == NodeKind::Coordinate) return a.index == b.index;
  if (!nodes_equal(*a.args[0], *b.args[0])) return false;
  if (is_binary(a.kind)) return nodes_equal(*a.args[1], *b.args[1]);
  return true;
}

// -------------------------------------------------------------- evaluation

double eval_value(const Node& n, const Eigen::VectorXd& z) {
  switch (n.kind) {
    case NodeKind::Constant: return n.value;
    case NodeKind::Coordinate: return z[static_cast<Eigen::Index>(n.index)];
    case NodeKind::Negate: return -eval_value(*n.args[0], z);
    case NodeKind::Add: return eval_value(*n.args[0], z) + eval_value(*n.args[1], z);
    case NodeKind::Sub: return eval_value(*n.args[0], z) - eval_value(*n.args[1], z);
    case NodeKind::Mul: return eval_value(*n.args[0], z) * eval_value(*n.args[1], z);
    case NodeKind::Div: {
      const double d = eval_value(*n.args[1], z);
      if (d == 0.0) domain_error(n.kind, z);
      return eval_value(*n.args[0], z) / d;
    }
    case NodeKind::Pow: {
      const double a = eval_value(*n.args[0], z);
      const double b = eval_value(*n.args[1], z);
      if (!n.args[1]->varies && b == std::nearbyint(b)) {
        if (a == 0.0 && b < 0) domain_error(n.kind, z);
        return std::pow(a, b);
      }
      if (a <= 0.0) domain_error(n.kind, z);
      return std::exp(b * std::log(a));
    }
    case NodeKind::Sin: return std::sin(eval_value(*n.args[0], z));
    case NodeKind::Cos: return std::cos(eval_value(*n.args[0], z));
    case NodeKind::Tan: {
      const double u = eval_value(*n.args[0], z);
      if (std::cos(u) == 0.0) domain_error(n.kind, z);
      return std::tan(u);
    }
    case NodeKind::Exp: return std::exp(eval_value(*n.args[0], z));
    case NodeKind::Ln: {
      const double u = eval_value(*n.args[0], z);
      if (u <= 0.0) domain_error(n.kind, z);
      return std::log(u);
    }
    case NodeKind::Sqrt: {
      const double u = eval_value(*n.args[0], z);
      if (u <= 0.0) domain_error(n.kind, z);
      return std::sqrt(u);
    }
    case NodeKind::Atan2: {
      const double y = eval_value(*n.args[0], z);
      const double x = eval_value(*n.args[1], z);
      if (x == 0.0 && y == 0.0) domain_error(n.kind, z);
      return std::atan2(y, x);
    }
  }
  return 0.0;
}

// Jet with runtime order: 1 keeps gradients, 2 also Hessians.
struct Jet {
  double v = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
};

class JetEvaluator {
 public:
  JetEvaluator(const Eigen::VectorXd& z, int order) : z_(z), order_(order), n_(z.size()) {}

  Jet eval(const Node& n) const {
    switch (n.kind) {
      case NodeKind::Constant: return constant(n.value);
      case NodeKind::Coordinate: {
        Jet j = constant(z_[static_cast<Eigen::Index>(n.index)]);
        j.g[static_cast<Eigen::Index>(n.index)] = 1.0;
        return j;
      }
      case NodeKind::Negate: {
        Jet j = eval(*n.args[0]);
        j.v = -j.v;
        j.g = -j.g;
        if (order_ > 1) j.h = -j.h;
        return j;
      }
      case NodeKind::Add:
      case NodeKind::Sub: {
        Jet a = eval(*n.args[0]);
        const Jet b = eval(*n.args[1]);
        const double s = n.kind == NodeKind::Add ? 1.0 : -1.0;
        a.v = n.kind == NodeKind::Add ? a.v + b.v : a.v - b.v;
        a.g += s * b.g;
        if (order_ > 1) a.h += s * b.h;
        return a;
      }
      case NodeKind::Mul: return product(eval(*n.args[0]), eval(*n.args[1]));
      case NodeKind::Div: {
        const Jet b = eval(*n.args[1]);
        if (b.v == 0.0) domain_error(n.kind, z_);
        const double inv = 1.0 / b.v;
        return product(eval(*n.args[0]), chain(b, inv, -inv * inv, 2.0 * inv * inv * inv));
      }
      case NodeKind::Pow: return power(n);
      case NodeKind::Sin: {
        const Jet u = eval(*n.args[0]);
        const double s = std::sin(u.v), c = std::cos(u.v);
        return chain(u, s, c, -s);
      }
      case NodeKind::Cos: {
        const Jet u = eval(*n.args[0]);
        const double s = std::sin(u.v), c = std::cos(u.v);
        return chain(u, c, -s, -c);
      }
      case NodeKind::Tan: {
        const Jet u = eval(*n.args[0]);
        const double c = std::cos(u.v);
        if (c == 0.0) domain_error(n.kind, z_);
        const double t = std::tan(u.v);
        const double d1 = 1.0 + t * t;
        return chain(u, t, d1, 2.0 * t * d1);
      }
      case NodeKind::Exp: {
        const Jet u = eval(*n.args[0]);
        const double e = std::exp(u.v);
        return chain(u, e, e, e);
      }
      case NodeKind::Ln: {
        const Jet u = eval(*n.args[0]);
        if (u.v <= 0.0) domain_error(n.kind, z_);
        const double inv = 1.0 / u.v;
        return chain(u, std::log(u.v), inv, -inv * inv);
      }
      case NodeKind::Sqrt: {
        const Jet u = eval(*n.args[0]);
        if (u.v <= 0.0) domain_error(n.kind, z_);
        const double s = std::sqrt(u.v);
        return chain(u, s, 0.5 / s, -0.25 / (s * u.v));
      }
      case NodeKind::Atan2: {
        const Jet y = eval(*n.args[0]);
        const Jet x = eval(*n.args[1]);
        if (x.v == 0.0 && y.v == 0.0) domain_error(n.kind, z_);
        const double d = x.v * x.v + y.v * y.v;
        const double d2 = d * d;
        Jet r;
        r.v = std::atan2(y.v, x.v);
        const double fy = x.v / d, fx = -y.v / d;
        r.g = fy * y.g + fx * x.g;
        if (order_ > 1) {
          const double fyy = -2.0 * x.v * y.v / d2;
          const double fxx = 2.0 * x.v * y.v / d2;
          const double fxy = (y.v * y.v - x.v * x.v) / d2;
          r.h = fy * y.h + fx * x.h + fyy * y.g * y.g.transpose() +
                fxx * x.g * x.g.transpose() +
                fxy * (y.g * x.g.transpose() + x.g * y.g.transpose());
        }
        return r;
      }
    }
    return constant(0.0);
  }

 private:
  Jet constant(double c) const {
    Jet j;
    j.v = c;
    j.g = Eigen::VectorXd::Zero(n_);
    if (order_ > 1) j.h = Eigen::MatrixXd::Zero(n_, n_);
    return j;
  }

  // phi(u) given phi, phi', phi'' at u.
  Jet chain(const Jet& u, double f0, double f1, double f2) const {
    Jet r;
    r.v = f0;
    r.g = f1 * u.g;
    if (order_ > 1) {
      r.h = f1 * u.h;
      if (f2 != 0.0) r.h += f2 * u.g * u.g.transpose();
    }
    return r;
  }

  Jet product(const Jet& a, const Jet& b) const {
    Jet r;
    r.v = a.v * b.v;
    r.g = a.v * b.g + b.v * a.g;
    if (order_ > 1) {
      r.h = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
    }
    return r;
  }

  Jet power(const Node& n) const {
    const Jet a = eval(*n.args[0]);
    if (!n.args[1]->varies) {
      const double c = eval_value(*n.args[1], z_);
      if (c == std::nearbyint(c)) {
        if (c == 0.0) return constant(1.0);
        if (a.v == 0.0 && c < 0) domain_error(n.kind, z_);
        const double f0 = std::pow(a.v, c);
        const double f1 = c * std::pow(a.v, c - 1.0);
        const double f2 = (c == 1.0) ? 0.0 : c * (c - 1.0) * std::pow(a.v, c - 2.0);
        return chain(a, f0, f1, f2);
      }
      if (a.v <= 0.0) domain_error(n.kind, z_);
      const double f0 = std::pow(a.v, c);
      return chain(a, f0, c * f0 / a.v, c * (c - 1.0) * f0 / (a.v * a.v));
    }
    if (a.v <= 0.0) domain_error(n.kind, z_);
    // a^b = exp(b ln a)
    const Jet b = eval(*n.args[1]);
    const double inv = 1.0 / a.v;
    const Jet log_a = chain(a, std::log(a.v), inv, -inv * inv);
    const Jet e = product(b, log_a);
    const double ex = std::exp(e.v);
    return chain(e, ex, ex, ex);
  }

  const Eigen::VectorXd& z_;
  int order_;
  Eigen::Index n_;
};

void check_point(const Expression& e, const Eigen::VectorXd& z) {
  if (e.empty()) throw ArgumentError("evaluating an empty expression");
  if (static_cast<std::size_t>(z.size()) != e.arity())
    throw ArgumentError("point has length " + std::to_string(z.size()) +
                        ", expression arity is " + std::to_string(e.arity()));
}

NodePtr substitute_node(const NodePtr& n, std::span<const Expression> repl) {
  switch (n->kind) {
    case NodeKind::Constant: return n;
    case NodeKind::Coordinate: return repl[n->index].root();
    default: {
      NodePtr a = substitute_node(n->args[0], repl);
      NodePtr b = is_binary(n->kind) ? substitute_node(n->args[1], repl) : nullptr;
      return make_node(n->kind, std::move(a), std::move(b));
    }
  }
}

NodePtr shift_node(const NodePtr& n, std::size_t offset) {
  if (offset == 0 || !n->varies) return n;
  if (n->kind == NodeKind::Coordinate) return make_coordinate(n->index + offset);
  NodePtr a = shift_node(n->args[0], offset);
  NodePtr b = is_binary(n->kind) ? shift_node(n->args[1], offset) : nullptr;
  return make_node(n->kind, std::move(a), std::move(b));
}

void print_predicate(const PredicateNode& n, std::span<const std::string> coords,
                     std::ostringstream& os) {
  switch (n.kind) {
    case PredicateNode::Kind::Compare: {
      const char* op = n.op == Comparison::Less        ? " < "
                       : n.op == Comparison::LessEqual ? " <= "
                       : n.op == Comparison::Greater   ? " > "
                                                       : " >= ";
      os << print(n.lhs, coords) << op << print(n.rhs, coords);
      return;
    }
    case PredicateNode::Kind::And:
    case PredicateNode::Kind::Or:
      os << "(";
      print_predicate(*n.left, coords, os);
      os << (n.kind == PredicateNode::Kind::And ? ") and (" : ") or (");
      print_predicate(*n.right, coords, os);
      os << ")";
      return;
  }
}

bool eval_predicate_node(const PredicateNode& n, const Eigen::VectorXd& z) {
  switch (n.kind) {
    case PredicateNode::Kind::Compare: {
      const double a = eval(n.lhs, z);
      const double b = eval(n.rhs, z);
      switch (n.op) {
        case Comparison::Less: return a < b;
        case Comparison::LessEqual: return a <= b;
        case Comparison::Greater: return a > b;
        case Comparison::GreaterEqual: return a >= b;
      }
      return false;
    }
    case PredicateNode::Kind::And:
      return eval_predicate_node(*n.left, z) && eval_predicate_node(*n.right, z);
    case PredicateNode::Kind::Or:
      return eval_predicate_node(*n.left, z) || eval_predicate_node(*n.right, z);
  }
  return false;
}

PredicatePtr embed_predicate(const PredicatePtr& n, std::size_t arity, std::size_t offset) {
  auto out = std::make_shared<PredicateNode>(*n);
  if (n->kind == PredicateNode::Kind::Compare) {
    out->lhs = embed(n->lhs, arity, offset);
    out->rhs = embed(n->rhs, arity, offset);
  } else {
    out->left = embed_predicate(n->left, arity, offset);
    out->right = embed_predicate(n->right, arity, offset);
  }
  return out;
}

}  // namespace

DomainError::DomainError(const std::string& node, const std::vector<double>& point)
    : Error([&] {
        std::ostringstream os;
        os << "domain error in " << node << " at (";
        for (std::size_t i = 0; i < point.size(); ++i) os << (i ? ", " : "") << point[i];
        os << ")";
        return os.str();
      }()),
      node_(node),
      point_(point) {}

DistributionsDiffer::DistributionsDiffer(std::vector<double> principal_angles)
    : Error([&] {
        std::ostringstream os;
        os << "characteristic distributions differ; principal angles:";
        for (double a : principal_angles) os << " " << a;
        return os.str();
      }()),
      angles_(std::move(principal_angles)) {}

Expression::Expression(NodePtr root, std::size_t arity) : root_(std::move(root)), arity_(arity) {}

Expression Expression::constant(double c, std::size_t arity) { return {make_constant(c), arity}; }

Expression Expression::coordinate(std::size_t index, std::size_t arity) {
  if (index >= arity) throw IndexError("coordinate index out of range");
  return {make_coordinate(index), arity};
}

bool Expression::is_constant() const { return !root_ || !root_->varies; }

namespace {
std::size_t common_arity(const Expression& a, const Expression& b) {
  if (a.arity() != b.arity()) throw ArgumentError("combining expressions of different arity");
  return a.arity();
}
}  // namespace

Expression operator+(const Expression& a, const Expression& b) {
  return {make_node(NodeKind::Add, a.root(), b.root()), common_arity(a, b)};
}
Expression operator-(const Expression& a, const Expression& b) {
  return {make_node(NodeKind::Sub, a.root(), b.root()), common_arity(a, b)};
}
Expression operator*(const Expression& a, const Expression& b) {
  return {make_node(NodeKind::Mul, a.root(), b.root()), common_arity(a, b)};
}
Expression operator/(const Expression& a, const Expression& b) {
  return {make_node(NodeKind::Div, a.root(), b.root()), common_arity(a, b)};
}
Expression operator-(const Expression& a) { return {make_node(NodeKind::Negate, a.root()), a.arity()}; }
Expression operator*(double c, const Expression& a) {
  return Expression::constant(c, a.arity()) * a;
}
Expression pow(const Expression& base, const Expression& exponent) {
  return {make_node(NodeKind::Pow, base.root(), exponent.root()), common_arity(base, exponent)};
}

bool is_valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

bool is_reserved_word(std::string_view name) { return reserved().contains(name); }

void check_coordinate_names(std::span<const std::string> names) {
  std::unordered_set<std::string_view> seen;
  for (const auto& n : names) {
    if (!is_valid_identifier(n)) throw ArgumentError("invalid coordinate name '" + n + "'");
    if (is_reserved_word(n)) throw ArgumentError("coordinate name '" + n + "' is reserved");
    if (!seen.insert(n).second) throw ArgumentError("duplicate coordinate name '" + n + "'");
  }
}

Expression parse(std::string_view text, std::span<const std::string> coordinates) {
  check_coordinate_names(coordinates);
  Parser p(text, coordinates);
  if (p.at_end()) throw SyntaxError(0, "an expression");
  NodePtr root = p.expression();
  p.expect_end();
  return {root, coordinates.size()};
}

Expression parse(std::string_view text, std::initializer_list<std::string> coordinates) {
  const std::vector<std::string> names(coordinates);
  return parse(text, std::span<const std::string>(names));
}

std::string print(const Expression& e, std::span<const std::string> coordinates) {
  std::ostringstream os;
  print_node(*e.root(), coordinates, os);
  return os.str();
}

std::string print(const Expression& e) { return print(e, std::span<const std::string>{}); }

bool structurally_equal(const Expression& a, const Expression& b) {
  return a.arity() == b.arity() && nodes_equal(*a.root(), *b.root());
}

double eval(const Expression& e, const Eigen::VectorXd& z) {
  check_point(e, z);
  return eval_value(*e.root(), z);
}

Jet1 eval_jet1(const Expression& e, const Eigen::VectorXd& z) {
  check_point(e, z);
  Jet j = JetEvaluator(z, 1).eval(*e.root());
  return {j.v, std::move(j.g)};
}

Jet2 eval_jet2(const Expression& e, const Eigen::VectorXd& z) {
  check_point(e, z);
  Jet j = JetEvaluator(z, 2).eval(*e.root());
  // Mirror the upper triangle so the stored Hessian is exactly symmetric.
  Eigen::MatrixXd h = j.h.triangularView<Eigen::Upper>();
  h.triangularView<Eigen::StrictlyLower>() = h.transpose().triangularView<Eigen::StrictlyLower>();
  return {j.v, std::move(j.g), std::move(h)};
}

Expression substitute(const Expression& e, std::span<const Expression> replacements) {
  if (replacements.size() != e.arity())
    throw ArgumentError("substitute needs one replacement per coordinate");
  std::size_t arity = 0;
  for (std::size_t i = 0; i < replacements.size(); ++i) {
    if (i == 0) arity = replacements[i].arity();
    else if (replacements[i].arity() != arity)
      throw ArgumentError("replacements must share one arity");
  }
  return {substitute_node(e.root(), replacements), arity};
}

Expression embed(const Expression& e, std::size_t new_arity, std::size_t offset) {
  if (offset + e.arity() > new_arity) throw ArgumentError("embedding exceeds new arity");
  return {shift_node(e.root(), offset), new_arity};
}

Predicate Predicate::compare(Expression lhs, Comparison op, Expression rhs) {
  const std::size_t arity = common_arity(lhs, rhs);
  auto n = std::make_shared<PredicateNode>();
  n->kind = PredicateNode::Kind::Compare;
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return {n, arity};
}

Predicate Predicate::operator&&(const Predicate& other) const {
  if (arity_ != other.arity_) throw ArgumentError("combining guards of different arity");
  auto n = std::make_shared<PredicateNode>();
  n->kind = PredicateNode::Kind::And;
  n->left = root_;
  n->right = other.root_;
  return {n, arity_};
}

Predicate Predicate::operator||(const Predicate& other) const {
  if (arity_ != other.arity_) throw ArgumentError("combining guards of different arity");
  auto n = std::make_shared<PredicateNode>();
  n->kind = PredicateNode::Kind::Or;
  n->left = root_;
  n->right = other.root_;
  return {n, arity_};
}

Predicate parse_predicate(std::string_view text, std::span<const std::string> coordinates) {
  check_coordinate_names(coordinates);
  Parser p(text, coordinates);
  if (p.at_end()) throw SyntaxError(0, "a predicate");
  auto root = p.predicate();
  p.expect_end();
  return {root, coordinates.size()};
}

std::string print(const Predicate& p, std::span<const std::string> coordinates) {
  std::ostringstream os;
  print_predicate(*p.root(), coordinates, os);
  return os.str();
}

bool eval_predicate(const Predicate& p, const Eigen::VectorXd& z) {
  if (static_cast<std::size_t>(z.size()) != p.arity())
    throw ArgumentError("point length does not match guard arity");
  return eval_predicate_node(*p.root(), z);
}

Predicate embed(const Predicate& p, std::size_t new_arity, std::size_t offset) {
  return {embed_predicate(p.root(), new_arity, offset), new_arity};
}

bool satisfies(const std::optional<Predicate>& guard, const Eigen::VectorXd& z) {
  if (!guard) return true;
  try {
    return eval_predicate(*guard, z);
  } catch (const DomainError&) {
    return false;
  }
}

}  // namespace poissonkit
