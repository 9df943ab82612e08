#pragma once

// Random expression generator and finite-difference oracles for the
// derivative tests.

#include "poissonkit/errors.hpp"
#include "poissonkit/expr.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

inline std::vector<std::string> coordinate_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

/// Expression text of depth at most `depth` over `names`.
inline std::string random_expression_text(std::mt19937_64& rng, const std::vector<std::string>& names, int depth) {
  std::uniform_int_distribution<int> pick(0, 99);
  auto leaf = [&]() -> std::string {
    if (pick(rng) < 65) return names[std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng)];
    const double c = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", std::abs(c));
    return c < 0 ? std::string("(-") + buf + ")" : std::string(buf);
  };
  if (depth <= 1 || pick(rng) < 15) return leaf();
  auto sub = [&] { return random_expression_text(rng, names, depth - 1); };
  switch (pick(rng) % 14) {
    case 0: return "(" + sub() + " + " + sub() + ")";
    case 1: return "(" + sub() + " - " + sub() + ")";
    case 2:
    case 3: return "(" + sub() + " * " + sub() + ")";
    case 4: return "(" + sub() + " / (1.5 + " + sub() + "^2))";
    case 5: return "(-" + sub() + ")";
    case 6: return "(" + sub() + ")^" + std::to_string(std::uniform_int_distribution<int>(2, 3)(rng));
    case 7: return "sin(" + sub() + ")";
    case 8: return "cos(" + sub() + ")";
    case 9: return "exp(" + sub() + "/4)";
    case 10: return "ln(1 + " + sub() + "^2)";
    case 11: return "sqrt(0.5 + " + sub() + "^2)";
    case 12: return "atan2(" + sub() + ", " + sub() + ")";
    default: return "(0.5 + " + sub() + "^2)^" + sub();
  }
}

/// Central-difference gradient with step h; nullopt on a domain error.
inline std::optional<Eigen::VectorXd> fd_gradient(const poissonkit::Expression& e, const Eigen::VectorXd& z, double h) {
  Eigen::VectorXd g(z.size());
  try {
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      Eigen::VectorXd a = z, b = z;
      a(i) += h;
      b(i) -= h;
      g(i) = (poissonkit::eval(e, a) - poissonkit::eval(e, b)) / (2 * h);
    }
  } catch (const poissonkit::DomainError&) {
    return std::nullopt;
  }
  return g;
}

/// Second-order central-difference Hessian with step h.
inline std::optional<Eigen::MatrixXd> fd_hessian(const poissonkit::Expression& e, const Eigen::VectorXd& z, double h) {
  const Eigen::Index n = z.size();
  Eigen::MatrixXd hs(n, n);
  try {
    const double f0 = poissonkit::eval(e, z);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) {
        auto at = [&](double si, double sj) {
          Eigen::VectorXd p = z;
          p(i) += si * h;
          p(j) += sj * h;
          return poissonkit::eval(e, p);
        };
        double v;
        if (i == j) v = (at(1, 0) - 2 * f0 + at(-1, 0)) / (h * h);
        else v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
        hs(i, j) = hs(j, i) = v;
      }
  } catch (const poissonkit::DomainError&) {
    return std::nullopt;
  }
  return hs;
}

/// max_i |a_i - b_i| / max(1, |a_i|).
inline double relative_error(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& approx) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < exact.size(); ++i)
    worst = std::max(worst, std::abs(exact.data()[i] - approx.data()[i]) / std::max(1.0, std::abs(exact.data()[i])));
  return worst;
}

/// Random polynomial of degree <= 3 in n variables, as text.
inline std::string random_polynomial_text(std::mt19937_64& rng, const std::vector<std::string>& names) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> var(0, names.size() - 1);
  std::uniform_int_distribution<int> deg(0, 3);
  std::string out;
  for (int t = 0; t < 4; ++t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", coef(rng));
    std::string term = std::string("(") + buf + ")";
    const int d = deg(rng);
    for (int k = 0; k < d; ++k) term += "*" + names[var(rng)];
    out += (out.empty() ? "" : " + ") + term;
  }
  return out;
}

}  // namespace testsupport
