#include "poissonkit/liealg.hpp"

#include "poissonkit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace poissonkit {

StructureConstants StructureConstants::from_nested(
    const std::vector<std::vector<std::vector<double>>>& c) {
  const std::size_t k = c.size();
  StructureConstants out(k);
  for (std::size_t h = 0; h < k; ++h) {
    if (c[h].size() != k) throw ArgumentError("structure constants must be k x k x k");
    for (std::size_t i = 0; i < k; ++i) {
      if (c[h][i].size() != k) throw ArgumentError("structure constants must be k x k x k");
      for (std::size_t j = 0; j < k; ++j) out(h, i, j) = c[h][i][j];
    }
  }
  return out;
}

void StructureConstants::set_bracket(std::size_t h, std::size_t i, std::size_t j, double v) {
  if (h >= k_ || i >= k_ || j >= k_) throw IndexError("structure constant index out of range");
  (*this)(h, i, j) = v;
  (*this)(h, j, i) = -v;
}

std::vector<std::vector<std::vector<double>>> StructureConstants::nested() const {
  std::vector<std::vector<std::vector<double>>> out(
      k_, std::vector<std::vector<double>>(k_, std::vector<double>(k_)));
  for (std::size_t h = 0; h < k_; ++h)
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = 0; j < k_; ++j) out[h][i][j] = (*this)(h, i, j);
  return out;
}

ConstantsReport validate(const StructureConstants& c) {
  const std::size_t k = c.dimension();
  ConstantsReport r;
  for (std::size_t h = 0; h < k; ++h)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        r.antisymmetry_residual = std::max(r.antisymmetry_residual, std::abs(c(h, i, j) + c(h, j, i)));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t l = 0; l < k; ++l)
        for (std::size_t m = 0; m < k; ++m) {
          double s = 0.0;
          for (std::size_t h = 0; h < k; ++h)
            s += c(h, i, j) * c(m, h, l) + c(h, j, l) * c(m, h, i) + c(h, l, i) * c(m, h, j);
          r.jacobi_residual = std::max(r.jacobi_residual, std::abs(s));
        }
  return r;
}

StructureConstants so3() {
  StructureConstants c(3);
  c.set_bracket(2, 0, 1, 1.0);
  c.set_bracket(0, 1, 2, 1.0);
  c.set_bracket(1, 2, 0, 1.0);
  return c;
}

StructureConstants so21() {
  StructureConstants c(3);
  c.set_bracket(2, 0, 1, -1.0);
  c.set_bracket(0, 1, 2, 1.0);
  c.set_bracket(1, 2, 0, 1.0);
  return c;
}

StructureConstants abelian(std::size_t k) { return StructureConstants(k); }

PoissonStructure lie_poisson(const StructureConstants& c, Chart chart) {
  const ConstantsReport r = validate(c);
  if (r.antisymmetry_residual > kConstantsTolerance || r.jacobi_residual > kConstantsTolerance)
    throw InvalidConstants("structure constants fail validation (antisymmetry " +
                           std::to_string(r.antisymmetry_residual) + ", Jacobi " +
                           std::to_string(r.jacobi_residual) + ")");
  return PoissonStructure::lie_poisson(std::move(chart), c);
}

PoissonStructure lie_poisson(const StructureConstants& c, double box_half_width) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < c.dimension(); ++i) names.push_back("z" + std::to_string(i + 1));
  return lie_poisson(c, Chart::uniform(std::move(names), -box_half_width, box_half_width));
}

double casimir_residual(const StructureConstants& c, const Expression& casimir,
                        const std::vector<Eigen::VectorXd>& points) {
  const std::size_t k = c.dimension();
  if (casimir.arity() != k) throw ArgumentError("Casimir arity must equal the algebra dimension");
  double worst = 0.0;
  for (const auto& z : points) {
    const Eigen::VectorXd grad = eval_jet1(casimir, z).gradient;
    // {C, z_i} = sum_mu w^{mu i} d_mu C
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0.0;
      for (std::size_t mu = 0; mu < k; ++mu) {
        double w = 0.0;
        for (std::size_t h = 0; h < k; ++h) w += c(h, mu, i) * z[static_cast<Eigen::Index>(h)];
        s += w * grad[static_cast<Eigen::Index>(mu)];
      }
      worst = std::max(worst, std::abs(s));
    }
  }
  return worst;
}

Eigen::MatrixXd coadjoint_generator(const StructureConstants& c, std::size_t m) {
  const std::size_t k = c.dimension();
  if (m >= k) throw IndexError("coadjoint generator index out of range");
  const auto n = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd out(n, n);
  for (std::size_t row = 0; row < k; ++row)
    for (std::size_t col = 0; col < k; ++col)
      out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = -c(col, m, row);
  return out;
}

int algebra_corank(const StructureConstants& c, const std::vector<Eigen::VectorXd>& points,
                   double tol_rel) {
  const PoissonStructure w = PoissonStructure::lie_poisson(
      Chart::uniform([&] {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < c.dimension(); ++i) names.push_back("z" + std::to_string(i + 1));
        return names;
      }(), -1.0, 1.0),
      c);
  int best = 0;
  for (const auto& z : points) best = std::max(best, rank_at(w, z, tol_rel));
  return static_cast<int>(c.dimension()) - best;
}

}  // namespace poissonkit
