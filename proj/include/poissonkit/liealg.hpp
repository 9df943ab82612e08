#pragma once

// Structure constants, Lie-Poisson structures on the coalgebra, coadjoint
// generators and Casimir checks.

#include "poissonkit/poisson.hpp"
#include "poissonkit/structure_constants.hpp"

#include <Eigen/Dense>

#include <vector>

namespace poissonkit {

struct ConstantsReport {
  double antisymmetry_residual = 0.0;
  double jacobi_residual = 0.0;
};

/// Acceptance threshold for both residuals of validate().
inline constexpr double kConstantsTolerance = 1e-12;

ConstantsReport validate(const StructureConstants& c);

/// so(3): [e1,e2] = e3 and cyclic.
StructureConstants so3();
/// so(2,1): [e1,e2] = -e3, [e2,e3] = e1, [e3,e1] = e2.
StructureConstants so21();
StructureConstants abelian(std::size_t k);

/// Lie-Poisson structure w_mn = c^k_mn z_k on a chart with coordinates
/// z1..zk and box [-box_half_width, box_half_width]^k.
PoissonStructure lie_poisson(const StructureConstants& c, double box_half_width = 2.0);
/// As above on a caller-supplied chart.
PoissonStructure lie_poisson(const StructureConstants& c, Chart chart);

/// max over points and i of |{C, z_i}| for the Lie-Poisson bracket.
double casimir_residual(const StructureConstants& c, const Expression& casimir,
                        const std::vector<Eigen::VectorXd>& points);

/// Matrix of ad* e_m in the dual basis: column n holds the components of
/// ad* e_m(e^n) = -c^n_{mk} e^k. Equals minus the linearisation of the
/// Hamiltonian field of z_m.
Eigen::MatrixXd coadjoint_generator(const StructureConstants& c, std::size_t m);

/// k - max over points of rank_at(lie_poisson(c), point).
int algebra_corank(const StructureConstants& c, const std::vector<Eigen::VectorXd>& points,
                   double tol_rel = kDefaultRankTolerance);

}  // namespace poissonkit
