#pragma once

#include <iosfwd>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "biot/grid.hpp"

namespace biot {

using SpMat = Eigen::SparseMatrix<double>;

// Discrete spatial operators on the staggered grid. The gradients are
// built from difference stencils; each divergence is defined as the
// negative adjoint of the matching gradient in the mass-weighted inner
// products, so the integration-by-parts identities hold to assembly
// precision:
//   Dv = -Wc^{-1} Gp^T Wf,   Ds = -Wv^{-1} Gv^T Ws.
// Gp carries the pressure Dirichlet condition through half-cell stencils
// at the wall faces; Gv sees only interior velocity faces (velocity
// Dirichlet), with odd-reflection ghosts for the tangential derivatives
// in the shear rows.
struct DiscreteOps {
  SpMat Gp;    // centers -> all faces (psi layout)
  SpMat Gp_v;  // centers -> interior faces (v layout); restriction of Gp
  SpMat Dv;    // all faces -> centers
  SpMat Dv_v;  // interior faces -> centers
  SpMat Gv;    // interior faces -> sigma components at centers
  SpMat Ds;    // sigma -> interior faces

  Eigen::VectorXd wc;  // center weights (cell volumes)
  Eigen::VectorXd wf;  // psi-layout face weights (half cells at walls)
  Eigen::VectorXd wv;  // v-layout face weights
  Eigen::VectorXd ws;  // sigma weights (doubled off-diagonal components)
};

DiscreteOps build_ops(const Grid& grid);

// Coordinate-format dump: one "row col value" line per entry.
void export_triplets(const SpMat& m, std::ostream& out);

}  // namespace biot
