#pragma once

#include "mhd/fem/assembly.hpp"

#include <map>
#include <vector>

namespace mhd {

/// Velocity-like boundary data keyed by facet tag.
using BoundaryData = std::map<int, VectorFunction>;

/// Constrained dofs (ascending) and the values they are pinned to.
struct DirichletValues {
  std::vector<std::size_t> dofs;
  Eigen::VectorXd values;
};

/// Nodal values of the boundary data at time t on the nodes of the given
/// tags. Throws ConfigError for a tag the mesh does not carry.
DirichletValues boundary_values(const TaylorHoodSpaces& spaces, const BoundaryData& data, double t);

/// Same dofs as boundary_values but all values zero.
DirichletValues homogeneous_values(const TaylorHoodSpaces& spaces, const std::vector<int>& tags);

struct LinearSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
};

/// Symmetric elimination: rhs -= A(:, c) g, rows and columns of c zeroed,
/// unit diagonal, rhs(c) = g. Indices refer to the full system, so an
/// augmented saddle matrix works as long as the constrained dofs come first.
void eliminate_dofs(LinearSystem& system, const DirichletValues& bc);

void apply_dirichlet(LinearSystem& system, const TaylorHoodSpaces& spaces,
                     const BoundaryData& data, double t);

}  // namespace mhd
