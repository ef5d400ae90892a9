#include "mhd/saddle_solver.hpp"

#include "mhd/errors.hpp"

#include <umfpack.h>

#include <atomic>
#include <cmath>
#include <string>

namespace mhd {

namespace {

std::atomic<std::size_t> g_factorizations{0};

std::string umfpack_status(int status) {
  switch (status) {
    case UMFPACK_WARNING_singular_matrix:
      return "singular matrix";
    case UMFPACK_ERROR_out_of_memory:
      return "out of memory";
    case UMFPACK_ERROR_invalid_matrix:
      return "invalid matrix";
    default:
      return "umfpack status " + std::to_string(status);
  }
}

}  // namespace

std::size_t factorization_count() noexcept { return g_factorizations.load(); }
void reset_factorization_count() noexcept { g_factorizations.store(0); }

SparseLU::SparseLU(SparseMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw InvalidArgument("SparseLU: square matrix expected");
  matrix_.makeCompressed();
  const int n = static_cast<int>(matrix_.rows());
  const int* Ap = matrix_.outerIndexPtr();
  const int* Ai = matrix_.innerIndexPtr();
  const double* Ax = matrix_.valuePtr();
  double control[UMFPACK_CONTROL];
  umfpack_di_defaults(control);
  // Saddle systems have a structurally symmetric pattern with a zero block;
  // the unsymmetric default ordering fills in badly on unstructured meshes.
  control[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
  int status = umfpack_di_symbolic(n, n, Ap, Ai, Ax, &symbolic_, control, nullptr);
  if (status != UMFPACK_OK) {
    throw SolverError("symbolic factorization failed: " + umfpack_status(status));
  }
  status = umfpack_di_numeric(Ap, Ai, Ax, symbolic_, &numeric_, control, nullptr);
  if (status != UMFPACK_OK) {
    umfpack_di_free_symbolic(&symbolic_);
    if (numeric_ != nullptr) umfpack_di_free_numeric(&numeric_);
    throw SolverError("numeric factorization failed: " + umfpack_status(status));
  }
  ++g_factorizations;
}

SparseLU::~SparseLU() {
  if (numeric_ != nullptr) umfpack_di_free_numeric(&numeric_);
  if (symbolic_ != nullptr) umfpack_di_free_symbolic(&symbolic_);
}

Eigen::VectorXd SparseLU::solve(const Eigen::VectorXd& rhs) const {
  const Eigen::Index n = matrix_.rows();
  if (rhs.size() != n) throw InvalidArgument("SparseLU::solve: rhs length mismatch");
  Eigen::VectorXd x(n);
  std::vector<int> wi(static_cast<std::size_t>(n));
  std::vector<double> w(static_cast<std::size_t>(5 * n));
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  // Refinement sweeps cost several times the solve itself; callers check
  // the residual instead.
  control[UMFPACK_IRSTEP] = 0;
  const int status = umfpack_di_wsolve(UMFPACK_A, matrix_.outerIndexPtr(), matrix_.innerIndexPtr(),
                                       matrix_.valuePtr(), x.data(), rhs.data(), numeric_, control,
                                       info, wi.data(), w.data());
  if (status != UMFPACK_OK) throw SolverError("solve failed: " + umfpack_status(status));
  return x;
}

ConstrainedSystem::ConstrainedSystem(const SparseMatrix& matrix, std::vector<std::size_t> fixed_dofs)
    : fixed_(std::move(fixed_dofs)) {
  const Eigen::Index n = matrix.rows();
  if (matrix.cols() != n) throw InvalidArgument("ConstrainedSystem: square matrix expected");
  std::vector<Eigen::Triplet<double>> cols;
  {
    std::vector<Eigen::Index> slot(static_cast<std::size_t>(n), -1);
    for (std::size_t k = 0; k < fixed_.size(); ++k) {
      if (static_cast<Eigen::Index>(fixed_[k]) >= n) throw InvalidArgument("fixed dof out of range");
      slot[fixed_[k]] = static_cast<Eigen::Index>(k);
    }
    for (Eigen::Index c = 0; c < matrix.outerSize(); ++c) {
      const Eigen::Index k = slot[static_cast<std::size_t>(c)];
      if (k < 0) continue;
      for (SparseMatrix::InnerIterator it(matrix, c); it; ++it) {
        cols.emplace_back(static_cast<int>(it.row()), static_cast<int>(k), it.value());
      }
    }
  }
  columns_.resize(n, static_cast<Eigen::Index>(fixed_.size()));
  columns_.setFromTriplets(cols.begin(), cols.end());

  LinearSystem sys{matrix, Eigen::VectorXd::Zero(n)};
  DirichletValues zero{fixed_, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fixed_.size()))};
  eliminate_dofs(sys, zero);
  lu_ = std::make_unique<SparseLU>(std::move(sys.matrix));
}

Eigen::VectorXd ConstrainedSystem::solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& values,
                                         double* residual) const {
  if (static_cast<std::size_t>(rhs.size()) != size()) {
    throw InvalidArgument("ConstrainedSystem::solve: rhs length mismatch");
  }
  if (static_cast<std::size_t>(values.size()) != fixed_.size()) {
    throw InvalidArgument("ConstrainedSystem::solve: boundary value count mismatch");
  }
  Eigen::VectorXd b = rhs;
  if (fixed_.size() > 0 && values.lpNorm<Eigen::Infinity>() > 0.0) b.noalias() -= columns_ * values;
  for (std::size_t k = 0; k < fixed_.size(); ++k) {
    b[static_cast<Eigen::Index>(fixed_[k])] = values[static_cast<Eigen::Index>(k)];
  }
  Eigen::VectorXd x = lu_->solve(b);
  if (!x.allFinite()) throw SolverError("solution contains non-finite values");
  if (residual != nullptr) {
    const double bn = b.norm();
    const double rn = (lu_->matrix() * x - b).norm();
    *residual = bn > 0.0 ? rn / bn : rn;
  }
  return x;
}

StokesOperator::StokesOperator(std::shared_ptr<const TaylorHoodSpaces> spaces,
                               const SparseMatrix& mass, const SparseMatrix& stiffness,
                               const SparseMatrix& divergence, StokesCoefficients coeffs,
                               const std::vector<int>& dirichlet_tags)
    : spaces_(std::move(spaces)), coeffs_(coeffs) {
  if (!spaces_) throw InvalidArgument("StokesOperator: null spaces");
  if (!std::isfinite(coeffs.mass) || !std::isfinite(coeffs.diffusion) ||
      !std::isfinite(coeffs.pressure) || coeffs.mass <= 0.0 || coeffs.diffusion < 0.0 ||
      coeffs.pressure <= 0.0) {
    throw InvalidArgument("StokesOperator: need c_m > 0, c_a >= 0, c_p > 0");
  }
  const auto nv = static_cast<Eigen::Index>(spaces_->num_velocity_dofs());
  const auto np = static_cast<Eigen::Index>(spaces_->num_scalar_dofs());
  if (mass.rows() != nv || stiffness.rows() != nv || divergence.rows() != np ||
      divergence.cols() != nv) {
    throw InvalidArgument("StokesOperator: operator dimensions do not match the spaces");
  }
  const Eigen::VectorXd e = scalar_basis_integrals(*spaces_);
  const SparseMatrix momentum = coeffs.mass * mass + coeffs.diffusion * stiffness;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(momentum.nonZeros() + 2 * divergence.nonZeros() + 2 * np));
  for (Eigen::Index c = 0; c < momentum.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(momentum, c); it; ++it) {
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (Eigen::Index c = 0; c < divergence.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(divergence, c); it; ++it) {
      const auto pr = static_cast<int>(nv + it.row());
      const auto vc = static_cast<int>(it.col());
      t.emplace_back(vc, pr, -coeffs.pressure * it.value());
      t.emplace_back(pr, vc, -it.value());
    }
  }
  const auto mu = static_cast<int>(nv + np);
  for (Eigen::Index i = 0; i < np; ++i) {
    t.emplace_back(static_cast<int>(nv + i), mu, e[i]);
    t.emplace_back(mu, static_cast<int>(nv + i), e[i]);
  }
  SparseMatrix K(nv + np + 1, nv + np + 1);
  K.setFromTriplets(t.begin(), t.end());
  K.makeCompressed();

  const auto fixed = homogeneous_values(*spaces_, dirichlet_tags).dofs;
  try {
    system_ = std::make_unique<ConstrainedSystem>(K, fixed);
  } catch (const SolverError& err) {
    throw SolverError(std::string("saddle system is singular (check boundary tags): ") + err.what());
  }
}

StokesOperator::StokesOperator(std::shared_ptr<const TaylorHoodSpaces> spaces,
                               StokesCoefficients coeffs, const std::vector<int>& dirichlet_tags)
    : StokesOperator(spaces, assemble_mass(*spaces, Role::velocity),
                     assemble_stiffness(*spaces, Role::velocity), assemble_divergence(*spaces),
                     coeffs, dirichlet_tags) {}

StokesOperator::Solution StokesOperator::solve(const Eigen::VectorXd& rhs_velocity,
                                               const Eigen::VectorXd& rhs_divergence,
                                               const Eigen::VectorXd& bc) const {
  const auto nv = static_cast<Eigen::Index>(spaces_->num_velocity_dofs());
  const auto np = static_cast<Eigen::Index>(spaces_->num_scalar_dofs());
  if (rhs_velocity.size() != nv) throw InvalidArgument("solve: velocity rhs length mismatch");
  if (rhs_divergence.size() != 0 && rhs_divergence.size() != np) {
    throw InvalidArgument("solve: divergence rhs length mismatch");
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + np + 1);
  rhs.head(nv) = rhs_velocity;
  if (rhs_divergence.size() == np) rhs.segment(nv, np) = rhs_divergence;
  const std::size_t nc = system_->fixed_dofs().size();
  Eigen::VectorXd g = bc.size() == 0 ? Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nc)) : bc;
  Solution sol;
  const Eigen::VectorXd x = system_->solve(rhs, g, &sol.residual);
  sol.velocity = x.head(nv);
  sol.pressure = x.segment(nv, np);
  return sol;
}

std::shared_ptr<const StokesOperator> build_stokes_operator(
    std::shared_ptr<const TaylorHoodSpaces> spaces, double c_m, double c_a, double c_p,
    const std::vector<int>& dirichlet_tags) {
  return std::make_shared<const StokesOperator>(std::move(spaces),
                                                StokesCoefficients{c_m, c_a, c_p}, dirichlet_tags);
}

}  // namespace mhd
