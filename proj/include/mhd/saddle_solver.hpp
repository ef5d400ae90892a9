#pragma once

#include "mhd/fem/assembly.hpp"
#include "mhd/fem/dirichlet.hpp"

#include <cstddef>
#include <memory>
#include <vector>

namespace mhd {

/// Number of sparse LU factorizations performed by this process.
std::size_t factorization_count() noexcept;
void reset_factorization_count() noexcept;

/// Sparse LU (UMFPACK) of a square matrix. Solves use private workspace and
/// may run concurrently.
class SparseLU {
 public:
  explicit SparseLU(SparseMatrix matrix);
  ~SparseLU();
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  const SparseMatrix& matrix() const noexcept { return matrix_; }

 private:
  SparseMatrix matrix_;
  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
};

/// Square system with a set of dofs fixed by symmetric elimination. The
/// eliminated columns are kept so that different boundary values can be
/// imposed per solve without refactorizing.
class ConstrainedSystem {
 public:
  ConstrainedSystem(const SparseMatrix& matrix, std::vector<std::size_t> fixed_dofs);

  /// Solves K x = rhs with x(fixed) = values. Returns the relative residual
  /// of the eliminated system through `residual` when non-null.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& values,
                        double* residual = nullptr) const;

  std::size_t size() const noexcept { return static_cast<std::size_t>(columns_.rows()); }
  const std::vector<std::size_t>& fixed_dofs() const noexcept { return fixed_; }

 private:
  std::vector<std::size_t> fixed_;
  SparseMatrix columns_;  // original K(:, fixed)
  std::unique_ptr<SparseLU> lu_;
};

struct StokesCoefficients {
  double mass = 1.0;       // c_m
  double diffusion = 0.0;  // c_a
  double pressure = 1.0;   // c_p
};

/// Factorized saddle system
///   [c_m M + c_a A   c_p G^T   0] [u]   [f]
///   [G               0         e] [p] = [r]
///   [0               e^T       0] [mu]  [0]
/// with G = -D, e the P1 basis integrals, Dirichlet velocity dofs eliminated.
class StokesOperator {
 public:
  struct Solution {
    Eigen::VectorXd velocity;
    Eigen::VectorXd pressure;
    double residual = 0.0;
  };

  StokesOperator(std::shared_ptr<const TaylorHoodSpaces> spaces, const SparseMatrix& mass,
                 const SparseMatrix& stiffness, const SparseMatrix& divergence,
                 StokesCoefficients coeffs, const std::vector<int>& dirichlet_tags);

  /// Assembles M, A and D itself.
  StokesOperator(std::shared_ptr<const TaylorHoodSpaces> spaces, StokesCoefficients coeffs,
                 const std::vector<int>& dirichlet_tags);

  /// bc holds the values of the constrained velocity dofs (same order as
  /// constrained_dofs()); an empty vector means homogeneous data.
  Solution solve(const Eigen::VectorXd& rhs_velocity, const Eigen::VectorXd& rhs_divergence,
                 const Eigen::VectorXd& bc = Eigen::VectorXd()) const;

  const std::vector<std::size_t>& constrained_dofs() const noexcept { return system_->fixed_dofs(); }
  const StokesCoefficients& coefficients() const noexcept { return coeffs_; }
  const TaylorHoodSpaces& spaces() const noexcept { return *spaces_; }

 private:
  std::shared_ptr<const TaylorHoodSpaces> spaces_;
  StokesCoefficients coeffs_;
  std::unique_ptr<ConstrainedSystem> system_;
};

/// Convenience wrapper matching the assembled data layout.
std::shared_ptr<const StokesOperator> build_stokes_operator(
    std::shared_ptr<const TaylorHoodSpaces> spaces, double c_m, double c_a, double c_p,
    const std::vector<int>& dirichlet_tags);

}  // namespace mhd
