#pragma once
// One time step of the coupled scheme with xi held fixed, assembled as a
// single saddle system per field and solved with Eigen's SparseLU. Boundary
// rows are replaced by identity rows. Used to check the two-solve
// superposition path of the stepper.

#include "mhd/stepper.hpp"

#include <Eigen/SparseLU>

#include <numeric>

namespace oracle {

struct MonolithicStep {
  Eigen::VectorXd u, B, p, lambda;
};

namespace detail {

// [c_m M + c_a A, -c_p D^T, 0; -D, 0, e; 0, e^T, 0] x = b, with x(fixed) = g.
inline Eigen::VectorXd saddle_solve(const mhd::TaylorHoodSpaces& sp, double cm, double ca, double cp,
                                    const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  using mhd::SparseMatrix;
  const auto nv = static_cast<Eigen::Index>(sp.num_velocity_dofs());
  const auto np = static_cast<Eigen::Index>(sp.num_scalar_dofs());
  const SparseMatrix K = cm * mhd::assemble_mass(sp, mhd::Role::velocity) +
                         ca * mhd::assemble_stiffness(sp, mhd::Role::velocity);
  const SparseMatrix D = mhd::assemble_divergence(sp);
  const Eigen::VectorXd e = mhd::assemble_mass(sp, mhd::Role::scalar) *
                            Eigen::VectorXd::Ones(np);
  const auto fixed = sp.boundary_dofs(sp.mesh().boundary_tags());
  std::vector<bool> is_fixed(static_cast<std::size_t>(nv), false);
  for (std::size_t d : fixed) is_fixed[d] = true;

  std::vector<Eigen::Triplet<double>> t;
  auto add = [&](Eigen::Index r, Eigen::Index c, double v) {
    if (r < nv && is_fixed[static_cast<std::size_t>(r)]) return;
    t.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
  };
  for (Eigen::Index c = 0; c < K.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(K, c); it; ++it) add(it.row(), it.col(), it.value());
  }
  for (Eigen::Index c = 0; c < D.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(D, c); it; ++it) {
      add(it.col(), nv + it.row(), -cp * it.value());
      add(nv + it.row(), it.col(), -it.value());
    }
  }
  for (Eigen::Index i = 0; i < np; ++i) {
    add(nv + i, nv + np, e[i]);
    add(nv + np, nv + i, e[i]);
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(nv + np + 1);
  b.head(nv) = f;
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    t.emplace_back(static_cast<int>(fixed[k]), static_cast<int>(fixed[k]), 1.0);
    b[static_cast<Eigen::Index>(fixed[k])] = g[static_cast<Eigen::Index>(k)];
  }
  SparseMatrix S(nv + np + 1, nv + np + 1);
  S.setFromTriplets(t.begin(), t.end());
  S.makeCompressed();
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(S);
  return lu.solve(b);
}

inline Eigen::VectorXd data_at(const mhd::TaylorHoodSpaces& sp, const mhd::BoundaryData& bc,
                               double t) {
  const auto n = sp.boundary_dofs(sp.mesh().boundary_tags()).size();
  if (bc.empty()) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  return mhd::boundary_values(sp, bc, t).values;
}

inline Eigen::VectorXd advect(const mhd::TaylorHoodSpaces& sp, const Eigen::VectorXd& w,
                              const Eigen::VectorXd& v) {
  return mhd::assemble_skew_convection_matrix(mhd::Field{mhd::Role::velocity, w}, sp) * v;
}

}  // namespace detail

/// Scheme is taken from config.scheme (cn or bdf2); xi is the value to freeze.
inline MonolithicStep monolithic_step(const mhd::TaylorHoodSpaces& sp, const mhd::MemberState& m,
                                      const mhd::EnsembleConfig& config, std::size_t j, double xi) {
  using Eigen::VectorXd;
  const auto& md = config.members[j];
  double nu_bar = 0.0, gamma_bar = 0.0;
  for (const auto& mm : config.members) {
    nu_bar += mm.nu / static_cast<double>(config.members.size());
    gamma_bar += mm.gamma / static_cast<double>(config.members.size());
  }
  const double nup = md.nu - nu_bar, gap = md.gamma - gamma_bar;
  const double dt = config.dt, s = config.s;
  const double h = config.h > 0.0 ? config.h : sp.mesh().grid_spacing();
  const double ah = config.alpha * h, amh = config.alpha_m * h;
  const auto M = mhd::assemble_mass(sp, mhd::Role::velocity);
  const auto A = mhd::assemble_stiffness(sp, mhd::Role::velocity);
  const auto D = mhd::assemble_divergence(sp);
  const auto nv = static_cast<Eigen::Index>(sp.num_velocity_dofs());
  const auto np = static_cast<Eigen::Index>(sp.num_scalar_dofs());
  const VectorXd &u0 = m.u[0].values, &u1 = m.u[1].values, &u2 = m.u[2].values;
  const VectorXd &B0 = m.B[0].values, &B1 = m.B[1].values, &B2 = m.B[2].values;
  const double t1 = m.t + dt;

  VectorXd x, y;
  if (config.scheme == mhd::Scheme::cn) {
    // half-step extrapolant 2 v^{n-1/2} - v^{n-3/2}
    VectorXd ut = 2.0 * 0.5 * (u0 + u1) - 0.5 * (u1 + u2);
    VectorXd Bt = 2.0 * 0.5 * (B0 + B1) - 0.5 * (B1 + B2);
    if (config.extrapolation == mhd::Extrapolation::hat) {
      ut = 1.5 * u0 - 0.5 * u1;
      Bt = 1.5 * B0 - 0.5 * B1;
    }
    const double th = m.t + 0.5 * dt;
    const VectorXd fu = mhd::assemble_load(sp, md.forcing, th) + M * u0 / dt -
                        0.5 * nu_bar * (A * u0) + ah * (A * u0) - nup * (A * ut) +
                        0.5 * (D.transpose() * m.p.values) -
                        xi * (detail::advect(sp, ut, ut) - s * detail::advect(sp, Bt, Bt));
    const VectorXd fB = mhd::assemble_load(sp, md.curl_forcing, th) + M * B0 / dt -
                        0.5 * gamma_bar * (A * B0) + amh * (A * B0) - gap * (A * Bt) +
                        0.5 * (D.transpose() * m.lambda.values) -
                        xi * (detail::advect(sp, ut, Bt) - detail::advect(sp, Bt, ut));
    x = detail::saddle_solve(sp, 1.0 / dt, 0.5 * nu_bar + ah, 0.5, fu,
                             detail::data_at(sp, md.velocity_bc, t1));
    y = detail::saddle_solve(sp, 1.0 / dt, 0.5 * gamma_bar + amh, 0.5, fB,
                             detail::data_at(sp, md.magnetic_bc, t1));
  } else {
    const VectorXd ut = 2.0 * u0 - u1;
    const VectorXd Bt = 2.0 * B0 - B1;
    const VectorXd fu = mhd::assemble_load(sp, md.forcing, t1) + M * (4.0 * u0 - u1) / (2.0 * dt) -
                        nup * (A * ut) + ah * (A * (4.0 * u0 - u1)) -
                        xi * (detail::advect(sp, ut, ut) - s * detail::advect(sp, Bt, Bt));
    const VectorXd fB = mhd::assemble_load(sp, md.curl_forcing, t1) +
                        M * (4.0 * B0 - B1) / (2.0 * dt) - gap * (A * Bt) +
                        amh * (A * (4.0 * B0 - B1)) -
                        xi * (detail::advect(sp, ut, Bt) - detail::advect(sp, Bt, ut));
    x = detail::saddle_solve(sp, 1.5 / dt, nu_bar + 3.0 * ah, 1.0, fu,
                             detail::data_at(sp, md.velocity_bc, t1));
    y = detail::saddle_solve(sp, 1.5 / dt, gamma_bar + 3.0 * amh, 1.0, fB,
                             detail::data_at(sp, md.magnetic_bc, t1));
  }
  return {x.head(nv), y.head(nv), x.segment(nv, np), y.segment(nv, np)};
}

}  // namespace oracle
