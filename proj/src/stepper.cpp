#include "mhd/stepper.hpp"

#include "mhd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <string>

namespace mhd {

using Eigen::VectorXd;

Scheme parse_scheme(const std::string& name) {
  if (name == "cn") return Scheme::cn;
  if (name == "bdf2") return Scheme::bdf2;
  if (name == "primitive") return Scheme::primitive;
  throw ConfigError("unknown scheme '" + name + "' (expected cn, bdf2 or primitive)");
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::cn:
      return "cn";
    case Scheme::bdf2:
      return "bdf2";
    case Scheme::primitive:
      return "primitive";
  }
  return "?";
}

Extrapolation parse_extrapolation(const std::string& name) {
  if (name == "tilde") return Extrapolation::tilde;
  if (name == "bdf" || name == "hat") return Extrapolation::hat;
  throw ConfigError("unknown extrapolation '" + name + "' (expected tilde or bdf)");
}

MeanFluctuation compute_mean_fluctuation(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("mean of an empty list");
  MeanFluctuation r;
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  r.fluctuations.reserve(values.size());
  for (double v : values) r.fluctuations.push_back(v - r.mean);
  return r;
}

std::size_t step_count(double T, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("final time must be positive");
  const double ratio = T / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-8 * std::max(1.0, ratio)) {
    throw InvalidArgument("final time " + std::to_string(T) + " is not a multiple of dt " +
                          std::to_string(dt));
  }
  return static_cast<std::size_t>(n);
}

double effective_c0(const EnsembleConfig& config, const TaylorHoodSpaces& spaces) {
  if (config.C0 < 0.0) throw InvalidArgument("C0 must be positive");
  return config.C0 > 0.0 ? config.C0 : 1e-8 * spaces.mesh().area();
}

namespace {

Field vfield(VectorXd v) { return Field{Role::velocity, std::move(v)}; }
Field sfield(VectorXd v) { return Field{Role::scalar, std::move(v)}; }

void validate_config(const EnsembleConfig& config, const TaylorHoodSpaces& spaces) {
  if (config.members.empty()) throw InvalidArgument("ensemble needs at least one member");
  if (!(config.dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (!(config.alpha >= 0.0) || !(config.alpha_m >= 0.0)) {
    throw InvalidArgument("stabilization coefficients must be nonnegative");
  }
  if (!config.fg.F || !config.fg.G) throw InvalidArgument("F/G pair is incomplete");
  const auto tags = spaces.mesh().boundary_tags();
  for (std::size_t j = 0; j < config.members.size(); ++j) {
    const MemberData& m = config.members[j];
    if (!(m.nu > 0.0) || !(m.gamma > 0.0)) {
      throw InvalidArgument("member " + std::to_string(j) + ": nu and gamma must be positive");
    }
    for (const BoundaryData* bc : {&m.velocity_bc, &m.magnetic_bc}) {
      if (bc->empty()) continue;
      for (const auto& [tag, fn] : *bc) {
        if (std::find(tags.begin(), tags.end(), tag) == tags.end()) {
          throw ConfigError("member " + std::to_string(j) + ": boundary tag " +
                            std::to_string(tag) + " does not occur in the mesh");
        }
      }
      for (int tag : tags) {
        if (bc->find(tag) == bc->end()) {
          throw ConfigError("member " + std::to_string(j) + ": no boundary data for tag " +
                            std::to_string(tag));
        }
      }
    }
  }
}

double stabilization_h(const EnsembleConfig& config, const TaylorHoodSpaces& spaces) {
  return config.h > 0.0 ? config.h : spaces.mesh().grid_spacing();
}

VectorXd bc_vector(const TaylorHoodSpaces& spaces, const std::vector<std::size_t>& dofs,
                   const BoundaryData& data, double t) {
  if (data.empty()) return VectorXd::Zero(static_cast<Eigen::Index>(dofs.size()));
  DirichletValues bv = boundary_values(spaces, data, t);
  if (bv.dofs != dofs) throw ConfigError("boundary data does not cover the constrained dofs");
  return bv.values;
}

double relative_divergence(const SparseMatrix& D, const VectorXd& u) {
  const double n = u.norm();
  return n > 0.0 ? (D * u).norm() / n : 0.0;
}

void require_scheme(const SharedOperators& shared, Scheme scheme) {
  if (shared.scheme != scheme) {
    throw InvalidArgument("operators were built for scheme " + to_string(shared.scheme) +
                          ", not " + to_string(scheme));
  }
}

// Sub-problem 2 right-hand sides: explicit nonlinear terms.
void nonlinear_rhs(const TaylorHoodSpaces& spaces, const VectorXd& ut, const VectorXd& Bt,
                   double s, VectorXd& ru, VectorXd& rB) {
  const Field fu = vfield(ut);
  const Field fB = vfield(Bt);
  const VectorXd uu = skew_convection_vector(fu, fu, spaces);
  const VectorXd BB = skew_convection_vector(fB, fB, spaces);
  const VectorXd Bu = skew_convection_vector(fB, fu, spaces);
  const VectorXd uB = skew_convection_vector(fu, fB, spaces);
  ru = -uu + s * BB;
  rB = Bu - uB;
}

double h1_sq(const SparseMatrix& A, const VectorXd& v) { return v.dot(A * v); }

double energy_of(const VectorXd& u, const VectorXd& B, const SparseMatrix& M, double s, double C0) {
  return 0.5 * u.dot(M * u) + 0.5 * s * B.dot(M * B) + C0;
}

}  // namespace

std::shared_ptr<const SharedOperators> prepare_shared_operators(
    const EnsembleConfig& config, std::shared_ptr<const TaylorHoodSpaces> spaces, Scheme scheme) {
  if (!spaces) throw InvalidArgument("null spaces");
  if (scheme == Scheme::primitive) {
    throw InvalidArgument("the primitive scheme has no shared operators");
  }
  validate_config(config, *spaces);
  auto ops = std::make_shared<SharedOperators>();
  ops->scheme = scheme;
  ops->dt = config.dt;
  ops->h = stabilization_h(config, *spaces);
  ops->spaces = spaces;
  ops->mass = assemble_mass(*spaces, Role::velocity);
  ops->stiffness = assemble_stiffness(*spaces, Role::velocity);
  ops->divergence = assemble_divergence(*spaces);
  std::vector<double> nus, gammas;
  for (const MemberData& m : config.members) {
    nus.push_back(m.nu);
    gammas.push_back(m.gamma);
  }
  const MeanFluctuation mn = compute_mean_fluctuation(nus);
  const MeanFluctuation mg = compute_mean_fluctuation(gammas);
  ops->nu_bar = mn.mean;
  ops->gamma_bar = mg.mean;
  ops->nu_prime = mn.fluctuations;
  ops->gamma_prime = mg.fluctuations;
  ops->C0 = effective_c0(config, *spaces);
  ops->tags = spaces->mesh().boundary_tags();

  const double dt = config.dt;
  const double ah = config.alpha * ops->h;
  const double amh = config.alpha_m * ops->h;
  StokesCoefficients cu, cb;
  if (scheme == Scheme::cn) {
    cu = {1.0 / dt, 0.5 * ops->nu_bar + ah, 0.5};
    cb = {1.0 / dt, 0.5 * ops->gamma_bar + amh, 0.5};
  } else {
    cu = {1.5 / dt, ops->nu_bar + 3.0 * ah, 1.0};
    cb = {1.5 / dt, ops->gamma_bar + 3.0 * amh, 1.0};
  }
  ops->velocity = std::make_shared<const StokesOperator>(spaces, ops->mass, ops->stiffness,
                                                         ops->divergence, cu, ops->tags);
  ops->magnetic = std::make_shared<const StokesOperator>(spaces, ops->mass, ops->stiffness,
                                                         ops->divergence, cb, ops->tags);
  return ops;
}

MemberState initial_state(const TaylorHoodSpaces& spaces, const EnsembleConfig& config,
                          const MemberInitial& init, double t0) {
  MemberState st;
  const Field u0 = interpolate(init.u, t0, spaces);
  const Field B0 = interpolate(init.B, t0, spaces);
  st.u = {u0, u0, u0};
  st.B = {B0, B0, B0};
  st.p = interpolate(init.p, t0, spaces);
  st.lambda = interpolate(init.lambda, t0, spaces);
  st.t = t0;
  st.step = 0;
  const EnergyParams ep{config.s, effective_c0(config, spaces)};
  const double E0 = shifted_energy(u0, B0, ep, spaces);
  st.scalars.R = config.fg.G(E0);
  st.scalars.R_half = st.scalars.R;
  st.scalars.xi = 1.0;
  return st;
}

StepResult cn_step(const SharedOperators& shared, const MemberState& member,
                   const EnsembleConfig& config, std::size_t j) {
  require_scheme(shared, Scheme::cn);
  const TaylorHoodSpaces& sp = *shared.spaces;
  const MemberData& md = config.members.at(j);
  const SparseMatrix& M = shared.mass;
  const SparseMatrix& A = shared.stiffness;
  const SparseMatrix& D = shared.divergence;
  const double dt = shared.dt;
  const double s = config.s;
  const double t_half = member.t + 0.5 * dt;
  const double t1 = member.t + dt;

  const VectorXd& un = member.u[0].values;
  const VectorXd& Bn = member.B[0].values;
  VectorXd ut, Bt;
  if (config.extrapolation == Extrapolation::tilde) {
    ut = un + 0.5 * member.u[1].values - 0.5 * member.u[2].values;
    Bt = Bn + 0.5 * member.B[1].values - 0.5 * member.B[2].values;
  } else {
    ut = 1.5 * un - 0.5 * member.u[1].values;
    Bt = 1.5 * Bn - 0.5 * member.B[1].values;
  }

  const double ah = config.alpha * shared.h;
  const double amh = config.alpha_m * shared.h;
  const VectorXd f_load = assemble_load(sp, md.forcing, t_half);
  const VectorXd g_load = assemble_load(sp, md.curl_forcing, t_half);

  // Sub-problem 1: linear part with the boundary data.
  const VectorXd r1u = f_load + (1.0 / dt) * (M * un) +
                       A * ((ah - 0.5 * shared.nu_bar) * un - shared.nu_prime[j] * ut) +
                       0.5 * (D.transpose() * member.p.values);
  const VectorXd r1B = g_load + (1.0 / dt) * (M * Bn) +
                       A * ((amh - 0.5 * shared.gamma_bar) * Bn - shared.gamma_prime[j] * Bt) +
                       0.5 * (D.transpose() * member.lambda.values);
  const auto& cdofs = shared.velocity->constrained_dofs();
  const auto hat_u =
      shared.velocity->solve(r1u, VectorXd(), bc_vector(sp, cdofs, md.velocity_bc, t1));
  const auto hat_B =
      shared.magnetic->solve(r1B, VectorXd(), bc_vector(sp, cdofs, md.magnetic_bc, t1));

  // Sub-problem 2: explicit nonlinear terms, homogeneous data.
  VectorXd r2u, r2B;
  nonlinear_rhs(sp, ut, Bt, s, r2u, r2B);
  const auto sh_u = shared.velocity->solve(r2u, VectorXd());
  const auto sh_B = shared.magnetic->solve(r2B, VectorXd());

  StepResult out;
  StepDiagnostics& dg = out.diag;
  const VectorXd u_bar = hat_u.velocity + sh_u.velocity;
  const VectorXd B_bar = hat_B.velocity + sh_B.velocity;
  const VectorXd u_mid = 0.5 * (u_bar + un);
  const VectorXd B_mid = 0.5 * (B_bar + Bn);

  dg.energy = energy_of(u_bar, B_bar, M, s, shared.C0);
  dg.dissipation = md.nu * h1_sq(A, u_mid) + s * md.gamma * h1_sq(A, B_mid);
  if (dg.dissipation < 0.0) dg.dissipation = 0.0;  // roundoff on a zero field
  Field p_flux = member.p;
  Field l_flux = member.lambda;
  if (config.flux_pressure == FluxPressure::predicted) {
    p_flux = sfield(0.5 * (hat_u.pressure + sh_u.pressure + member.p.values));
    l_flux = sfield(0.5 * (hat_B.pressure + sh_B.pressure + member.lambda.values));
  }
  dg.bs = boundary_functional_bs(vfield(u_mid), vfield(B_mid), p_flux, l_flux, md.nu, md.gamma, s,
                                 sp);
  dg.S0 = compute_s0(f_load.dot(u_mid), s * g_load.dot(B_mid), dg.bs);
  dg.F_R_prev = config.fg.F(member.scalars.R);
  dg.xi = update_xi_cn(member.scalars.R, dg.energy, dg.dissipation, dg.S0, dt, config.fg);
  const double R_next = update_R_cn(dg.xi, dg.energy, config.fg);
  dg.F_R = config.fg.F(R_next);
  dg.residual = std::max({hat_u.residual, hat_B.residual, sh_u.residual, sh_B.residual});

  MemberState& st = out.state;
  st.u = {vfield(hat_u.velocity + dg.xi * sh_u.velocity), member.u[0], member.u[1]};
  st.B = {vfield(hat_B.velocity + dg.xi * sh_B.velocity), member.B[0], member.B[1]};
  st.p = sfield(hat_u.pressure + dg.xi * sh_u.pressure);
  st.lambda = sfield(hat_B.pressure + dg.xi * sh_B.pressure);
  st.scalars = member.scalars;
  st.scalars.R = R_next;
  st.scalars.xi = dg.xi;
  st.t = t1;
  st.step = member.step + 1;
  dg.div_u = relative_divergence(D, st.u[0].values);
  dg.div_B = relative_divergence(D, st.B[0].values);
  dg.u_bar = vfield(u_bar);
  dg.B_bar = vfield(B_bar);
  return out;
}

StepResult bdf2_step(const SharedOperators& shared, const MemberState& member,
                     const EnsembleConfig& config, std::size_t j) {
  require_scheme(shared, Scheme::bdf2);
  if (member.step < 1) throw InvalidArgument("bdf2_step needs two history levels (bootstrap first)");
  const TaylorHoodSpaces& sp = *shared.spaces;
  const MemberData& md = config.members.at(j);
  const SparseMatrix& M = shared.mass;
  const SparseMatrix& A = shared.stiffness;
  const SparseMatrix& D = shared.divergence;
  const double dt = shared.dt;
  const double s = config.s;
  const double t1 = member.t + dt;

  const VectorXd& un = member.u[0].values;
  const VectorXd& um = member.u[1].values;
  const VectorXd& Bn = member.B[0].values;
  const VectorXd& Bm = member.B[1].values;
  const VectorXd ut = 2.0 * un - um;
  const VectorXd Bt = 2.0 * Bn - Bm;

  const double ah = config.alpha * shared.h;
  const double amh = config.alpha_m * shared.h;
  const VectorXd f_load = assemble_load(sp, md.forcing, t1);
  const VectorXd g_load = assemble_load(sp, md.curl_forcing, t1);

  const VectorXd r1u = f_load + M * ((2.0 / dt) * un - (0.5 / dt) * um) +
                       A * (ah * (4.0 * un - um) - shared.nu_prime[j] * ut);
  const VectorXd r1B = g_load + M * ((2.0 / dt) * Bn - (0.5 / dt) * Bm) +
                       A * (amh * (4.0 * Bn - Bm) - shared.gamma_prime[j] * Bt);
  const auto& cdofs = shared.velocity->constrained_dofs();
  const auto hat_u =
      shared.velocity->solve(r1u, VectorXd(), bc_vector(sp, cdofs, md.velocity_bc, t1));
  const auto hat_B =
      shared.magnetic->solve(r1B, VectorXd(), bc_vector(sp, cdofs, md.magnetic_bc, t1));

  VectorXd r2u, r2B;
  nonlinear_rhs(sp, ut, Bt, s, r2u, r2B);
  const auto sh_u = shared.velocity->solve(r2u, VectorXd());
  const auto sh_B = shared.magnetic->solve(r2B, VectorXd());

  StepResult out;
  StepDiagnostics& dg = out.diag;
  const VectorXd u_bar = hat_u.velocity + sh_u.velocity;
  const VectorXd B_bar = hat_B.velocity + sh_B.velocity;
  const VectorXd u_ext = 1.5 * u_bar - 0.5 * un;
  const VectorXd B_ext = 1.5 * B_bar - 0.5 * Bn;

  dg.energy = energy_of(u_ext, B_ext, M, s, shared.C0);
  dg.dissipation = md.nu * h1_sq(A, u_bar) + s * md.gamma * h1_sq(A, B_bar);
  if (dg.dissipation < 0.0) dg.dissipation = 0.0;
  Field p_flux = member.p;
  Field l_flux = member.lambda;
  if (config.flux_pressure == FluxPressure::predicted) {
    p_flux = sfield(hat_u.pressure + sh_u.pressure);
    l_flux = sfield(hat_B.pressure + sh_B.pressure);
  }
  dg.bs = boundary_functional_bs(vfield(u_bar), vfield(B_bar), p_flux, l_flux, md.nu, md.gamma, s,
                                 sp);
  dg.S0 = compute_s0(f_load.dot(u_bar), s * g_load.dot(B_bar), dg.bs);
  dg.F_R_prev = config.fg.F(member.scalars.R_half);
  dg.xi = update_xi_bdf2(member.scalars.R_half, dg.energy, dg.dissipation, dg.S0, dt, config.fg);
  const BDF2RUpdate ru = update_R_bdf2(dg.xi, dg.energy, member.scalars.R, config.fg);
  dg.F_R = config.fg.F(ru.R_3half);
  dg.residual = std::max({hat_u.residual, hat_B.residual, sh_u.residual, sh_B.residual});

  MemberState& st = out.state;
  st.u = {vfield(hat_u.velocity + dg.xi * sh_u.velocity), member.u[0], member.u[1]};
  st.B = {vfield(hat_B.velocity + dg.xi * sh_B.velocity), member.B[0], member.B[1]};
  st.p = sfield(hat_u.pressure + dg.xi * sh_u.pressure);
  st.lambda = sfield(hat_B.pressure + dg.xi * sh_B.pressure);
  st.scalars.R = ru.R_next;
  st.scalars.R_half = ru.R_3half;
  st.scalars.xi = dg.xi;
  st.t = t1;
  st.step = member.step + 1;
  dg.div_u = relative_divergence(D, st.u[0].values);
  dg.div_B = relative_divergence(D, st.B[0].values);
  dg.u_bar = vfield(u_ext);
  dg.B_bar = vfield(B_ext);
  return out;
}

StepResult bootstrap(const SharedOperators& cn_ops, const MemberState& initial,
                     const EnsembleConfig& config, std::size_t j) {
  StepResult r = cn_step(cn_ops, initial, config, j);
  const VectorXd& u0 = initial.u[0].values;
  const VectorXd& B0 = initial.B[0].values;
  VectorXd ue, Be;
  if (config.bdf_start == BdfStart::half_step) {
    ue = 0.5 * (r.diag.u_bar.values + u0);
    Be = 0.5 * (r.diag.B_bar.values + B0);
  } else {
    ue = 1.5 * r.diag.u_bar.values - 0.5 * u0;
    Be = 1.5 * r.diag.B_bar.values - 0.5 * B0;
  }
  const double E = energy_of(ue, Be, cn_ops.mass, config.s, cn_ops.C0);
  r.state.scalars.R_half = config.fg.G(E);
  if (!(r.state.scalars.R_half > 0.0)) throw InvariantViolation("R_half must be positive");
  return r;
}

namespace {

void add_block(std::vector<Eigen::Triplet<double>>& t, const SparseMatrix& S, Eigen::Index r0,
               Eigen::Index c0, double scale, bool transpose = false) {
  for (Eigen::Index c = 0; c < S.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(S, c); it; ++it) {
      const auto r = transpose ? it.col() : it.row();
      const auto cc = transpose ? it.row() : it.col();
      t.emplace_back(static_cast<int>(r0 + r), static_cast<int>(c0 + cc), scale * it.value());
    }
  }
}

}  // namespace

StepResult primitive_step(const TaylorHoodSpaces& spaces, const MemberState& member,
                          const EnsembleConfig& config, std::size_t j) {
  validate_config(config, spaces);
  const MemberData& md = config.members.at(j);
  const auto nv = static_cast<Eigen::Index>(spaces.num_velocity_dofs());
  const auto np = static_cast<Eigen::Index>(spaces.num_scalar_dofs());
  const double dt = config.dt;
  const double s = config.s;
  const double h = stabilization_h(config, spaces);
  const double t1 = member.t + dt;

  const SparseMatrix M = assemble_mass(spaces, Role::velocity);
  const SparseMatrix A = assemble_stiffness(spaces, Role::velocity);
  const SparseMatrix D = assemble_divergence(spaces);
  const SparseMatrix Cu = assemble_skew_convection_matrix(member.u[0], spaces);
  const SparseMatrix CB = assemble_skew_convection_matrix(member.B[0], spaces);
  const VectorXd e = scalar_basis_integrals(spaces);

  // Unknowns [u, B, p, lambda, mu_p, mu_lambda].
  const Eigen::Index oB = nv, op = 2 * nv, ol = 2 * nv + np, om = 2 * nv + 2 * np;
  const Eigen::Index n = om + 2;
  const SparseMatrix Kuu = (1.0 / dt) * M + (md.nu + config.alpha * h) * A + Cu;
  const SparseMatrix KBB = (1.0 / dt) * M + (md.gamma + config.alpha_m * h) * A + Cu;
  std::vector<Eigen::Triplet<double>> t;
  add_block(t, Kuu, 0, 0, 1.0);
  add_block(t, CB, 0, oB, -s);
  add_block(t, D, 0, op, -1.0, true);
  add_block(t, KBB, oB, oB, 1.0);
  add_block(t, CB, oB, 0, -1.0);
  add_block(t, D, oB, ol, -1.0, true);
  add_block(t, D, op, 0, -1.0);
  add_block(t, D, ol, oB, -1.0);
  for (Eigen::Index i = 0; i < np; ++i) {
    t.emplace_back(static_cast<int>(op + i), static_cast<int>(om), e[i]);
    t.emplace_back(static_cast<int>(om), static_cast<int>(op + i), e[i]);
    t.emplace_back(static_cast<int>(ol + i), static_cast<int>(om + 1), e[i]);
    t.emplace_back(static_cast<int>(om + 1), static_cast<int>(ol + i), e[i]);
  }
  SparseMatrix K(n, n);
  K.setFromTriplets(t.begin(), t.end());
  K.makeCompressed();

  const auto tags = spaces.mesh().boundary_tags();
  const auto cdofs = spaces.boundary_dofs(tags);
  std::vector<std::size_t> fixed = cdofs;
  for (std::size_t d : cdofs) fixed.push_back(d + static_cast<std::size_t>(nv));
  VectorXd g(static_cast<Eigen::Index>(fixed.size()));
  const auto nc = static_cast<Eigen::Index>(cdofs.size());
  g.head(nc) = bc_vector(spaces, cdofs, md.velocity_bc, t1);
  g.tail(nc) = bc_vector(spaces, cdofs, md.magnetic_bc, t1);

  VectorXd rhs = VectorXd::Zero(n);
  const VectorXd& un = member.u[0].values;
  const VectorXd& Bn = member.B[0].values;
  rhs.head(nv) = assemble_load(spaces, md.forcing, t1) + (1.0 / dt) * (M * un) +
                 (config.alpha * h) * (A * un);
  rhs.segment(oB, nv) = assemble_load(spaces, md.curl_forcing, t1) + (1.0 / dt) * (M * Bn) +
                        (config.alpha_m * h) * (A * Bn);

  const ConstrainedSystem system(K, fixed);
  StepResult out;
  const VectorXd x = system.solve(rhs, g, &out.diag.residual);

  MemberState& st = out.state;
  st.u = {vfield(x.head(nv)), member.u[0], member.u[1]};
  st.B = {vfield(x.segment(oB, nv)), member.B[0], member.B[1]};
  st.p = sfield(x.segment(op, np));
  st.lambda = sfield(x.segment(ol, np));
  st.t = t1;
  st.step = member.step + 1;
  const double C0 = effective_c0(config, spaces);
  const double E = energy_of(st.u[0].values, st.B[0].values, M, s, C0);
  st.scalars = member.scalars;
  st.scalars.R = config.fg.G(E);
  st.scalars.xi = 1.0;

  StepDiagnostics& dg = out.diag;
  dg.xi = 1.0;
  dg.energy = E;
  dg.F_R_prev = energy_of(un, Bn, M, s, C0);
  dg.F_R = E;
  dg.dissipation = md.nu * h1_sq(A, st.u[0].values) + s * md.gamma * h1_sq(A, st.B[0].values);
  dg.div_u = relative_divergence(D, st.u[0].values);
  dg.div_B = relative_divergence(D, st.B[0].values);
  dg.u_bar = st.u[0];
  dg.B_bar = st.B[0];
  return out;
}

namespace {

template <class Fn>
StepResult guarded(std::size_t j, Fn&& fn) {
  const std::string prefix = "member " + std::to_string(j) + ": ";
  try {
    return fn();
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(prefix + e.what());
  } catch (const SolverError& e) {
    throw SolverError(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  }
}

template <class StepFn>
std::vector<StepResult> advance_all(const std::vector<MemberState>& states, bool parallel,
                                    StepFn&& step) {
  const std::size_t J = states.size();
  std::vector<StepResult> results(J);
  if (parallel && J > 1) {
    std::vector<std::future<StepResult>> futures;
    futures.reserve(J);
    for (std::size_t j = 0; j < J; ++j) {
      futures.push_back(std::async(std::launch::async, [&, j] {
        return guarded(j, [&] { return step(states[j], j); });
      }));
    }
    for (std::size_t j = 0; j < J; ++j) results[j] = futures[j].get();
  } else {
    for (std::size_t j = 0; j < J; ++j) results[j] = guarded(j, [&] { return step(states[j], j); });
  }
  return results;
}

}  // namespace

RunResult run_ensemble(const EnsembleConfig& config, std::shared_ptr<const TaylorHoodSpaces> spaces,
                       const std::vector<MemberInitial>& initial, const Observer& observer) {
  if (!spaces) throw InvalidArgument("null spaces");
  validate_config(config, *spaces);
  if (initial.size() != config.members.size()) {
    throw InvalidArgument("need one initial condition per member");
  }
  const std::size_t nsteps = step_count(config.T, config.dt);
  const std::size_t f0 = factorization_count();
  const std::size_t J = config.members.size();

  RunResult result;
  std::vector<MemberState> states;
  states.reserve(J);
  for (const MemberInitial& init : initial) states.push_back(initial_state(*spaces, config, init));

  auto record = [&](const std::vector<StepResult>* step_results) {
    StepRecord rec;
    rec.step = states.front().step;
    rec.t = states.front().t;
    if (step_results != nullptr) {
      for (const StepResult& r : *step_results) rec.members.push_back(r.diag);
    }
    if (observer) observer(states, rec);
    for (StepDiagnostics& d : rec.members) {
      d.u_bar = Field{};
      d.B_bar = Field{};
    }
    result.history.push_back(std::move(rec));
  };
  auto accept = [&](std::vector<StepResult>& rs) {
    for (std::size_t j = 0; j < J; ++j) states[j] = std::move(rs[j].state);
    record(&rs);
  };

  record(nullptr);
  if (config.scheme == Scheme::cn) {
    const auto ops = prepare_shared_operators(config, spaces, Scheme::cn);
    for (std::size_t n = 0; n < nsteps; ++n) {
      auto rs = advance_all(states, config.parallel_members, [&](const MemberState& m, std::size_t j) {
        return cn_step(*ops, m, config, j);
      });
      accept(rs);
    }
  } else if (config.scheme == Scheme::bdf2) {
    std::shared_ptr<const SharedOperators> bdf;
    if (nsteps > 0) {
      auto cn_ops = prepare_shared_operators(config, spaces, Scheme::cn);
      auto rs = advance_all(states, config.parallel_members, [&](const MemberState& m, std::size_t j) {
        return bootstrap(*cn_ops, m, config, j);
      });
      accept(rs);
    }
    if (nsteps > 1) bdf = prepare_shared_operators(config, spaces, Scheme::bdf2);
    for (std::size_t n = 1; n < nsteps; ++n) {
      auto rs = advance_all(states, config.parallel_members, [&](const MemberState& m, std::size_t j) {
        return bdf2_step(*bdf, m, config, j);
      });
      accept(rs);
    }
  } else {
    for (std::size_t n = 0; n < nsteps; ++n) {
      auto rs = advance_all(states, config.parallel_members, [&](const MemberState& m, std::size_t j) {
        return primitive_step(*spaces, m, config, j);
      });
      accept(rs);
    }
  }
  result.final_states = std::move(states);
  result.factorizations = factorization_count() - f0;
  result.steps = nsteps;
  return result;
}

}  // namespace mhd
