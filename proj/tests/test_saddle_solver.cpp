#include "mhd/errors.hpp"
#include "mhd/saddle_solver.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <thread>

namespace {

using namespace mhd;
using Dense = Eigen::MatrixXd;

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(gen);
  return v;
}

// Full saddle matrix built densely, then reduced by hand to the free
// unknowns and solved with a full-pivot LU.
struct DenseSaddle {
  Eigen::VectorXd u, p;
  double mu = 0.0;
};

DenseSaddle dense_solve(const TaylorHoodSpaces& sp, StokesCoefficients k, const Eigen::VectorXd& f,
                        const Eigen::VectorXd& r, const std::vector<std::size_t>& fixed,
                        const Eigen::VectorXd& g) {
  const auto nv = static_cast<Eigen::Index>(sp.num_velocity_dofs());
  const auto np = static_cast<Eigen::Index>(sp.num_scalar_dofs());
  const Dense M(assemble_mass(sp, Role::velocity));
  const Dense A(assemble_stiffness(sp, Role::velocity));
  const Dense D(assemble_divergence(sp));
  // e_i = integral of the i-th hat function, from the P1 mass row sums
  const Eigen::VectorXd e = Dense(assemble_mass(sp, Role::scalar)).rowwise().sum();
  const Eigen::Index N = nv + np + 1;
  Dense K = Dense::Zero(N, N);
  K.topLeftCorner(nv, nv) = k.mass * M + k.diffusion * A;
  K.block(0, nv, nv, np) = -k.pressure * D.transpose();
  K.block(nv, 0, np, nv) = -D;
  K.block(nv, nv + np, np, 1) = e;
  K.block(nv + np, nv, 1, np) = e.transpose();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
  b.head(nv) = f;
  b.segment(nv, np) = r;

  std::vector<bool> is_fixed(static_cast<std::size_t>(N), false);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    is_fixed[fixed[i]] = true;
    x[static_cast<Eigen::Index>(fixed[i])] = g[static_cast<Eigen::Index>(i)];
  }
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (!is_fixed[static_cast<std::size_t>(i)]) free.push_back(i);
  }
  const auto nf = static_cast<Eigen::Index>(free.size());
  Dense Kf(nf, nf);
  Eigen::VectorXd bf(nf);
  const Eigen::VectorXd Kx = K * x;
  for (Eigen::Index i = 0; i < nf; ++i) {
    bf[i] = b[free[i]] - Kx[free[i]];
    for (Eigen::Index j = 0; j < nf; ++j) Kf(i, j) = K(free[i], free[j]);
  }
  const Eigen::VectorXd xf = Kf.fullPivLu().solve(bf);
  for (Eigen::Index i = 0; i < nf; ++i) x[free[i]] = xf[i];
  return {x.head(nv), x.segment(nv, np), x[N - 1]};
}

// ------------------------------------------------------------------ SparseLU

TEST(SparseLU, SolvesUnsymmetricSystem) {
  const int n = 30;
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 4.0);
    if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
    if (i > 2) t.emplace_back(i, i - 3, 0.5);
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  const SparseLU lu(A);
  const Eigen::VectorXd b = random_vector(n, 1);
  EXPECT_LT((A * lu.solve(b) - b).norm(), 1e-13);
}

TEST(SparseLU, SingularMatrixRejected) {
  SparseMatrix A(3, 3);
  A.insert(0, 0) = 1.0;
  A.insert(1, 1) = 1.0;
  EXPECT_THROW(SparseLU{A}, SolverError);
}

TEST(SparseLU, ShapeChecks) {
  EXPECT_THROW(SparseLU{SparseMatrix(3, 2)}, InvalidArgument);
  SparseMatrix I(2, 2);
  I.setIdentity();
  const SparseLU lu(I);
  EXPECT_THROW(lu.solve(Eigen::VectorXd::Ones(3)), InvalidArgument);
}

TEST(SparseLU, CountsFactorizationsNotSolves) {
  SparseMatrix I(4, 4);
  I.setIdentity();
  reset_factorization_count();
  const SparseLU a(I);
  const SparseLU b(I);
  for (int k = 0; k < 5; ++k) a.solve(Eigen::VectorXd::Ones(4));
  EXPECT_EQ(factorization_count(), 2u);
}

// --------------------------------------------------------- ConstrainedSystem

TEST(ConstrainedSystem, MatchesDirectReduction) {
  const int n = 12;
  Dense K = Dense::Random(n, n) + 6.0 * Dense::Identity(n, n);
  const SparseMatrix Ks = K.sparseView();
  const std::vector<std::size_t> fixed{0, 5, 11};
  const ConstrainedSystem sys(Ks, fixed);
  const Eigen::VectorXd rhs = random_vector(n, 2);
  const Eigen::VectorXd g = random_vector(3, 3);
  double res = 1.0;
  const Eigen::VectorXd x = sys.solve(rhs, g, &res);
  EXPECT_LT(res, 1e-13);
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    EXPECT_EQ(x[static_cast<Eigen::Index>(fixed[k])], g[static_cast<Eigen::Index>(k)]);
  }
  // free rows of K x = rhs hold
  const Eigen::VectorXd r = K * x - rhs;
  for (int i = 0; i < n; ++i) {
    if (i == 0 || i == 5 || i == 11) continue;
    EXPECT_NEAR(r[i], 0.0, 1e-12);
  }
}

TEST(ConstrainedSystem, RejectsBadInput) {
  SparseMatrix I(4, 4);
  I.setIdentity();
  EXPECT_THROW(ConstrainedSystem(I, {7}), InvalidArgument);
  const ConstrainedSystem sys(I, {1});
  EXPECT_THROW(sys.solve(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(1)), InvalidArgument);
  EXPECT_THROW(sys.solve(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(2)), InvalidArgument);
}

// ------------------------------------------------------------ StokesOperator

class StokesDense : public ::testing::TestWithParam<int> {};

TEST_P(StokesDense, AgreesWithDenseOracle) {
  auto sp = build_taylor_hood(generate_unit_square(GetParam()));
  const StokesCoefficients k{8.0, 0.25, 0.5};
  const StokesOperator op(sp, k, {tags::wall});
  const auto nv = static_cast<Eigen::Index>(sp->num_velocity_dofs());
  const auto np = static_cast<Eigen::Index>(sp->num_scalar_dofs());
  const Eigen::VectorXd f = random_vector(nv, 10);
  const Eigen::VectorXd r = random_vector(np, 11);
  const DirichletValues bv = boundary_values(
      *sp, {{tags::wall, [](double x, double y, double) { return Vec2(y * (1 - y), x - 0.5); }}}, 0.0);
  const auto sol = op.solve(f, r, bv.values);
  const DenseSaddle ref = dense_solve(*sp, k, f, r, op.constrained_dofs(), bv.values);
  EXPECT_LT((sol.velocity - ref.u).lpNorm<Eigen::Infinity>(), 1e-12 * ref.u.lpNorm<Eigen::Infinity>());
  EXPECT_LT((sol.pressure - ref.p).lpNorm<Eigen::Infinity>(), 1e-12 * ref.p.lpNorm<Eigen::Infinity>());
  EXPECT_LT(sol.residual, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Meshes, StokesDense, ::testing::Values(2, 3, 5));

TEST(StokesOperator, SingleSquareIsSingular) {
  // one interior velocity node cannot balance four pressure rows
  auto sp = build_taylor_hood(generate_unit_square(1));
  EXPECT_THROW(StokesOperator(sp, StokesCoefficients{}, {tags::wall}), SolverError);
}

TEST(StokesOperator, MassProjectionReturnsSolenoidalField) {
  auto sp = build_taylor_hood(generate_unit_square(4));
  const auto nv = static_cast<Eigen::Index>(sp->num_velocity_dofs());
  // a discretely divergence-free field with homogeneous boundary values
  const StokesOperator projector(sp, StokesCoefficients{1.0, 1.0, 1.0}, {tags::wall});
  const Eigen::VectorXd w = projector.solve(random_vector(nv, 40), Eigen::VectorXd()).velocity;
  const StokesOperator op(sp, StokesCoefficients{3.0, 0.0, 0.7}, {tags::wall});
  const Eigen::VectorXd rhs = 3.0 * (assemble_mass(*sp, Role::velocity) * w);
  EXPECT_LT((op.solve(rhs, Eigen::VectorXd()).velocity - w).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(StokesOperator, ZeroDataGivesZeroSolution) {
  auto sp = build_taylor_hood(generate_unit_square(3));
  const StokesOperator op(sp, StokesCoefficients{}, {tags::wall});
  const auto sol = op.solve(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sp->num_velocity_dofs())),
                            Eigen::VectorXd());
  EXPECT_EQ(sol.velocity.norm(), 0.0);
  EXPECT_EQ(sol.pressure.norm(), 0.0);
}

TEST(StokesOperator, RefactorizationIsDeterministic) {
  auto sp = build_taylor_hood(generate_unit_square(4));
  const StokesOperator a(sp, StokesCoefficients{2.0, 0.5, 0.5}, {tags::wall});
  const StokesOperator b(sp, StokesCoefficients{2.0, 0.5, 0.5}, {tags::wall});
  const Eigen::VectorXd f = random_vector(static_cast<Eigen::Index>(sp->num_velocity_dofs()), 41);
  const auto sa = a.solve(f, Eigen::VectorXd());
  EXPECT_EQ((sa.velocity - b.solve(f, Eigen::VectorXd()).velocity).norm(), 0.0);
  EXPECT_EQ((sa.velocity - a.solve(f, Eigen::VectorXd()).velocity).norm(), 0.0);
}

TEST(StokesOperator, GradientForcingGoesIntoPressure) {
  auto sp = build_taylor_hood(generate_unit_square(4));
  const double cp = 0.5;
  const StokesOperator op(sp, StokesCoefficients{1.0, 0.3, cp}, {tags::wall});
  const Eigen::VectorXd f =
      assemble_load(*sp, [](double, double, double) { return Vec2(1.0, 2.0); }, 0.0);
  const auto sol = op.solve(f, Eigen::VectorXd());
  const Field phi = interpolate(ScalarFunction([](double x, double y, double) { return x + 2 * y - 1.5; }),
                                0.0, *sp);
  EXPECT_LT(sol.velocity.lpNorm<Eigen::Infinity>(), 1e-11);
  EXPECT_LT((cp * sol.pressure - phi.values).lpNorm<Eigen::Infinity>(), 1e-11);
}

TEST(StokesOperator, SolutionIsDiscretelySolenoidalWithZeroMeanPressure) {
  auto sp = build_taylor_hood(generate_unit_square(5));
  const StokesOperator op(sp, StokesCoefficients{2.0, 0.1, 1.0}, {tags::wall});
  const auto nv = static_cast<Eigen::Index>(sp->num_velocity_dofs());
  const auto sol = op.solve(random_vector(nv, 20), Eigen::VectorXd());
  EXPECT_LT((assemble_divergence(*sp) * sol.velocity).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT(std::abs(scalar_basis_integrals(*sp).dot(sol.pressure)), 1e-10 * sol.pressure.norm());
}

TEST(StokesOperator, RejectsBadCoefficientsAndShapes) {
  auto sp = build_taylor_hood(generate_unit_square(2));
  EXPECT_THROW(StokesOperator(sp, StokesCoefficients{0.0, 1.0, 1.0}, {tags::wall}), InvalidArgument);
  EXPECT_THROW(StokesOperator(sp, StokesCoefficients{1.0, -1.0, 1.0}, {tags::wall}), InvalidArgument);
  EXPECT_THROW(StokesOperator(sp, StokesCoefficients{1.0, 1.0, 0.0}, {tags::wall}), InvalidArgument);
  const StokesOperator op(sp, StokesCoefficients{}, {tags::wall});
  EXPECT_THROW(op.solve(Eigen::VectorXd::Zero(3), Eigen::VectorXd()), InvalidArgument);
  const auto nv = static_cast<Eigen::Index>(sp->num_velocity_dofs());
  EXPECT_THROW(op.solve(Eigen::VectorXd::Zero(nv), Eigen::VectorXd::Zero(2)), InvalidArgument);
}

TEST(StokesOperator, ConcurrentSolvesAgree) {
  auto sp = build_taylor_hood(generate_unit_square(6));
  const auto op = build_stokes_operator(sp, 1.0, 0.5, 1.0, {tags::wall});
  const auto nv = static_cast<Eigen::Index>(sp->num_velocity_dofs());
  const Eigen::VectorXd f1 = random_vector(nv, 30), f2 = random_vector(nv, 31);
  const auto serial1 = op->solve(f1, Eigen::VectorXd());
  const auto serial2 = op->solve(f2, Eigen::VectorXd());
  StokesOperator::Solution a, b;
  std::thread t1([&] { a = op->solve(f1, Eigen::VectorXd()); });
  std::thread t2([&] { b = op->solve(f2, Eigen::VectorXd()); });
  t1.join();
  t2.join();
  EXPECT_EQ((a.velocity - serial1.velocity).norm(), 0.0);
  EXPECT_EQ((b.velocity - serial2.velocity).norm(), 0.0);
}

}  // namespace
