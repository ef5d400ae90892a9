#include "mhd/errors.hpp"
#include "mhd/gpav.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using namespace mhd;

const FGPair fg = FGPair::square_sqrt();

TEST(FGPair, InverseOnWideRange) {
  for (double x = 1e-6; x < 1e6; x *= 1.7) {
    EXPECT_NEAR(fg.G(fg.F(x)), x, 1e-12 * std::max(1.0, x));
    EXPECT_GT(fg.F(x), 0.0);
    EXPECT_GT(fg.F(1.01 * x), fg.F(x));
  }
}

TEST(ShiftedEnergy, ElementaryValues) {
  auto sp = build_taylor_hood(generate_unit_square(3));
  const Field z = Field::zeros(*sp, Role::velocity);
  EXPECT_NEAR(shifted_energy(z, z, {1.0, 0.01}, *sp), 0.01, 1e-17);
  const Field one = interpolate(VectorFunction([](double, double, double) { return Vec2(1, 0); }), 0.0, *sp);
  EXPECT_NEAR(shifted_energy(one, z, {1.0, 1e-300}, *sp), 0.5, 1e-13);
  EXPECT_NEAR(shifted_energy(z, one, {0.4, 1e-300}, *sp), 0.2, 1e-13);
  EXPECT_THROW(shifted_energy(z, z, {1.0, 0.0}, *sp), InvalidArgument);
}

TEST(S0, Sum) {
  EXPECT_EQ(compute_s0(0.0, 0.0, 0.0), 0.0);
  EXPECT_NEAR(compute_s0(0.3, -0.1, 0.0), 0.2, 1e-16);
  EXPECT_LT(compute_s0(0.1, 0.0, -0.5), 0.0);
}

TEST(XiCN, FormulaValues) {
  // R chosen so that F(R) = 0.5
  const double R = std::sqrt(0.5);
  EXPECT_NEAR(update_xi_cn(R, 0.6, 1.0, 0.1, 0.1, fg), 0.51 / 0.7, 1e-15);
  EXPECT_NEAR(update_xi_cn(R, 0.6, 1.0, -0.1, 0.1, fg), 0.51 / 0.72, 1e-15);
  EXPECT_NEAR(0.51 / 0.7, 0.7285714285714286, 1e-15);
  EXPECT_NEAR(0.51 / 0.72, 0.7083333333333334, 1e-15);
}

TEST(XiCN, ZeroSolutionFixedPoint) {
  const double C0 = 1e-8;
  EXPECT_EQ(update_xi_cn(std::sqrt(C0), fg.F(std::sqrt(C0)), 0.0, 0.0, 0.1, fg), 1.0);
}

TEST(XiCN, NonpositiveEnergyIsAnInvariantViolation) {
  EXPECT_THROW(update_xi_cn(1.0, 0.0, 0.0, 0.0, 0.1, fg), InvariantViolation);
  EXPECT_THROW(update_xi_cn(1.0, -1.0, 0.0, 0.0, 0.1, fg), InvariantViolation);
  EXPECT_THROW(update_xi_cn(1.0, 1.0, 0.0, 0.0, 0.0, fg), InvalidArgument);
}

TEST(RCN, Values) {
  EXPECT_NEAR(update_R_cn(1.0, 0.25, fg), 0.5, 1e-16);
  EXPECT_NEAR(update_R_cn(4.0, 0.25, fg), 1.0, 1e-16);
  EXPECT_THROW(update_R_cn(0.0, 0.25, fg), InvariantViolation);
  EXPECT_THROW(update_R_cn(1.0, -0.25, fg), InvariantViolation);
}

TEST(XiBDF2, FormulaValues) {
  EXPECT_NEAR(update_xi_bdf2(std::sqrt(0.5), 0.5, 0.2, 0.0, 0.5, fg), 0.5 / 0.6, 1e-15);
  const double C0 = 2e-8;
  EXPECT_EQ(update_xi_bdf2(std::sqrt(C0), fg.F(std::sqrt(C0)), 0.0, 0.0, 0.5, fg), 1.0);
}

TEST(RBDF2, Values) {
  const auto r = update_R_bdf2(1.0, 0.36, 0.3, fg);
  EXPECT_NEAR(r.R_3half, 0.6, 1e-15);
  EXPECT_NEAR(r.R_next, 0.5, 1e-15);
  const double C0 = 1e-8;
  const auto fixed = update_R_bdf2(1.0, C0, std::sqrt(C0), fg);
  EXPECT_NEAR(fixed.R_next, std::sqrt(C0), 1e-20);
  EXPECT_THROW(update_R_bdf2(1.0, 0.36, 0.0, fg), InvariantViolation);
  EXPECT_THROW(update_R_bdf2(-1.0, 0.36, 0.3, fg), InvariantViolation);
}

// With zero forcing the CN update collapses to F(R+) = F(R) / (1 + dt D / E):
// xi = F(R) / (E + dt D), R+ = sqrt(xi E).
TEST(Properties, ClosedFormDecayAndPositivity) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const double R = 1e-4 + 10.0 * u(gen);
    const double E = 1e-6 + 5.0 * u(gen);
    const double D = 20.0 * u(gen);
    const double dt = std::pow(10.0, -4.0 + 5.0 * u(gen));
    const double xi = update_xi_cn(R, E, D, 0.0, dt, fg);
    const double Rn = update_R_cn(xi, E, fg);
    EXPECT_GT(xi, 0.0);
    EXPECT_LE(fg.F(Rn), fg.F(R) * (1 + 1e-14));
    EXPECT_NEAR(fg.F(Rn), fg.F(R) / (1.0 + dt * D / E), 1e-12 * fg.F(R));

    const double S0 = 4.0 * (u(gen) - 0.5);
    EXPECT_GT(update_xi_bdf2(R, E, D, S0, dt, fg), 0.0);
    const auto rb = update_R_bdf2(xi, E, R, fg);
    EXPECT_GT(rb.R_3half, 0.0);
    EXPECT_GT(rb.R_next, 0.0);
  }
}

}  // namespace
