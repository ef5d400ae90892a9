#include "mhd/gpav.hpp"

#include "mhd/errors.hpp"

#include <cmath>
#include <string>

namespace mhd {

FGPair FGPair::square_sqrt() {
  return FGPair{[](double x) { return x * x; }, [](double x) { return std::sqrt(x); }};
}

double shifted_energy(const Field& u, const Field& B, const EnergyParams& params,
                      const TaylorHoodSpaces& spaces) {
  if (!(params.C0 > 0.0)) throw InvalidArgument("shifted_energy: C0 must be positive");
  const double nu = l2_norm(u, spaces);
  const double nb = l2_norm(B, spaces);
  return 0.5 * nu * nu + 0.5 * params.s * nb * nb + params.C0;
}

double compute_s0(double f_work, double g_work, double bs) { return f_work + g_work + bs; }

namespace {

double xi_formula(double F_R, double E, double dissipation, double S0, double dt) {
  if (!(E > 0.0)) throw InvariantViolation("shifted energy must be positive, got " + std::to_string(E));
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (dissipation < 0.0) throw InvalidArgument("dissipation must be nonnegative");
  const double a = std::abs(S0);
  const double xi = (F_R + a * dt) / (E + dt * dissipation + dt * (a - S0));
  if (!(xi > 0.0) || !std::isfinite(xi)) {
    throw InvariantViolation("xi = " + std::to_string(xi) + " is not positive");
  }
  return xi;
}

}  // namespace

double update_xi_cn(double R_n, double E_bar, double dissipation, double S0, double dt,
                    const FGPair& fg) {
  return xi_formula(fg.F(R_n), E_bar, dissipation, S0, dt);
}

double update_R_cn(double xi, double E_bar, const FGPair& fg) {
  if (!(xi > 0.0)) throw InvariantViolation("xi must be positive");
  if (!(E_bar > 0.0)) throw InvariantViolation("shifted energy must be positive");
  return fg.G(xi * E_bar);
}

double update_xi_bdf2(double R_half, double E_bar_3half, double dissipation, double S0, double dt,
                      const FGPair& fg) {
  return xi_formula(fg.F(R_half), E_bar_3half, dissipation, S0, dt);
}

BDF2RUpdate update_R_bdf2(double xi, double E_bar_3half, double R_n, const FGPair& fg) {
  if (!(xi > 0.0)) throw InvariantViolation("xi must be positive");
  if (!(E_bar_3half > 0.0)) throw InvariantViolation("shifted energy must be positive");
  if (!(R_n > 0.0)) throw InvariantViolation("R^n must be positive");
  const double r32 = fg.G(xi * E_bar_3half);
  return {r32, (2.0 / 3.0) * r32 + (1.0 / 3.0) * R_n};
}

}  // namespace mhd
