#pragma once

#include "mhd/fem/assembly.hpp"

#include <functional>

namespace mhd {

struct EnergyParams {
  double s = 1.0;
  double C0 = 1e-8;  // must be > 0
};

/// F strictly increasing and positive on (0, inf), G its inverse.
struct FGPair {
  std::function<double(double)> F;
  std::function<double(double)> G;

  static FGPair square_sqrt();
};

struct ScalarState {
  double R = 0.0;       // R at integer steps
  double R_half = 0.0;  // R at half steps (BDF2)
  double xi = 1.0;
};

/// 1/2 |u|^2 + s/2 |B|^2 + C0 (L2 norms).
double shifted_energy(const Field& u, const Field& B, const EnergyParams& params,
                      const TaylorHoodSpaces& spaces);

double compute_s0(double f_work, double g_work, double bs);

/// xi = (F(R_n) + |S0| dt) / (E + dt * dissipation + dt (|S0| - S0)).
double update_xi_cn(double R_n, double E_bar, double dissipation, double S0, double dt,
                    const FGPair& fg);

/// R^{n+1} = G(xi E).
double update_R_cn(double xi, double E_bar, const FGPair& fg);

double update_xi_bdf2(double R_half, double E_bar_3half, double dissipation, double S0, double dt,
                      const FGPair& fg);

struct BDF2RUpdate {
  double R_3half;
  double R_next;
};

/// R^{n+3/2} = G(xi E), R^{n+1} = 2/3 R^{n+3/2} + 1/3 R^n.
BDF2RUpdate update_R_bdf2(double xi, double E_bar_3half, double R_n, const FGPair& fg);

}  // namespace mhd
