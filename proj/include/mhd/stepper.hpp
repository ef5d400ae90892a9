#pragma once

#include "mhd/fem/assembly.hpp"
#include "mhd/fem/dirichlet.hpp"
#include "mhd/gpav.hpp"
#include "mhd/saddle_solver.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace mhd {

enum class Scheme { cn, bdf2, primitive };

/// CN half-step extrapolant: tilde = u^n + 1/2 u^{n-1} - 1/2 u^{n-2},
/// hat = 3/2 u^n - 1/2 u^{n-1}.
enum class Extrapolation { tilde, hat };

/// Time level of p and lambda inside the boundary flux term of S0.
/// level_n uses the stored p^n; predicted uses the pressure paired with the
/// energy fields (p-hat + p-sharp, averaged with p^n for CN).
enum class FluxPressure { level_n, predicted };

/// Half-step R handed from the CN launch step to the first BDF2 step.
/// half_step: G(E(u-bar^{1/2}, B-bar^{1/2})); extrapolated: G(E(3/2 u-bar^1 - 1/2 u^0, ...)).
enum class BdfStart { half_step, extrapolated };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);
Extrapolation parse_extrapolation(const std::string& name);

/// One realization: physical parameters, forcing and boundary data.
struct MemberData {
  double nu = 1.0;
  double gamma = 1.0;
  VectorFunction forcing;       // f
  VectorFunction curl_forcing;  // curl g, already curled
  /// Tag -> function. Empty map means homogeneous data on every tag.
  BoundaryData velocity_bc;
  BoundaryData magnetic_bc;
};

struct EnsembleConfig {
  std::vector<MemberData> members;
  double s = 1.0;
  double C0 = 0.0;  // 0 -> 1e-8 * domain area
  double dt = 0.01;
  double T = 1.0;
  double alpha = 0.0;
  double alpha_m = 0.0;
  Scheme scheme = Scheme::cn;
  double h = 0.0;  // 0 -> mesh grid spacing
  Extrapolation extrapolation = Extrapolation::tilde;
  FluxPressure flux_pressure = FluxPressure::predicted;
  BdfStart bdf_start = BdfStart::extrapolated;
  FGPair fg = FGPair::square_sqrt();
  bool parallel_members = false;
};

/// Mean and fluctuations of a list of values.
struct MeanFluctuation {
  double mean = 0.0;
  std::vector<double> fluctuations;
};
MeanFluctuation compute_mean_fluctuation(const std::vector<double>& values);

struct MemberState {
  std::array<Field, 3> u;  // levels n, n-1, n-2
  std::array<Field, 3> B;
  Field p;
  Field lambda;
  ScalarState scalars;
  double t = 0.0;
  std::size_t step = 0;
};

struct StepDiagnostics {
  double xi = 1.0;
  double F_R_prev = 0.0;  // F(R^n), or F(R^{n+1/2}) for BDF2
  double F_R = 0.0;       // F(R^{n+1}), or F(R^{n+3/2}) for BDF2
  double energy = 0.0;    // shifted energy of the predicted fields
  double dissipation = 0.0;
  double S0 = 0.0;
  double bs = 0.0;
  double div_u = 0.0;  // |D u| / |u|
  double div_B = 0.0;
  double residual = 0.0;  // largest relative solve residual of the step
  Field u_bar;            // fields entering the energy
  Field B_bar;
};

struct SharedOperators {
  Scheme scheme = Scheme::cn;
  double dt = 0.0;
  double h = 0.0;
  std::shared_ptr<const TaylorHoodSpaces> spaces;
  SparseMatrix mass;
  SparseMatrix stiffness;
  SparseMatrix divergence;
  double nu_bar = 0.0;
  double gamma_bar = 0.0;
  std::vector<double> nu_prime;
  std::vector<double> gamma_prime;
  double C0 = 0.0;
  std::vector<int> tags;
  std::shared_ptr<const StokesOperator> velocity;
  std::shared_ptr<const StokesOperator> magnetic;
};

/// Factorizes the velocity and magnetic operators of `scheme` (cn or bdf2).
std::shared_ptr<const SharedOperators> prepare_shared_operators(
    const EnsembleConfig& config, std::shared_ptr<const TaylorHoodSpaces> spaces, Scheme scheme);

struct StepResult {
  MemberState state;
  StepDiagnostics diag;
};

StepResult cn_step(const SharedOperators& shared, const MemberState& member,
                   const EnsembleConfig& config, std::size_t j);
StepResult bdf2_step(const SharedOperators& shared, const MemberState& member,
                     const EnsembleConfig& config, std::size_t j);

/// Fields from functions, history filled with copies, R^0 = G(E(u^0, B^0)).
struct MemberInitial {
  VectorFunction u;
  VectorFunction B;
  ScalarFunction p;
  ScalarFunction lambda;
};
MemberState initial_state(const TaylorHoodSpaces& spaces, const EnsembleConfig& config,
                          const MemberInitial& init, double t0 = 0.0);

/// C0 actually used: config.C0, or 1e-8 times the domain area when unset.
double effective_c0(const EnsembleConfig& config, const TaylorHoodSpaces& spaces);

/// BDF2 launch: one CN step with `cn_ops`, then the half-step R chosen by config.bdf_start.
StepResult bootstrap(const SharedOperators& cn_ops, const MemberState& initial,
                     const EnsembleConfig& config, std::size_t j);

/// First-order coupled semi-implicit step; assembles and factorizes every call.
StepResult primitive_step(const TaylorHoodSpaces& spaces, const MemberState& member,
                          const EnsembleConfig& config, std::size_t j);

struct StepRecord {
  std::size_t step = 0;
  double t = 0.0;
  std::vector<StepDiagnostics> members;  // empty for the initial record
};

/// Called after setup (step 0) and after every accepted step.
using Observer = std::function<void(const std::vector<MemberState>&, const StepRecord&)>;

struct RunResult {
  std::vector<MemberState> final_states;
  std::vector<StepRecord> history;  // diagnostics only; fields dropped
  std::size_t factorizations = 0;
  std::size_t steps = 0;
};

RunResult run_ensemble(const EnsembleConfig& config, std::shared_ptr<const TaylorHoodSpaces> spaces,
                       const std::vector<MemberInitial>& initial, const Observer& observer = {});

/// Number of steps for (T, dt); T must be a multiple of dt up to rounding.
std::size_t step_count(double T, double dt);

}  // namespace mhd
