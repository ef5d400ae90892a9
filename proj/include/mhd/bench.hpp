#pragma once

#include "mhd/stepper.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mhd::bench {

/// Smooth exact solution on the unit square, scaled by a = 1 + eps:
///   u = a (y^5 + t^2, x^5 + t^2)
///   p = 10 a (2x - 1)(2y - 1)(1 + t^2)
///   B = a (sin(pi y) + t^2, sin(pi x) + t^2),  lambda = 0
/// with f and curl g obtained by substitution into the MHD system.
struct Manufactured {
  double eps = 0.0;
  double nu = 0.5;
  double gamma = 0.5;
  double s = 1.0;

  Vec2 u(double x, double y, double t) const;
  Vec2 B(double x, double y, double t) const;
  double p(double x, double y, double t) const;
  Vec2 forcing(double x, double y, double t) const;
  Vec2 curl_forcing(double x, double y, double t) const;

  MemberData member() const;
  MemberInitial initial() const;
};

/// Residuals of the momentum and induction equations at (x, y, t) with all
/// derivatives taken by fourth-order central differences of step `step`.
/// Returns the larger of the two Euclidean residual norms.
double manufactured_residual(const Manufactured& m, double x, double y, double t,
                             double step = 1e-3);

/// Stability problem: zero forcing, homogeneous data.
MemberInitial stability_initial(double eps);

/// Channel with cylinder: parabolic in/outflow, constant vertical field.
MemberData channel_member(double eps, double nu, double gamma);
MemberInitial channel_initial(double eps);

/// ||e||_{inf,0} = max_n |e(t_n)|_L2 and ||grad e||_{2,0} = sqrt(sum_{n>=1} dt |e(t_n)|_H1^2),
/// e = interpolant(exact) - computed.
class TrajectoryNorms {
 public:
  TrajectoryNorms(const TaylorHoodSpaces& spaces, VectorFunction exact);

  /// weight is dt for n >= 1 and 0 for the initial level.
  void add(const Field& computed, double t, double weight);

  double linf_l2() const noexcept { return linf_; }
  double grad_l2() const noexcept { return std::sqrt(grad_sq_); }

 private:
  const TaylorHoodSpaces* spaces_;
  VectorFunction exact_;
  double linf_ = 0.0;
  double grad_sq_ = 0.0;
};

struct TrajectoryErrors {
  double linf_l2 = 0.0;
  double grad_l2 = 0.0;
};

/// Whole-trajectory version of TrajectoryNorms.
TrajectoryErrors trajectory_norms(const std::vector<Field>& computed,
                                  const std::vector<double>& times, const VectorFunction& exact,
                                  const TaylorHoodSpaces& spaces);

struct RunSpec {
  std::string experiment = "convergence";
  Scheme scheme = Scheme::cn;
  std::vector<int> n{10};
  std::string mesh_path;
  std::vector<double> dt{0.125};
  int levels = 3;
  double T = 1.0;
  std::vector<double> eps{0.1, -0.1};
  double alpha = 0.0;
  double alpha_m = 0.0;
  double s = 1.0;
  double nu = 0.5;
  double gamma = 0.5;
  std::string out_dir = ".";
  Extrapolation extrapolation = Extrapolation::tilde;
  FluxPressure flux_pressure = FluxPressure::predicted;
  BdfStart bdf_start = BdfStart::extrapolated;
  bool parallel = false;
  int snapshot_nx = 221;
  int snapshot_ny = 42;
  std::size_t progress_every = 0;  // channel: log every k steps to stderr
};

/// Defaults of each experiment (convergence, stability, channel, compare).
RunSpec default_spec(const std::string& experiment);

struct ErrorRow {
  double h = 0.0;
  double dt = 0.0;
  int member = 1;  // 1-based
  std::array<double, 4> err{};  // u inf0, grad u 20, B inf0, grad B 20
  std::array<std::optional<double>, 4> rate{};
  double max_xi_deviation = 0.0;  // max_n |xi - 1|
  std::size_t factorizations = 0;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;  // member-major, refinement order within member
};

/// (h, dt) pairs of a refinement chain: explicit lists of equal length, or a
/// single base pair halved `levels - 1` times.
std::vector<std::pair<int, double>> refinement_chain(const RunSpec& spec);

ErrorReport run_convergence(const RunSpec& spec);

/// Fills the rate columns from consecutive rows of each member.
void compute_rates(ErrorReport& report);

void write_csv(const ErrorReport& report, const std::filesystem::path& path);
std::string format_csv(const ErrorReport& report);

struct EnergySeries {
  Scheme scheme = Scheme::cn;
  double dt = 0.0;
  int member = 1;
  std::vector<double> t;
  std::vector<double> energy;  // 1/2 |u|^2 + s/2 |B|^2 at integer steps
  /// F(R) chain the monotonicity statement is about: integer steps for CN,
  /// half steps from R^{1/2} on for BDF2 (times in modified_t).
  std::vector<double> modified_t;
  std::vector<double> modified;
  std::vector<double> xi;
  bool monotone = true;
  std::optional<std::size_t> first_violation;
  double min_xi = 0.0;
};

/// One series per (dt, member); dt values from spec.dt.
std::vector<EnergySeries> run_stability(const RunSpec& spec);

void write_series(const EnergySeries& series, const std::filesystem::path& dir,
                  const std::string& tag);

struct ChannelSummary {
  std::size_t steps = 0;
  double min_xi = 0.0;
  double max_energy = 0.0;
  double max_divergence = 0.0;
  double max_residual = 0.0;
  bool finite = true;
  std::size_t factorizations = 0;
  std::vector<std::filesystem::path> files;
};

ChannelSummary run_channel(const RunSpec& spec);

/// Point-sampled snapshot: x, y, member, u1, u2, B1, B2 for grid points
/// inside the mesh.
void write_snapshot(const TaylorHoodSpaces& spaces, const std::vector<MemberState>& states,
                    int nx, int ny, const std::filesystem::path& path);

struct CompareRow {
  double h = 0.0;
  double dt = 0.0;
  // SAV-CN, SAV-BDF2, Stab-SAV-CN, Stab-SAV-BDF2 for member 1
  std::array<double, 4> err_u{};
  std::array<double, 4> err_B{};
};

std::vector<CompareRow> run_compare(const RunSpec& spec);
void write_compare_csv(const std::vector<CompareRow>& rows, const std::filesystem::path& path);

}  // namespace mhd::bench
