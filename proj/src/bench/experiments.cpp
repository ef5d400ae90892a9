#include "mhd/bench.hpp"

#include "mhd/errors.hpp"
#include "mhd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#ifndef MHD_DEFAULT_CHANNEL_MESH
#define MHD_DEFAULT_CHANNEL_MESH ""
#endif

namespace mhd::bench {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

EnsembleConfig base_config(const RunSpec& spec) {
  EnsembleConfig c;
  c.s = spec.s;
  c.T = spec.T;
  c.alpha = spec.alpha;
  c.alpha_m = spec.alpha_m;
  c.scheme = spec.scheme;
  c.extrapolation = spec.extrapolation;
  c.flux_pressure = spec.flux_pressure;
  c.bdf_start = spec.bdf_start;
  c.parallel_members = spec.parallel;
  return c;
}

std::vector<Manufactured> manufactured_members(const RunSpec& spec) {
  std::vector<Manufactured> ms;
  for (double e : spec.eps) {
    ms.push_back(Manufactured{e, spec.nu * (1.0 + e), spec.gamma * (1.0 + e), spec.s});
  }
  return ms;
}

std::shared_ptr<const TaylorHoodSpaces> unit_square_spaces(int n) {
  return build_taylor_hood(generate_unit_square(n));
}

double total_energy(const MemberState& st, double s, const TaylorHoodSpaces& spaces) {
  const double nu = l2_norm(st.u[0], spaces);
  const double nb = l2_norm(st.B[0], spaces);
  return 0.5 * nu * nu + 0.5 * s * nb * nb;
}

struct ManufacturedRun {
  std::vector<TrajectoryNorms> u, B;
  std::vector<double> xi_dev;
  std::size_t factorizations = 0;
};

ManufacturedRun run_manufactured(const RunSpec& spec, int n, double dt, Scheme scheme, double alpha,
                                 double alpha_m) {
  if (spec.eps.empty()) throw ConfigError("at least one perturbation is required");
  const auto spaces = unit_square_spaces(n);
  const auto ms = manufactured_members(spec);
  EnsembleConfig config = base_config(spec);
  config.scheme = scheme;
  config.alpha = alpha;
  config.alpha_m = alpha_m;
  config.dt = dt;
  std::vector<MemberInitial> init;
  ManufacturedRun run;
  for (const Manufactured& m : ms) {
    config.members.push_back(m.member());
    init.push_back(m.initial());
    run.u.emplace_back(*spaces, [m](double x, double y, double t) { return m.u(x, y, t); });
    run.B.emplace_back(*spaces, [m](double x, double y, double t) { return m.B(x, y, t); });
    run.xi_dev.push_back(0.0);
  }
  const auto observer = [&](const std::vector<MemberState>& states, const StepRecord& rec) {
    const double w = rec.step == 0 ? 0.0 : dt;
    for (std::size_t j = 0; j < states.size(); ++j) {
      run.u[j].add(states[j].u[0], rec.t, w);
      run.B[j].add(states[j].B[0], rec.t, w);
      if (!rec.members.empty()) {
        run.xi_dev[j] = std::max(run.xi_dev[j], std::abs(rec.members[j].xi - 1.0));
      }
    }
  };
  const RunResult result = run_ensemble(config, spaces, init, observer);
  run.factorizations = result.factorizations;
  return run;
}

bool is_monotone(const std::vector<double>& v, std::optional<std::size_t>& first) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    // one ulp of slack for F(G(x)) round trips
    if (v[i] > v[i - 1] * (1.0 + 4e-16)) {
      first = i;
      return false;
    }
  }
  return true;
}

}  // namespace

TrajectoryNorms::TrajectoryNorms(const TaylorHoodSpaces& spaces, VectorFunction exact)
    : spaces_(&spaces), exact_(std::move(exact)) {}

void TrajectoryNorms::add(const Field& computed, double t, double weight) {
  Field e = interpolate(exact_, t, *spaces_);
  e.values -= computed.values;
  linf_ = std::max(linf_, l2_norm(e, *spaces_));
  const double g = h1_seminorm(e, *spaces_);
  grad_sq_ += weight * g * g;
}

TrajectoryErrors trajectory_norms(const std::vector<Field>& computed,
                                  const std::vector<double>& times, const VectorFunction& exact,
                                  const TaylorHoodSpaces& spaces) {
  if (computed.size() != times.size()) throw InvalidArgument("one time per computed level");
  TrajectoryNorms acc(spaces, exact);
  for (std::size_t n = 0; n < computed.size(); ++n) {
    acc.add(computed[n], times[n], n == 0 ? 0.0 : times[n] - times[n - 1]);
  }
  return {acc.linf_l2(), acc.grad_l2()};
}

RunSpec default_spec(const std::string& experiment) {
  RunSpec s;
  s.experiment = experiment;
  if (experiment == "convergence") {
    return s;
  }
  if (experiment == "stability") {
    s.n = {50};
    s.dt = {1.0, 0.5, 0.1, 0.02};
    s.T = 5.0;
    s.nu = s.gamma = 0.1;
    return s;
  }
  if (experiment == "channel") {
    s.mesh_path = MHD_DEFAULT_CHANNEL_MESH;
    s.dt = {1e-3};
    s.T = 8.8;
    s.s = 0.01;
    s.nu = 1.0 / 50.0;
    s.gamma = 0.1;
    return s;
  }
  if (experiment == "compare") {
    s.n = {25, 100};
    s.dt = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    s.T = 2.5;
    s.eps = {0.1, 0.2};
    s.nu = 1.0;
    s.gamma = 0.2;
    s.alpha = 1.0;
    s.alpha_m = 0.2;
    return s;
  }
  throw ConfigError("unknown experiment '" + experiment + "'");
}

std::vector<std::pair<int, double>> refinement_chain(const RunSpec& spec) {
  if (spec.n.empty() || spec.dt.empty()) throw ConfigError("n and dt must not be empty");
  std::vector<std::pair<int, double>> chain;
  if (spec.n.size() == 1 && spec.dt.size() == 1) {
    if (spec.levels < 1) throw ConfigError("levels must be at least 1");
    int n = spec.n.front();
    double dt = spec.dt.front();
    for (int k = 0; k < spec.levels; ++k) {
      chain.emplace_back(n, dt);
      n *= 2;
      dt /= 2.0;
    }
    return chain;
  }
  if (spec.n.size() != spec.dt.size()) {
    throw ConfigError("n and dt lists must have the same length");
  }
  for (std::size_t k = 0; k < spec.n.size(); ++k) chain.emplace_back(spec.n[k], spec.dt[k]);
  return chain;
}

ErrorReport run_convergence(const RunSpec& spec) {
  const auto chain = refinement_chain(spec);
  const std::size_t J = spec.eps.size();
  std::vector<std::vector<ErrorRow>> by_member(J);
  for (const auto& [n, dt] : chain) {
    const ManufacturedRun run = run_manufactured(spec, n, dt, spec.scheme, spec.alpha, spec.alpha_m);
    for (std::size_t j = 0; j < J; ++j) {
      ErrorRow row;
      row.h = 1.0 / n;
      row.dt = dt;
      row.member = static_cast<int>(j + 1);
      row.err = {run.u[j].linf_l2(), run.u[j].grad_l2(), run.B[j].linf_l2(), run.B[j].grad_l2()};
      row.max_xi_deviation = run.xi_dev[j];
      row.factorizations = run.factorizations;
      by_member[j].push_back(row);
    }
  }
  ErrorReport report;
  for (auto& rows : by_member) report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  compute_rates(report);
  return report;
}

void compute_rates(ErrorReport& report) {
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    ErrorRow& row = report.rows[i];
    row.rate.fill(std::nullopt);
    if (i == 0 || report.rows[i - 1].member != row.member) continue;
    const ErrorRow& prev = report.rows[i - 1];
    for (int k = 0; k < 4; ++k) {
      if (prev.err[k] > 0.0 && row.err[k] > 0.0) row.rate[k] = std::log2(prev.err[k] / row.err[k]);
    }
  }
}

std::string format_csv(const ErrorReport& report) {
  std::ostringstream out;
  out << "h,dt,member,err_u_inf0,rate,err_gradu_20,rate,err_B_inf0,rate,err_gradB_20,rate\n";
  for (const ErrorRow& r : report.rows) {
    out << num(r.h) << ',' << num(r.dt) << ',' << r.member;
    for (int k = 0; k < 4; ++k) {
      out << ',' << num(r.err[k]) << ',';
      if (r.rate[k]) out << num(*r.rate[k]);
    }
    out << '\n';
  }
  return out.str();
}

void write_csv(const ErrorReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << format_csv(report);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<EnergySeries> run_stability(const RunSpec& spec) {
  if (spec.n.empty()) throw ConfigError("stability needs a mesh size");
  if (spec.eps.empty()) throw ConfigError("at least one perturbation is required");
  const auto spaces = unit_square_spaces(spec.n.front());
  std::vector<EnergySeries> all;
  for (double dt : spec.dt) {
    EnsembleConfig config = base_config(spec);
    config.dt = dt;
    std::vector<MemberInitial> init;
    for (double e : spec.eps) {
      MemberData m;
      m.nu = spec.nu;
      m.gamma = spec.gamma;
      config.members.push_back(m);
      init.push_back(stability_initial(e));
    }
    const std::size_t J = config.members.size();
    std::vector<EnergySeries> series(J);
    for (std::size_t j = 0; j < J; ++j) {
      series[j].scheme = spec.scheme;
      series[j].dt = dt;
      series[j].member = static_cast<int>(j + 1);
      series[j].min_xi = 1.0;
    }
    const auto observer = [&](const std::vector<MemberState>& states, const StepRecord& rec) {
      for (std::size_t j = 0; j < J; ++j) {
        EnergySeries& es = series[j];
        const MemberState& st = states[j];
        es.t.push_back(rec.t);
        es.energy.push_back(total_energy(st, spec.s, *spaces));
        if (spec.scheme == Scheme::bdf2) {
          if (rec.step >= 1) {
            es.modified_t.push_back(rec.t - 0.5 * dt);
            es.modified.push_back(config.fg.F(st.scalars.R_half));
          }
        } else if (spec.scheme == Scheme::cn) {
          es.modified_t.push_back(rec.t);
          es.modified.push_back(config.fg.F(st.scalars.R));
        } else {
          es.modified_t.push_back(rec.t);
          es.modified.push_back(es.energy.back());
        }
        if (!rec.members.empty()) {
          es.xi.push_back(rec.members[j].xi);
          es.min_xi = std::min(es.min_xi, rec.members[j].xi);
        }
      }
    };
    run_ensemble(config, spaces, init, observer);
    for (EnergySeries& es : series) {
      es.monotone = is_monotone(es.modified, es.first_violation);
      all.push_back(std::move(es));
    }
  }
  return all;
}

void write_series(const EnergySeries& series, const std::filesystem::path& dir,
                  const std::string& tag) {
  const std::string stem = tag + "_" + to_string(series.scheme) + "_dt" + num(series.dt) + "_m" +
                           std::to_string(series.member);
  {
    auto out = open_out(dir / ("energy_" + stem + ".dat"));
    out << std::setprecision(12);
    for (std::size_t i = 0; i < series.t.size(); ++i) {
      out << series.t[i] << ' ' << series.energy[i] << '\n';
    }
  }
  auto out = open_out(dir / ("modified_" + stem + ".dat"));
  out << std::setprecision(12);
  for (std::size_t i = 0; i < series.modified.size(); ++i) {
    out << series.modified_t[i] << ' ' << series.modified[i] << '\n';
  }
}

void write_snapshot(const TaylorHoodSpaces& spaces, const std::vector<MemberState>& states, int nx,
                    int ny, const std::filesystem::path& path) {
  if (nx < 2 || ny < 2) throw InvalidArgument("snapshot grid needs at least 2x2 points");
  const PointLocator locator(spaces);
  Point lo = spaces.mesh().vertices().front();
  Point hi = lo;
  for (const Point& v : spaces.mesh().vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  auto out = open_out(path);
  out << "x,y,member,u1,u2,B1,B2\n";
  out << std::setprecision(8);
  for (std::size_t j = 0; j < states.size(); ++j) {
    for (int b = 0; b < ny; ++b) {
      for (int a = 0; a < nx; ++a) {
        const Point x(lo.x() + (hi.x() - lo.x()) * a / (nx - 1),
                      lo.y() + (hi.y() - lo.y()) * b / (ny - 1));
        Vec2 u, B;
        if (!locator.evaluate(states[j].u[0], x, u)) continue;
        locator.evaluate(states[j].B[0], x, B);
        out << x.x() << ',' << x.y() << ',' << j + 1 << ',' << u.x() << ',' << u.y() << ','
            << B.x() << ',' << B.y() << '\n';
      }
    }
  }
}

ChannelSummary run_channel(const RunSpec& spec) {
  if (spec.mesh_path.empty()) throw ConfigError("channel run needs a mesh file (--mesh)");
  if (spec.dt.empty()) throw ConfigError("channel run needs a time step");
  if (spec.eps.empty()) throw ConfigError("at least one perturbation is required");
  const auto spaces = build_taylor_hood(read_mesh_ascii(spec.mesh_path));
  const auto mesh_tags = spaces->mesh().boundary_tags();
  auto keep_mesh_tags = [&](BoundaryData bc) {
    for (auto it = bc.begin(); it != bc.end();) {
      if (std::find(mesh_tags.begin(), mesh_tags.end(), it->first) == mesh_tags.end()) {
        it = bc.erase(it);
      } else {
        ++it;
      }
    }
    return bc;
  };

  EnsembleConfig config = base_config(spec);
  config.dt = spec.dt.front();
  std::vector<MemberInitial> init;
  for (double e : spec.eps) {
    MemberData m = channel_member(e, spec.nu, spec.gamma);
    m.velocity_bc = keep_mesh_tags(m.velocity_bc);
    m.magnetic_bc = keep_mesh_tags(m.magnetic_bc);
    config.members.push_back(std::move(m));
    init.push_back(channel_initial(e));
  }
  const std::size_t J = config.members.size();
  ChannelSummary summary;
  summary.min_xi = 1.0;
  std::vector<std::vector<std::array<double, 3>>> energy(J);  // t, energy, F(R)
  const auto observer = [&](const std::vector<MemberState>& states, const StepRecord& rec) {
    for (std::size_t j = 0; j < J; ++j) {
      const double E = total_energy(states[j], spec.s, *spaces);
      const double FR = config.fg.F(spec.scheme == Scheme::bdf2 && rec.step >= 1
                                        ? states[j].scalars.R_half
                                        : states[j].scalars.R);
      energy[j].push_back({rec.t, E, FR});
      summary.max_energy = std::max(summary.max_energy, E);
      if (!std::isfinite(E)) summary.finite = false;
      if (!rec.members.empty()) {
        const StepDiagnostics& d = rec.members[j];
        summary.min_xi = std::min(summary.min_xi, d.xi);
        summary.max_divergence = std::max({summary.max_divergence, d.div_u, d.div_B});
        summary.max_residual = std::max(summary.max_residual, d.residual);
      }
    }
    if (spec.progress_every > 0 && rec.step % spec.progress_every == 0) {
      std::clog << "step " << rec.step << " t=" << rec.t << " min_xi=" << summary.min_xi
                << " max_energy=" << summary.max_energy << '\n';
    }
  };
  RunResult result = run_ensemble(config, spaces, init, observer);
  summary.steps = result.steps;
  summary.factorizations = result.factorizations;

  const std::filesystem::path dir(spec.out_dir);
  const std::string scheme = to_string(spec.scheme);
  for (std::size_t j = 0; j < J; ++j) {
    const auto path = dir / ("channel_energy_" + scheme + "_m" + std::to_string(j + 1) + ".dat");
    auto out = open_out(path);
    out << std::setprecision(12);
    for (const auto& e : energy[j]) out << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
    summary.files.push_back(path);
  }
  const auto snap = dir / ("channel_snapshot_" + scheme + ".csv");
  write_snapshot(*spaces, result.final_states, spec.snapshot_nx, spec.snapshot_ny, snap);
  summary.files.push_back(snap);
  return summary;
}

std::vector<CompareRow> run_compare(const RunSpec& spec) {
  std::vector<CompareRow> rows;
  for (int n : spec.n) {
    for (double dt : spec.dt) {
      CompareRow row;
      row.h = 1.0 / n;
      row.dt = dt;
      const Scheme schemes[4] = {Scheme::cn, Scheme::bdf2, Scheme::cn, Scheme::bdf2};
      for (int k = 0; k < 4; ++k) {
        const bool stab = k >= 2;
        const ManufacturedRun run = run_manufactured(spec, n, dt, schemes[k], stab ? spec.alpha : 0.0,
                                                     stab ? spec.alpha_m : 0.0);
        row.err_u[k] = run.u.front().linf_l2();
        row.err_B[k] = run.B.front().linf_l2();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_compare_csv(const std::vector<CompareRow>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "h,dt,field,sav_cn,sav_bdf2,stab_sav_cn,stab_sav_bdf2\n";
  for (const char* field : {"u", "B"}) {
    const bool is_u = field[0] == 'u';
    for (const CompareRow& r : rows) {
      const auto& e = is_u ? r.err_u : r.err_B;
      out << num(r.h) << ',' << num(r.dt) << ',' << field;
      for (double v : e) out << ',' << num(v);
      out << '\n';
    }
  }
}

}  // namespace mhd::bench
