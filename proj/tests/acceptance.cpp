// Acceptance checks. One line per criterion; exit status 1 if any selected
// criterion fails.

#include "mhd/bench.hpp"
#include "mhd/errors.hpp"
#include "monolithic.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

namespace {

using namespace mhd;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------- 1, 2

Outcome convergence(Scheme scheme, const std::vector<int>& norms, double lo, double hi) {
  bench::RunSpec spec = bench::default_spec("convergence");
  spec.scheme = scheme;
  const bench::ErrorReport report = bench::run_convergence(spec);
  std::cout << bench::format_csv(report);
  bool ok = true;
  double rmin = 1e300, rmax = -1e300;
  for (const bench::ErrorRow& row : report.rows) {
    for (int k : norms) {
      if (!row.rate[k]) continue;
      rmin = std::min(rmin, *row.rate[k]);
      rmax = std::max(rmax, *row.rate[k]);
      if (!(*row.rate[k] >= lo && *row.rate[k] <= hi)) ok = false;
    }
  }
  return {ok, "rates " + fmt("%.3f", rmin) + " to " + fmt("%.3f", rmax) + ", required [" +
                  fmt("%.2f", lo) + ", " + fmt("%.2f", hi) + "]"};
}

// ------------------------------------------------------------------- 3

Outcome stabilization_gap() {
  bench::RunSpec spec = bench::default_spec("compare");
  spec.n = {25};
  spec.dt = {1.0 / 8, 1.0 / 16};
  const auto rows = bench::run_compare(spec);
  bool ok = true;
  std::string detail;
  for (const bench::CompareRow& r : rows) {
    const double ratio = r.err_u[0] / r.err_u[2];
    if (!(ratio >= 100.0)) ok = false;
    detail += "dt=" + fmt("%g", r.dt) + ": sav-cn " + fmt("%.3e", r.err_u[0]) + ", stab-sav-cn " +
              fmt("%.3e", r.err_u[2]) + " (ratio " + fmt("%.3g", ratio) + "); ";
  }
  detail += "required ratio >= 100";
  return {ok, detail};
}

// ------------------------------------------------------------------- 4

Outcome stability() {
  bool ok = true;
  double min_xi = 1e300;
  std::size_t series = 0;
  for (Scheme scheme : {Scheme::cn, Scheme::bdf2}) {
    bench::RunSpec spec = bench::default_spec("stability");
    spec.scheme = scheme;
    for (const bench::EnergySeries& e : bench::run_stability(spec)) {
      ++series;
      min_xi = std::min(min_xi, e.min_xi);
      if (!e.monotone || !(e.min_xi > 0.0)) {
        ok = false;
        std::cout << to_string(scheme) << " dt=" << e.dt << " member " << e.member
                  << ": not monotone at index " << e.first_violation.value_or(0) << '\n';
      }
    }
  }
  return {ok, std::to_string(series) + " series monotone=" + (ok ? "yes" : "no") + ", min xi " +
                  fmt("%.6f", min_xi)};
}

// ------------------------------------------------------------------- 5

MemberInitial wall_compatible(double a) {
  MemberInitial init = bench::stability_initial(a - 1.0);
  init.B = [a](double x, double y, double) {
    const double sx = std::sin(M_PI * x), sy = std::sin(M_PI * y);
    return Vec2(a * M_PI * sx * sx * std::sin(2 * M_PI * y), -a * M_PI * sy * sy * std::sin(2 * M_PI * x));
  };
  return init;
}

MemberData free_member(double nu, double gamma) {
  MemberData m;
  m.nu = nu;
  m.gamma = gamma;
  m.forcing = [](double, double, double) { return Vec2(0, 0); };
  m.curl_forcing = m.forcing;
  return m;
}

Outcome closed_form() {
  auto sp = build_taylor_hood(generate_unit_square(10));
  double worst = 0.0, max_s0 = 0.0;
  std::size_t checked = 0;
  for (Scheme scheme : {Scheme::cn, Scheme::bdf2}) {
    for (double dt : {1.0, 0.1}) {
      EnsembleConfig c;
      c.members = {free_member(0.11, 0.11), free_member(0.09, 0.09)};
      c.scheme = scheme;
      c.dt = dt;
      c.T = 20 * dt;
      const RunResult r = run_ensemble(c, sp, {wall_compatible(1.1), wall_compatible(0.9)});
      for (const StepRecord& rec : r.history) {
        for (const StepDiagnostics& d : rec.members) {
          const double expected = d.F_R_prev / (1.0 + dt * d.dissipation / d.energy);
          worst = std::max(worst, std::abs(d.F_R - expected) / expected);
          max_s0 = std::max(max_s0, std::abs(d.S0));
          ++checked;
        }
      }
    }
  }
  // the identity presumes S0 = 0, i.e. no boundary or body work
  return {worst <= 1e-12 && max_s0 < 1e-14,
          std::to_string(checked) + " steps, max relative deviation " + fmt("%.2e", worst) +
              " (required <= 1e-12), max |S0| " + fmt("%.1e", max_s0)};
}

// ------------------------------------------------------------------- 6

Outcome superposition() {
  auto sp = build_taylor_hood(generate_unit_square(8));
  const std::vector<double> eps{0.1, -0.1};
  EnsembleConfig c;
  std::vector<MemberInitial> init;
  for (double e : eps) {
    const bench::Manufactured m{e, 0.5 * (1 + e), 0.5 * (1 + e), 1.0};
    c.members.push_back(m.member());
    init.push_back(m.initial());
  }
  c.scheme = Scheme::cn;
  c.dt = 0.125;
  c.T = 5 * c.dt;
  double worst = 0.0;
  std::size_t checked = 0;
  std::vector<MemberState> prev;
  const auto observer = [&](const std::vector<MemberState>& states, const StepRecord& rec) {
    for (std::size_t j = 0; j < rec.members.size(); ++j) {
      const auto ref = oracle::monolithic_step(*sp, prev[j], c, j, rec.members[j].xi);
      for (const auto& [a, b] : {std::pair{&states[j].u[0].values, &ref.u},
                                 std::pair{&states[j].B[0].values, &ref.B}}) {
        worst = std::max(worst, (*a - *b).norm() / b->norm());
      }
      ++checked;
    }
    prev = states;
  };
  run_ensemble(c, sp, init, observer);
  return {checked == 10 && worst <= 1e-9, std::to_string(checked) + " member steps, max relative difference " +
                                              fmt("%.2e", worst) + ", required <= 1e-9"};
}

// ------------------------------------------------------------------- 7

Outcome factorizations() {
  auto sp = build_taylor_hood(generate_unit_square(10));
  const std::vector<double> eps{0.1, -0.1, 0.05, -0.05};
  EnsembleConfig c;
  std::vector<MemberInitial> init;
  for (double e : eps) {
    const bench::Manufactured m{e, 0.5 * (1 + e), 0.5 * (1 + e), 1.0};
    c.members.push_back(m.member());
    init.push_back(m.initial());
  }
  c.scheme = Scheme::cn;
  c.dt = 0.01;
  c.T = 1.0;
  const std::size_t before = factorization_count();
  const RunResult r = run_ensemble(c, sp, init);
  const std::size_t counted = factorization_count() - before;
  return {r.steps == 100 && counted == 2,
          "J=4, " + std::to_string(r.steps) + " steps, " + std::to_string(counted) + " factorizations"};
}

// ------------------------------------------------------------------- 8

Outcome fem_suite() {
  std::vector<std::string> failed;
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> d(-1.0, 1.0);

  auto sp = build_taylor_hood(generate_unit_square(8));
  auto random_field = [&] {
    Field f = Field::zeros(*sp, Role::velocity);
    for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = d(gen);
    return f;
  };
  double skew = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Field a = random_field(), u = random_field();
    const double na = l2_norm(a, *sp), nu = l2_norm(u, *sp);
    // assembled path: u . r(a, u) with r_i = b*(a, u, phi_i)
    skew = std::max(skew, std::abs(u.values.dot(skew_convection_vector(a, u, *sp))) / (na * nu * nu));
  }
  if (!(skew < 1e-12)) failed.push_back("skew " + fmt("%.1e", skew));

  const std::array<Point, 3> v{Point(0.13, 0.05), Point(1.1, 0.4), Point(0.35, 0.92)};
  auto one = build_taylor_hood(Mesh({v[0], v[1], v[2]}, {Cell{0, 1, 2}}, {{{0, 1}, 1}, {{1, 2}, 1}, {{2, 0}, 1}}));
  const Eigen::MatrixXd M(assemble_mass(*one, Role::velocity));
  const Eigen::MatrixXd A(assemble_stiffness(*one, Role::velocity));
  const oracle::P2Cell cell(v);
  const auto nodes = one->cell_nodes(0);
  double elem = 0.0;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double m = oracle::triangle_integral(v[0], v[1], v[2], [&](double x, double y) {
        const auto b = cell.basis(x, y);
        return b[i] * b[j];
      });
      const double a = oracle::triangle_integral(v[0], v[1], v[2], [&](double x, double y) {
        const auto g = cell.gradients(x, y);
        return g[i].dot(g[j]);
      });
      const auto r = static_cast<Eigen::Index>(nodes[i]), c = static_cast<Eigen::Index>(nodes[j]);
      elem = std::max({elem, std::abs(M(r, c) - m), std::abs(A(r, c) - a)});
    }
  }
  if (!(elem < 1e-13)) failed.push_back("element " + fmt("%.1e", elem));

  const Field q = interpolate(VectorFunction([](double x, double y, double) { return Vec2(x * y - y * y, 2 * x * x + y); }),
                              0.0, *sp);
  double repro = 0.0;
  for (std::size_t c = 0; c < sp->mesh().num_cells(); ++c) {
    const oracle::P2Cell pc(oracle::cell_points(sp->mesh(), c));
    const auto coeff = oracle::local_vector(q, *sp, c);
    const fem::CellFrame frame = fem::cell_frame(sp->mesh(), c);
    for (const auto& bq : fem::triangle_rule_degree6().points) {
      const Point x = frame.map(bq);
      const auto phi = pc.basis(x.x(), x.y());
      Vec2 val = Vec2::Zero();
      for (int k = 0; k < 6; ++k) val += phi[k] * coeff.col(k);
      repro = std::max(repro, (val - Vec2(x.x() * x.y() - x.y() * x.y(), 2 * x.x() * x.x() + x.y())).norm());
    }
  }
  if (!(repro < 1e-13)) failed.push_back("reproduction " + fmt("%.1e", repro));

  double div = 0.0;
  for (Scheme scheme : {Scheme::cn, Scheme::bdf2, Scheme::primitive}) {
    EnsembleConfig c;
    std::vector<MemberInitial> init;
    for (double e : {0.1, -0.1}) {
      const bench::Manufactured m{e, 0.5 * (1 + e), 0.5 * (1 + e), 1.0};
      c.members.push_back(m.member());
      init.push_back(m.initial());
    }
    c.scheme = scheme;
    c.dt = 0.0625;
    c.T = 0.5;
    for (const StepRecord& rec : run_ensemble(c, sp, init).history) {
      for (const StepDiagnostics& dg : rec.members) div = std::max({div, dg.div_u, dg.div_B});
    }
  }
  if (!(div < 1e-9)) failed.push_back("divergence " + fmt("%.1e", div));

  std::string detail = "skew " + fmt("%.1e", skew) + ", element " + fmt("%.1e", elem) +
                       ", quadratic reproduction " + fmt("%.1e", repro) + ", divergence " +
                       fmt("%.1e", div);
  return {failed.empty(), detail};
}

// ------------------------------------------------------------------- 9

Outcome channel(const std::string& out_dir) {
  bench::RunSpec spec = bench::default_spec("channel");
  spec.out_dir = out_dir;
  spec.progress_every = 1000;
  const bench::ChannelSummary s = bench::run_channel(spec);
  const bool ok = s.finite && s.steps == 8800 && s.min_xi > 0.0 && s.max_energy < 10.0 &&
                  s.max_divergence < 1e-8;
  return {ok, std::to_string(s.steps) + " steps, min xi " + fmt("%.6f", s.min_xi) + ", max energy " +
                  fmt("%.4g", s.max_energy) + ", max divergence " + fmt("%.1e", s.max_divergence) +
                  ", snapshots in " + out_dir};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  std::string out_dir = "acceptance_out";
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  app.add_option("--out", out_dir, "output directory of the channel run");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"cn convergence rates", [] { return convergence(Scheme::cn, {0, 1}, 1.75, 2.4); }},
      {"bdf2 convergence rates", [] { return convergence(Scheme::bdf2, {0, 1, 2, 3}, 1.75, 2.3); }},
      {"stabilization accuracy gap", stabilization_gap},
      {"unconditional stability", stability},
      {"closed-form modified energy update", closed_form},
      {"superposition vs monolithic solve", superposition},
      {"factorization reuse", factorizations},
      {"fem unit checks", fem_suite},
      {"channel flow smoke run", [&] { return channel(out_dir); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  std::vector<std::string> lines;
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << "  " << id << "  " << criteria[i].first << ": " << o.detail
         << " [" << fmt("%.1f", secs) << " s]";
    std::cout << line.str() << std::endl;
    lines.push_back(line.str());
    all = all && o.pass;
  }
  std::cout << "\nsummary\n";
  for (const std::string& l : lines) std::cout << l << '\n';
  return all ? 0 : 1;
}
