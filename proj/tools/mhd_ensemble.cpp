// Ensemble MHD experiments: convergence, stability, channel, compare.
#include "mhd/bench.hpp"
#include "mhd/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

namespace {

using mhd::bench::RunSpec;

struct Choices {
  std::string scheme = "cn";
  std::string extrapolation = "tilde";
  std::string flux_pressure = "predicted";
  std::string bdf_start = "extrapolated";
};

void add_options(CLI::App& app, RunSpec& spec, Choices& ch, std::string& config) {
  app.add_option("--config", config, "key=value file mirroring the flags; flags given on the command line win")
      ->check(CLI::ExistingFile);
  app.add_option("--scheme", ch.scheme, "cn | bdf2 | primitive")
      ->check(CLI::IsMember({"cn", "bdf2", "primitive"}))
      ->capture_default_str();
  app.add_option("--n", spec.n, "cells per side of the unit square (list)")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--mesh", spec.mesh_path, "mesh file (channel)")->capture_default_str();
  app.add_option("--dt", spec.dt, "time step (list)")->delimiter(',')->capture_default_str();
  app.add_option("--levels", spec.levels, "refinement levels when n and dt are single values")
      ->capture_default_str();
  app.add_option("--T", spec.T, "final time")->capture_default_str();
  app.add_option("--eps", spec.eps, "member perturbations (list)")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--alpha", spec.alpha, "velocity stabilization")->capture_default_str();
  app.add_option("--alpha-m", spec.alpha_m, "magnetic stabilization")->capture_default_str();
  app.add_option("--s", spec.s, "coupling number")->capture_default_str();
  app.add_option("--nu", spec.nu, "base viscosity")->capture_default_str();
  app.add_option("--gamma", spec.gamma, "base magnetic diffusivity")->capture_default_str();
  app.add_option("--out", spec.out_dir, "output directory")->capture_default_str();
  app.add_option("--extrapolation", ch.extrapolation, "tilde | bdf")
      ->check(CLI::IsMember({"tilde", "bdf"}))
      ->capture_default_str();
  app.add_option("--flux-pressure", ch.flux_pressure,
                 "pressure and multiplier in the boundary flux term: level | predicted")
      ->check(CLI::IsMember({"level", "predicted"}))
      ->capture_default_str();
  app.add_option("--bdf-start", ch.bdf_start, "starting auxiliary value for BDF2: half | extrapolated")
      ->check(CLI::IsMember({"half", "extrapolated"}))
      ->capture_default_str();
  app.add_flag("--parallel", spec.parallel, "advance members concurrently");
  app.add_option("--progress", spec.progress_every, "log every k steps (channel)");
  app.add_option("--snapshot-nx", spec.snapshot_nx, "snapshot grid points in x")->capture_default_str();
  app.add_option("--snapshot-ny", spec.snapshot_ny, "snapshot grid points in y")->capture_default_str();
}

// CLI11 only reads config files attached to the root app, so the
// subcommand's file is applied by hand after parsing.
void apply_config(CLI::App& sub, const std::string& path) {
  if (path.empty()) return;
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "config") continue;
    CLI::Option* opt = sub.get_option_no_throw("--" + item.name);
    if (opt == nullptr) throw mhd::ConfigError(path + ": unknown key '" + item.name + "'");
    if (opt->count() > 0) continue;
    for (const auto& v : item.inputs) opt->add_result(v);
    opt->run_callback();
  }
}

void resolve(RunSpec& spec, const Choices& ch) {
  spec.scheme = mhd::parse_scheme(ch.scheme);
  spec.extrapolation = mhd::parse_extrapolation(ch.extrapolation);
  spec.flux_pressure =
      ch.flux_pressure == "predicted" ? mhd::FluxPressure::predicted : mhd::FluxPressure::level_n;
  spec.bdf_start =
      ch.bdf_start == "extrapolated" ? mhd::BdfStart::extrapolated : mhd::BdfStart::half_step;
}

int convergence(const RunSpec& spec) {
  const auto report = mhd::bench::run_convergence(spec);
  const auto path = std::filesystem::path(spec.out_dir) /
                    ("convergence_" + mhd::to_string(spec.scheme) + ".csv");
  mhd::bench::write_csv(report, path);
  std::cout << mhd::bench::format_csv(report);
  double xi_dev = 0.0;
  for (const auto& r : report.rows) xi_dev = std::max(xi_dev, r.max_xi_deviation);
  std::cout << "# max |xi - 1| = " << xi_dev << "\n# wrote " << path.string() << '\n';
  return 0;
}

int stability(const RunSpec& spec) {
  const auto series = mhd::bench::run_stability(spec);
  int status = 0;
  std::printf("%-10s %-8s %-6s %-14s %-14s %-10s %s\n", "scheme", "dt", "member", "E(0)", "E(T)",
              "min_xi", "F(R) monotone");
  for (const auto& s : series) {
    mhd::bench::write_series(s, spec.out_dir, "stability");
    std::printf("%-10s %-8g %-6d %-14.6e %-14.6e %-10.6f %s\n", mhd::to_string(s.scheme).c_str(),
                s.dt, s.member, s.energy.front(), s.energy.back(), s.min_xi,
                s.monotone ? "yes" : "NO");
    if (!s.monotone) {
      std::fprintf(stderr, "F(R) increases at series index %zu (dt=%g, member %d)\n",
                   *s.first_violation, s.dt, s.member);
      status = 1;
    }
    if (s.min_xi <= 0.0) status = 1;
  }
  return status;
}

int channel(const RunSpec& spec) {
  const auto sum = mhd::bench::run_channel(spec);
  std::cout << "steps            " << sum.steps << '\n'
            << "factorizations   " << sum.factorizations << '\n'
            << "min xi           " << sum.min_xi << '\n'
            << "max energy       " << sum.max_energy << '\n'
            << "max divergence   " << sum.max_divergence << '\n'
            << "max residual     " << sum.max_residual << '\n'
            << "finite           " << (sum.finite ? "yes" : "no") << '\n';
  for (const auto& f : sum.files) std::cout << "wrote " << f.string() << '\n';
  return sum.finite && sum.min_xi > 0.0 ? 0 : 1;
}

int compare(const RunSpec& spec) {
  const auto rows = mhd::bench::run_compare(spec);
  const auto path = std::filesystem::path(spec.out_dir) / "compare.csv";
  mhd::bench::write_compare_csv(rows, path);
  std::printf("%-8s %-9s | %-11s %-11s %-11s %-11s | %-11s %-11s %-11s %-11s\n", "h", "dt",
              "u:cn", "u:bdf2", "u:stab-cn", "u:stab-bdf2", "B:cn", "B:bdf2", "B:stab-cn",
              "B:stab-bdf2");
  for (const auto& r : rows) {
    std::printf("%-8g %-9g |", r.h, r.dt);
    for (double e : r.err_u) std::printf(" %-11.4e", e);
    std::printf(" |");
    for (double e : r.err_B) std::printf(" %-11.4e", e);
    std::printf("\n");
  }
  std::cout << "wrote " << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble MHD solver experiments"};
  app.require_subcommand(1);

  const std::vector<std::string> names{"convergence", "stability", "channel", "compare"};
  std::map<std::string, RunSpec> specs;
  std::map<std::string, Choices> choices;
  std::map<std::string, CLI::App*> subs;
  std::map<std::string, std::string> configs;
  for (const auto& name : names) {
    specs[name] = mhd::bench::default_spec(name);
    subs[name] = app.add_subcommand(name, name + " experiment");
    add_options(*subs[name], specs[name], choices[name], configs[name]);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& name : names) {
      if (!subs[name]->parsed()) continue;
      RunSpec& spec = specs[name];
      apply_config(*subs[name], configs[name]);
      resolve(spec, choices[name]);
      if (name == "convergence") return convergence(spec);
      if (name == "stability") return stability(spec);
      if (name == "channel") return channel(spec);
      return compare(spec);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
