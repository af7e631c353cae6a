#include "kmv/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "kmv/config.hpp"
#include "kmv/csv.hpp"
#include "kmv/errors.hpp"
#include "kmv/manifest.hpp"
#include "kmv/metrics.hpp"
#include "kmv/particle_engine.hpp"
#include "kmv/pde_solver.hpp"

namespace kmv {

namespace {

constexpr std::size_t kReportPoints = 11;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string mode;
  bool quiet = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> report_times(double T) {
  std::vector<double> t(kReportPoints);
  for (std::size_t i = 0; i < kReportPoints; ++i) {
    t[i] = T * static_cast<double>(i) / static_cast<double>(kReportPoints - 1);
  }
  return t;
}

struct Session {
  RunConfig cfg;
  RunManifest manifest;
  std::filesystem::path dir;
};

Session open_session(const Options& opt, const std::string& command, std::istream& in) {
  Session s;
  if (opt.config_path.empty()) {
    std::ostringstream ss;
    ss << in.rdbuf();
    s.cfg = parse_config(ss.str());
  } else {
    s.cfg = parse_config(read_file(opt.config_path));
  }
  s.manifest.seed_source = "config";
  if (opt.seed) {
    s.cfg.sim.seed = *opt.seed;
    s.manifest.seed_source = "cli";
  }
  if (!opt.mode.empty()) s.cfg.sim.mode = opt.mode == "soft" ? KillMode::soft : KillMode::hard;
  if (!opt.out_dir.empty()) s.cfg.outputs.directory = opt.out_dir;
  validate_run_config(s.cfg);

  s.manifest.config = s.cfg;
  s.manifest.command = command;
  s.manifest.version = version_string();
  s.manifest.derived = derive_constants(s.cfg);
  return s;
}

void begin_outputs(Session& s) {
  s.dir = s.cfg.outputs.directory;
  std::error_code ec;
  std::filesystem::create_directories(s.dir, ec);
  if (ec) throw IoError("cannot create output directory " + s.dir.string() + ": " + ec.message());
  s.manifest.started = utc_timestamp();
  s.manifest.write(s.dir / "manifest.cfg");
}

void finish_outputs(Session& s) {
  s.manifest.finished = utc_timestamp();
  s.manifest.write(s.dir / "manifest.cfg");
}

SimConfig particle_config(const RunConfig& cfg, KillMode mode, std::uint64_t seed) {
  SimConfig sim = cfg.sim;
  sim.mode = mode;
  sim.seed = seed;
  sim.record_times = report_times(cfg.model.T);
  if (cfg.outputs.snapshot_stride > 0) {
    const std::size_t n = sim.n_steps();
    for (std::size_t s = 0; s <= n; s += cfg.outputs.snapshot_stride) {
      sim.record_times.push_back(static_cast<double>(s) * sim.dt);
    }
  }
  sim.probes = cfg.probes();
  return sim;
}

void write_particle_outputs(const Session& s, const SimOutput& out) {
  const std::string mode = to_string(out.mode);
  {
    CsvWriter w(s.dir / ("mass_" + mode + ".csv"), {"t", "mass_" + mode});
    for (std::size_t i = 0; i < out.times.size(); ++i) w.row({out.times[i], out.mass[i]});
    w.close();
  }
  const std::size_t stride = s.cfg.outputs.snapshot_stride;
  if (stride > 0) {
    CsvWriter w(s.dir / ("snapshots_" + mode + ".csv"),
                {"t", "particle_id", "x", "alive", "lambda", "weight"});
    for (const auto& snap : out.snapshots) {
      const auto step = static_cast<std::size_t>(std::llround(snap.t / s.cfg.sim.dt));
      if (step % stride != 0) continue;
      for (std::size_t i = 0; i < snap.particles.size(); ++i) {
        const auto& p = snap.particles[i];
        w.row({snap.t, static_cast<double>(i), p.x, p.alive ? 1.0 : 0.0, p.lambda, p.weight});
      }
    }
    w.close();
  }
  if (s.cfg.outputs.field_dump) write_field_csv(s.dir / ("field_" + mode + ".csv"), out.field);
}

DensitySolution run_pde(const RunConfig& cfg) {
  PdeOptions opts;
  opts.record_times = report_times(cfg.model.T);
  opts.probes = cfg.probes();
  const auto rho0 = initial_density(cfg.sim.init, cfg.kernel, cfg.sim.grid);
  return solve_pde(rho0, cfg.model, cfg.kernel, cfg.sim.grid, cfg.pde.dt, cfg.model.T,
                   cfg.overrides, opts);
}

void write_pde_outputs(const Session& s, const DensitySolution& sol) {
  {
    CsvWriter w(s.dir / "mass_pde.csv", {"t", "mass_pde"});
    for (std::size_t i = 0; i < sol.step_times.size(); ++i) w.row({sol.step_times[i], sol.mass[i]});
    w.close();
  }
  CsvWriter w(s.dir / "density_pde.csv", {"t", "x", "rho"});
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    for (std::size_t g = 0; g < sol.grid.n_nodes(); ++g) {
      w.row({sol.times[i], sol.grid.node(g), sol.rho[i][g]});
    }
  }
  w.close();
}

int cmd_validate(const Options& opt, std::istream& in, std::ostream& out) {
  Session s = open_session(opt, "validate", in);
  if (!opt.quiet) out << "config ok\n" << format_config(s.cfg);
  return 0;
}

int cmd_constants(const Options& opt, std::istream& in, std::ostream& out) {
  Session s = open_session(opt, "constants", in);
  const auto& d = s.manifest.derived;
  char buf[96];
  auto print = [&](const char* name, double v) {
    std::snprintf(buf, sizeof(buf), "%-6s %.12g\n", name, v);
    out << buf;
  };
  print("M_K", d.kernel.max_value);
  print("M1_K", d.kernel.max_grad);
  print("M2_K", d.kernel.max_hess);
  print("L_K", d.kernel.lipschitz);
  print("L1_K", d.kernel.lipschitz_grad);
  print("m", d.denominator.m);
  print("M", d.denominator.M);
  print("M_b", d.drift_bound);
  return 0;
}

int cmd_simulate(const Options& opt, std::istream& in, std::ostream& out) {
  Session s = open_session(opt, "simulate", in);
  begin_outputs(s);
  const SimOutput res = run(particle_config(s.cfg, s.cfg.sim.mode, s.cfg.sim.seed), s.cfg.model,
                            s.cfg.kernel, s.cfg.overrides);
  write_particle_outputs(s, res);
  finish_outputs(s);
  if (!opt.quiet) {
    out << "simulate (" << to_string(res.mode) << ", N = " << res.N << "): final mass "
        << res.mass.back() << '\n';
  }
  return 0;
}

int cmd_solve(const Options& opt, std::istream& in, std::ostream& out) {
  Session s = open_session(opt, "solve", in);
  if (!s.cfg.pde.enabled) throw ValidationError("pde.enabled", "solve needs pde.enabled = true");
  begin_outputs(s);
  const DensitySolution sol = run_pde(s.cfg);
  write_pde_outputs(s, sol);
  finish_outputs(s);
  if (!opt.quiet) {
    out << "solve: final mass " << sol.mass.back() << ", max mass-balance residual "
        << sol.ledger.max_balance_residual << '\n';
  }
  return 0;
}

int cmd_compare(const Options& opt, std::istream& in, std::ostream& out) {
  Session s = open_session(opt, "compare", in);
  if (!s.cfg.pde.enabled) throw ValidationError("pde.enabled", "compare needs pde.enabled = true");
  begin_outputs(s);
  const RunConfig& cfg = s.cfg;

  const DensitySolution sol = run_pde(cfg);
  const SimOutput hard = run(particle_config(cfg, KillMode::hard, derive_seed(cfg.sim.seed, 1)),
                             cfg.model, cfg.kernel, cfg.overrides);
  const SimOutput soft = run(particle_config(cfg, KillMode::soft, derive_seed(cfg.sim.seed, 2)),
                             cfg.model, cfg.kernel, cfg.overrides);
  const ComparisonReport rh = compare_runs(hard, sol, cfg.kernel, cfg.sim.grid);
  const ComparisonReport rs = compare_runs(soft, sol, cfg.kernel, cfg.sim.grid);

  write_pde_outputs(s, sol);
  write_particle_outputs(s, hard);
  write_particle_outputs(s, soft);
  {
    CsvWriter w(s.dir / "report.csv", {"t", "l1_gap", "mass_hard", "mass_soft", "mass_pde", "w1",
                                       "residual_f1", "residual_f2"});
    for (std::size_t i = 0; i < rs.times.size(); ++i) {
      w.row({rs.times[i], rs.l1_density_gap[i], rh.mass_particle[i], rs.mass_particle[i],
             rs.mass_pde[i], rh.w1[i], rs.weak_residuals[0][i], rs.weak_residuals[1][i]});
    }
    w.close();
  }
  finish_outputs(s);

  if (!opt.quiet) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%8s %12s %12s %12s %12s\n", "t", "mass_hard", "mass_soft",
                  "mass_pde", "l1_gap");
    out << buf;
    for (std::size_t i = 0; i < rs.times.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%8.4f %12.6f %12.6f %12.6f %12.6f\n", rs.times[i],
                    rh.mass_particle[i], rs.mass_particle[i], rs.mass_pde[i],
                    rs.l1_density_gap[i]);
      out << buf;
    }
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Killed McKean-Vlasov particle system, PDE solver and cross-validation", "kmv"};
  app.require_subcommand(1, 1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opt.config_path, "configuration file");
    if (config_required) c->required();
    sub->add_option("--seed", opt.seed, "master seed (overrides sim.seed)");
    sub->add_option("--out", opt.out_dir, "output directory (overrides output.dir)");
    sub->add_option("--mode", opt.mode, "survival mechanism")->check(CLI::IsMember({"hard", "soft"}));
    sub->add_flag("--quiet", opt.quiet, "suppress the stdout summary");
  };
  auto* simulate = app.add_subcommand("simulate", "particle run");
  auto* solve = app.add_subcommand("solve", "PDE run");
  auto* compare = app.add_subcommand("compare", "PDE plus hard and soft particle runs, with report");
  auto* validate = app.add_subcommand("validate", "check a configuration (reads stdin without --config)");
  auto* constants = app.add_subcommand("constants", "print derived kernel and model constants");
  add_common(simulate, true);
  add_common(solve, true);
  add_common(compare, true);
  add_common(validate, false);
  add_common(constants, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt, in, out);
    if (solve->parsed()) return cmd_solve(opt, in, out);
    if (compare->parsed()) return cmd_compare(opt, in, out);
    if (validate->parsed()) return cmd_validate(opt, in, out);
    if (constants->parsed()) return cmd_constants(opt, in, out);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "runtime error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace kmv
