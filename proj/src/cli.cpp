#include "vmsns/cli.hpp"

#include "vmsns/diagnostics.hpp"
#include "vmsns/errors.hpp"
#include "vmsns/io.hpp"
#include "vmsns/scenario.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>

namespace vmsns {

namespace {

std::string step_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fields_%05d.vtk", k);
  return buf;
}

bool has_exact_solution(const ScenarioConfig& c) { return c.forcing == "manufactured"; }

ManufacturedSolution manufactured(const ScenarioConfig& c) {
  return ManufacturedSolution(c.dim, c.amplitude, c.pressure_scale, c.nu, c.convection, c.box);
}

struct LevelResult {
  int n = 0;
  double h = 0.0;
  RunResult run;
  ErrorNorms errors;
  AprioriBound bound;
  std::string failure;
  int code = kExitOk;
};

int invariant_violations(const ScenarioConfig& c, const RunResult& r, std::ostream& err) {
  int bad = 0;
  const LedgerCheck check = check_ledger(r.ledger);
  for (const auto& v : check.violations) {
    err << "invariant: " << v << '\n';
    ++bad;
  }
  for (size_t k = 0; k < r.steps.size(); ++k) {
    if (r.steps[k].divergence > 10.0 * c.linear_tol) {
      err << "invariant: step " << k + 1 << ": continuity residual " << r.steps[k].divergence << '\n';
      ++bad;
    }
    if (r.steps[k].orthogonality > 1e-8) {
      err << "invariant: step " << k + 1 << ": subscale orthogonality defect " << r.steps[k].orthogonality << '\n';
      ++bad;
    }
  }
  return bad;
}

int cmd_run(const ScenarioConfig& c, const std::filesystem::path& dir, std::ostream& out, std::ostream& err) {
  const RunSpec spec = make_run_spec(c);
  const RunResult r = run(spec);
  write_ledger(dir / "ledger.csv", r.ledger);
  if (c.wants("vtk")) {
    for (const auto& s : r.snapshots)
      write_fields(dir / step_name(static_cast<int>(std::lround(s.t / c.dt))), *spec.disc, s);
  }
  const double e0 = total_energy(*spec.disc, r.initial);
  const double e1 = total_energy(*spec.disc, r.final_state);
  out << "steps " << r.ledger.size() << "\ninitial energy " << format_double(e0) << "\nfinal energy "
      << format_double(e1) << "\nledger " << (dir / "ledger.csv").string() << '\n';
  return invariant_violations(c, r, err) ? kExitInvariant : kExitOk;
}

int cmd_study(const ScenarioConfig& c, int levels, const std::filesystem::path& dir, std::ostream& out,
              std::ostream& err) {
  if (levels < 1) throw ConfigError("--levels must be at least 1");
  std::vector<LevelResult> results(levels);
  const int workers = std::min(thread_limit(), levels);
  auto work = [&](int l) {
    LevelResult& lr = results[l];
    lr.n = c.n << l;
    try {
      const RunSpec spec = make_run_spec(c, lr.n);
      lr.h = spec.disc->h();
      lr.run = run(spec);
      lr.bound = apriori_bound(*spec.disc, lr.run.initial, lr.run.load, lr.run.ledger, c.dt, c.nu);
      if (has_exact_solution(c)) lr.errors = error_norms(*spec.disc, lr.run.final_state, manufactured(c).exact());
      write_ledger(dir / ("level_" + std::to_string(l)) / "ledger.csv", lr.run.ledger);
      std::ostringstream sink;
      if (invariant_violations(c, lr.run, sink)) {
        lr.code = kExitInvariant;
        lr.failure = sink.str();
      }
    } catch (const NonconvergenceError& e) {
      lr.code = kExitSolver, lr.failure = e.what();
    } catch (const SolverError& e) {
      lr.code = kExitSolver, lr.failure = e.what();
    } catch (const ConfigError& e) {
      lr.code = kExitConfig, lr.failure = e.what();
    } catch (const Error& e) {
      lr.code = kExitConfig, lr.failure = e.what();
    }
  };
  for (int first = 0; first < levels; first += workers) {
    std::vector<std::thread> pool;
    for (int l = first; l < std::min(levels, first + workers); ++l) pool.emplace_back(work, l);
    for (auto& t : pool) t.join();
  }
  int code = kExitOk;
  for (int l = 0; l < levels; ++l)
    if (results[l].code != kExitOk) {
      err << "level " << l << " (n=" << results[l].n << "): " << results[l].failure << '\n';
      code = std::max(code, results[l].code);
    }
  if (code == kExitSolver || code == kExitConfig) return code;

  const bool exact = has_exact_solution(c);
  std::vector<std::vector<std::string>> rows;
  for (int l = 0; l < levels; ++l) {
    const auto& r = results[l];
    auto rate = [&](double now, double before) {
      if (l == 0 || !exact || now <= 0.0 || before <= 0.0) return std::string();
      return format_double(std::log(before / now) / std::log(results[l - 1].h / r.h));
    };
    const auto* prev = l > 0 ? &results[l - 1].errors : nullptr;
    auto cell = [&](double v) { return exact ? format_double(v) : std::string(); };
    rows.push_back({std::to_string(l), std::to_string(r.n), format_double(r.h), format_double(r.bound.ledger_total),
                    format_double(r.bound.data_bound), cell(r.errors.velocity_l2), cell(r.errors.velocity_h1),
                    cell(r.errors.pressure_l2), prev ? rate(r.errors.velocity_l2, prev->velocity_l2) : "",
                    prev ? rate(r.errors.velocity_h1, prev->velocity_h1) : "",
                    prev ? rate(r.errors.pressure_l2, prev->pressure_l2) : ""});
    out << "level " << l << " n=" << r.n << " ledger_total=" << format_double(r.bound.ledger_total)
        << " data_bound=" << format_double(r.bound.data_bound);
    if (exact) out << " velocity_l2=" << format_double(r.errors.velocity_l2);
    out << '\n';
  }
  write_table(dir / "rates.csv",
              {"level", "n", "h", "ledger_total", "data_bound", "velocity_l2", "velocity_h1", "pressure_l2",
               "rate_velocity_l2", "rate_velocity_h1", "rate_pressure_l2"},
              rows);
  out << "rates " << (dir / "rates.csv").string() << '\n';
  return code;
}

int cmd_spectra(const ScenarioConfig& c, int levels, const std::filesystem::path& dir, std::ostream& out) {
  SpectraSuiteOptions opt;
  opt.dim = c.dim;
  opt.n0 = c.n;
  opt.levels = levels;
  opt.box = c.box;
  const EquivalenceReport report = run_spectral_suite(opt);
  write_report(dir / "report.csv", report);
  for (const auto& r : report.rows)
    out << r.lemma << " s=" << format_double(r.s) << " level=" << r.level << " value=" << format_double(r.value)
        << '\n';
  out << "report " << (dir / "report.csv").string() << '\n';
  return kExitOk;
}

int cmd_check(const std::filesystem::path& ledger, std::ostream& out, std::ostream& err) {
  const auto rows = read_ledger(ledger);
  const LedgerCheck check = check_ledger(rows);
  for (const auto& v : check.violations) err << "invariant: " << v << '\n';
  out << "rows " << rows.size() << "\nworst relative imbalance " << format_double(check.worst_relative) << '\n';
  return check.ok() ? kExitOk : kExitInvariant;
}

int cmd_init(const ScenarioConfig& c, const std::filesystem::path& dir, std::ostream& out, std::ostream& err) {
  const RunSpec spec = make_run_spec(c);
  const StarState s = spec.initial ? initialize(*spec.disc, spec.initial) : StarState::zero(*spec.disc);
  write_fields(dir / "init.vtk", *spec.disc, s);
  const double div = divergence_residual(*spec.disc, s);
  const double orth = orthogonality_defect(*spec.disc, s.tilde.values);
  out << "velocity_norm " << format_double(spec.disc->velocity_norm(s.u)) << "\nsubscale_norm "
      << format_double(spec.disc->field_norm(s.tilde.values)) << "\ncontinuity_residual " << format_double(div)
      << "\northogonality " << format_double(orth) << "\nfields " << (dir / "init.vtk").string() << '\n';
  if (div > 10.0 * c.linear_tol || orth > 1e-8) {
    err << "invariant: initial state violates the continuity or orthogonality constraint\n";
    return kExitInvariant;
  }
  return kExitOk;
}

}  // namespace

RunSpec make_run_spec(const ScenarioConfig& c, int n) {
  auto mesh = std::make_shared<const Mesh>(Mesh::structured(c.dim, n > 0 ? n : c.n, c.box));
  RunSpec spec;
  spec.disc = std::make_shared<const Discretization>(mesh, c.degree);
  spec.params = c.stab();
  spec.solve = c.solve();
  spec.snapshot_every = c.snapshot_every;
  if (c.initial == "vortex")
    spec.initial = vortex_velocity(c.dim, c.amplitude, c.box);
  else if (c.initial == "manufactured")
    spec.initial = manufactured(c).velocity_field();
  if (c.forcing == "constant") {
    const double v = c.forcing_value;
    spec.forcing = [v](const Point&) { return Vec3{v, 0.0, 0.0}; };
  } else if (c.forcing == "manufactured") {
    spec.forcing = manufactured(c).forcing_field();
  }
  return spec;
}

int thread_limit() {
  if (const char* env = std::getenv("VMSNS_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variational multiscale Navier-Stokes solver with dynamic orthogonal subscales", "vmsns"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  int levels = 3;
  std::string ledger_path;

  auto* run_cmd = app.add_subcommand("run", "solve a scenario and write its energy ledger");
  auto* study_cmd = app.add_subcommand("study", "solve on a refinement sequence and tabulate errors and rates");
  auto* spectra_cmd = app.add_subcommand("spectra", "run the spectral operator suite");
  auto* check_cmd = app.add_subcommand("check", "re-verify the imbalance column of a ledger file");
  auto* init_cmd = app.add_subcommand("init", "run only the initial projection");
  for (auto* cmd : {run_cmd, study_cmd, spectra_cmd, init_cmd}) {
    cmd->add_option("--config", config_path, "scenario file")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
  }
  for (auto* cmd : {study_cmd, spectra_cmd}) cmd->add_option("--levels", levels, "number of refinement levels");
  check_cmd->add_option("--ledger,ledger", ledger_path, "ledger CSV");
  check_cmd->add_option("--config", config_path, "ignored; accepted for symmetry");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (check_cmd->parsed()) {
      if (ledger_path.empty()) {
        err << "check needs a ledger path\n";
        return kExitUsage;
      }
      return cmd_check(ledger_path, out, err);
    }
    const ScenarioConfig config = parse_config(config_path);
    const std::filesystem::path dir = out_dir.empty() ? config.out_dir : out_dir;
    if (run_cmd->parsed()) return cmd_run(config, dir, out, err);
    if (study_cmd->parsed()) return cmd_study(config, levels, dir, out, err);
    if (spectra_cmd->parsed()) return cmd_spectra(config, levels, dir, out);
    if (init_cmd->parsed()) return cmd_init(config, dir, out, err);
  } catch (const ConfigError& e) {
    for (const auto& m : e.messages()) err << "config: " << m << '\n';
    return kExitConfig;
  } catch (const NonconvergenceError& e) {
    err << "nonconvergence: " << e.what() << '\n';
    return kExitSolver;
  } catch (const SolverError& e) {
    err << "solver: " << e.what() << '\n';
    return kExitSolver;
  } catch (const InvariantError& e) {
    err << "invariant: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitUsage;
}

int cli_dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace vmsns
