#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>

#include "tgrowth/config.hpp"
#include "tgrowth/diagnostics.hpp"
#include "tgrowth/error.hpp"
#include "tgrowth/harness.hpp"
#include "tgrowth/io.hpp"

namespace fs = std::filesystem;

namespace tgrowth {

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;
constexpr int kIo = 3;

constexpr double kOracleTolerance = 1e-3;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.resize(width, ' ');
  return s;
}

std::string snapshot_name(const std::string& field, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04zu.pfld", field.c_str(), index);
  return buf;
}

int do_run(const std::string& path, const std::string& output, std::ostream& out) {
  RunConfig cfg = load_config(path);
  if (!output.empty()) cfg.output_dir = output;
  const Trajectory traj = simulate(cfg);
  const fs::path dir(cfg.output_dir);
  write_text_file((dir / "config").string(), serialize(cfg));
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    write_snapshot(traj.snapshots[s].p, (dir / snapshot_name("p", s)).string());
    write_snapshot(traj.snapshots[s].nbar, (dir / snapshot_name("nbar", s)).string());
  }
  write_snapshot(traj.final().p, (dir / "p_final.pfld").string());
  write_diagnostics(build_record(traj, fs::path(path).stem().string()), (dir / "diagnostics.csv").string());
  out << "steps " << traj.dt_history.size() << ", snapshots " << traj.snapshots.size() << ", output "
      << dir.string() << "\n";
  for (const auto& [name, v] : summary_scalars(traj)) out << pad(name, 18) << format_exact(v) << "\n";
  return kOk;
}

int do_verify(const std::string& path, std::ostream& out) {
  const RunConfig cfg = load_config(path);
  const Trajectory traj = simulate(cfg);
  std::vector<CheckResult> checks = verify_apriori(traj).checks;
  const int n = cfg.phenotypes;
  if (n >= 2) {
    const int ia = std::clamp(static_cast<int>(std::lround(0.25 * n)) - 1, 0, n - 1);
    const int ib = std::clamp(static_cast<int>(std::lround(0.75 * n)) - 1, 0, n - 1);
    const auto rep = phenotype_lipschitz_check(traj, ia, ib);
    checks.push_back({"phenotype_lipschitz", rep.passed, 1.0 - rep.ratio,
                      "d(t) <= C1 d(0) + C2 |a - b|, max ratio " + sci(rep.ratio)});
  }
  bool finite = true;
  for (const auto& s : traj.snapshots) finite = finite && s.p.all_finite() && s.w.all_finite();
  checks.push_back({"finite_state", finite, 0.0, "p and W finite at every snapshot"});

  bool all = true;
  for (const auto& c : checks) {
    all = all && c.passed;
    out << (c.passed ? "PASS " : "FAIL ") << pad(c.name, 20) << " margin " << sci(c.margin) << "  " << c.detail
        << "\n";
  }
  out << (all ? "verify: all checks passed\n" : "verify: FAILED\n");
  return all ? kOk : kCheckFailed;
}

int do_oracle(const std::string& path, std::ostream& out) {
  RunConfig cfg = load_config(path);
  cfg.initial.profile = Profile::uniform;
  const Trajectory traj = simulate(cfg);
  const MultiState init = cfg.initial_state();
  std::vector<double> n0;
  for (const auto& f : init.densities) n0.push_back(f[0]);
  const auto expect = homogeneous_oracle(n0, cfg.law, cfg.params.stiffness, cfg.params.horizon, 1e-5);
  double worst = 0.0;
  const auto& fin = traj.final().state;
  for (std::size_t i = 0; i < expect.size(); ++i) {
    const double got = integral(fin.densities[i]) / std::pow(cfg.box_length, cfg.dim);
    const double rel = std::abs(got - expect[i]) / std::max(std::abs(expect[i]), 1e-300);
    worst = std::max(worst, rel);
    out << "phenotype " << i + 1 << "  simulated " << format_exact(got) << "  oracle " << format_exact(expect[i])
        << "  rel " << sci(rel) << "\n";
  }
  const bool ok = worst <= kOracleTolerance;
  out << (ok ? "PASS" : "FAIL") << " oracle: max relative error " << sci(worst) << " (tolerance "
      << sci(kOracleTolerance) << ")\n";
  return ok ? kOk : kCheckFailed;
}

int do_sweep(const std::string& path, int workers, const std::string& output, std::ostream& out) {
  SweepGrid grid = load_sweep_config(path);
  if (workers > 0) grid.workers = workers;
  if (!output.empty()) grid.output_dir = output;
  const SweepTable table = sweep(grid);
  std::size_t failed = 0;
  for (const auto& e : table.entries) {
    out << e.hash.substr(0, 16) << "  N " << e.phenotypes << "  k " << format_exact(e.stiffness) << "  nu "
        << format_exact(e.viscosity) << "  " << (e.ok ? "ok" : "failed: " + e.error) << "\n";
    if (!e.ok) ++failed;
  }
  out << table.entries.size() << " entries, " << failed << " failed, manifest " << (fs::path(table.dir) / "manifest").string()
      << "\n";
  return failed ? kCheckFailed : kOk;
}

int do_rates(const std::string& dir, const std::string& target, std::ostream& out) {
  const RateReport rep = evaluate_rates(load_sweep(dir), target);
  std::string need = rep.spec.at_least ? ">= " : (rep.spec.threshold == 0.0 ? "< " : "<= ");
  need += fixed(rep.spec.threshold, 2);
  if (rep.spec.min_r_squared > 0.0) need += ", r2 >= " + fixed(rep.spec.min_r_squared, 2);
  out << rep.spec.name << ": slope " << fixed(rep.fit.slope, 3) << "  intercept " << fixed(rep.fit.intercept, 3)
      << "  r2 " << fixed(rep.fit.r_squared, 3) << "  points " << rep.fit.points << "  (need slope " << need << ")  "
      << (rep.passed ? "PASS" : "FAIL") << "\n";
  return rep.passed ? kOk : kCheckFailed;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-phenotype Brinkman tissue-growth simulator", "tgrowth"};
  app.require_subcommand(1);

  std::string config, output, sweep_dir, target;
  int workers = 0;
  auto* run = app.add_subcommand("run", "simulate and write snapshots and diagnostics");
  run->add_option("config", config, "run config")->required();
  run->add_option("-o,--output", output, "output directory (overrides the config)");
  auto* verify = app.add_subcommand("verify", "run and check every a priori bound");
  verify->add_option("config", config, "run config")->required();
  auto* sweep_cmd = app.add_subcommand("sweep", "execute an (N, k, nu) sweep");
  sweep_cmd->add_option("config", config, "sweep config")->required();
  sweep_cmd->add_option("-j,--workers", workers, "worker threads (overrides the config)");
  sweep_cmd->add_option("-o,--output", output, "sweep directory (overrides the config)");
  auto* rates = app.add_subcommand("rates", "fit a convergence rate over a sweep directory");
  rates->add_option("sweep_dir", sweep_dir, "sweep directory")->required();
  rates->add_option("--target", target, "wminusp | pweak | lemma7 | riemann | complementarity")
      ->required()
      ->check(CLI::IsMember({"wminusp", "pweak", "lemma7", "riemann", "complementarity"}));
  auto* oracle = app.add_subcommand("oracle", "compare a homogeneous run against the ODE reference");
  oracle->add_option("config", config, "run config")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (*run) return do_run(config, output, out);
    if (*verify) return do_verify(config, out);
    if (*sweep_cmd) return do_sweep(config, workers, output, out);
    if (*rates) return do_rates(sweep_dir, target, out);
    if (*oracle) return do_oracle(config, out);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "run aborted: " << e.what() << "\n";
    return kCheckFailed;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  }
  err << app.help();
  return kUsage;
}

}  // namespace tgrowth
