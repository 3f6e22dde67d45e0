// nlslab: command-line front end for scenario runs.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "nlslab/error.hpp"
#include "nlslab/scenario.hpp"

namespace fs = std::filesystem;
using namespace nlslab;

namespace {

struct Flags {
  std::string config;
  std::string out;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  std::string dir;
};

Scenario load(const Flags& f) {
  Scenario sc = load_scenario(f.config);
  if (f.seed) {
    sc.seed = *f.seed;
    sc.normalized["seed"] = *f.seed;
  }
  return sc;
}

std::optional<fs::path> out_flag(const Flags& f) {
  if (f.out.empty()) return std::nullopt;
  return fs::path(f.out);
}

int run_stage(const Flags& f, Stage stage) {
  const Scenario sc = load(f);
  const RunOutcome res = run_scenario(sc, output_root(out_flag(f)), stage);
  std::cout << res.directory.string() << '\n' << "status: " << res.report.at("status").get<std::string>() << '\n';
  if (res.report.contains("error")) std::cerr << res.report["error"]["message"].get<std::string>() << '\n';
  return res.exit_code;
}

int run_sweep(const Flags& f) {
  const Scenario sc = load(f);
  const SweepResult res = sweep(sc, output_root(out_flag(f)), f.jobs);
  std::cout << res.directory.string() << '\n';
  bool all_converged = true;
  for (const auto& row : res.rows) {
    std::cout << "amplitude " << row.amplitude << ": support " << row.support_radius << ", rho_max " << row.rho_max
              << (row.converged ? "" : " (not converged)") << '\n';
    all_converged = all_converged && row.converged;
  }
  std::cout << "support monotone: " << res.support_monotone << ", rho_max monotone: " << res.rho_max_monotone
            << ", H1 ratio bounded: " << res.h1_ratio_bounded << '\n';
  return all_converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for forced sublinear Schrodinger profiles"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub, bool with_jobs) {
    sub->add_option("--config", f.config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "Output root (default: $NLSLAB_OUT or ./runs)");
    sub->add_option("--seed", f.seed, "Override the scenario seed");
    if (with_jobs) sub->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* solve = app.add_subcommand("solve", "Solve the stationary profile problem");
  auto* localize = app.add_subcommand("localize", "Solve and run the localization analysis");
  auto* evolve = app.add_subcommand("evolve", "Full pipeline including the self-similar evolution");
  auto* sw = app.add_subcommand("sweep", "Solve and localize for each amplitude in sweep.amplitudes");
  auto* plots = app.add_subcommand("emit-plots", "Write gnuplot data files for a report directory");
  auto* validate = app.add_subcommand("validate-config", "Parse and validate a scenario");
  add_common(solve, false);
  add_common(localize, false);
  add_common(evolve, false);
  add_common(sw, true);
  plots->add_option("dir", f.dir, "Report directory")->required();
  validate->add_option("--config", f.config, "Scenario JSON file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return run_stage(f, Stage::solve);
    if (*localize) return run_stage(f, Stage::localize);
    if (*evolve) return run_stage(f, Stage::evolve);
    if (*sw) return run_sweep(f);
    if (*plots) {
      for (const auto& p : emit_plots(f.dir)) std::cout << p.string() << '\n';
      return 0;
    }
    if (*validate) {
      const Scenario sc = load(f);
      std::cout << sc.name << '-' << config_hash(sc) << ": ok\n";
      return 0;
    }
  } catch (const LabError& e) {
    std::cerr << e.what() << '\n';
    return e.kind() == ErrorKind::config_error ? 1 : (e.kind() == ErrorKind::non_convergence ? 2 : 3);
  }
  return 0;
}
