#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlslab/grid.hpp"
#include "nlslab/model.hpp"
#include "nlslab/profile_solver.hpp"

namespace nlslab {

inline constexpr const char* scenario_schema = "nlslab-scenario/1";
inline constexpr const char* report_schema = "nlslab-report/1";
inline constexpr const char* sweep_schema = "nlslab-sweep/1";

enum class ForcingKind { zero, gaussian_bump, plateau_bump, custom_csv };

struct ForcingSpec {
  ForcingKind kind = ForcingKind::gaussian_bump;
  double amplitude = 1e-3;
  double sigma = 0.2;    // gaussian-bump width
  double support = 0.5;  // gaussian-bump cutoff radius
  double radius = 0.5;   // plateau-bump radius
  std::string path;      // custom-csv, resolved against the config directory
};

struct AnalysisSpec {
  double x0 = 0.75;  // ball center for rho_max and the forcing-decay margin
  double rho0 = 0.25;
  double rho1 = 1.0;
  double eps = 0.5;  // K(ε) dilation
  double c_cal = 1.0;
  double eps_star = 1.0;
  double support_threshold = 1e-6;
  std::size_t n_radii = 65;
  std::vector<double> identity_fractions{0.25, 0.5, 1.0};  // ρ / R
};

struct EvolutionSpec {
  bool enabled = true;
  double t0 = 1.0;
  double t1 = 4.0;
  int steps = 800;
  std::size_t nodes = 2000;
  int snapshot_every = 0;
};

/// Parsed, validated scenario. `normalized` holds the full key set with
/// defaults filled in; its compact dump is what the content hash covers.
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  RawParams raw;
  ModelParams params = validate_params(RawParams{});
  GridKind grid_kind = GridKind::interval;
  std::size_t nodes = 2000;
  ForcingSpec forcing;
  SolverOptions solver;
  std::size_t random_guesses = 0;  // extra seeded solves compared against the main one
  AnalysisSpec analysis;
  EvolutionSpec evolution;
  std::vector<double> sweep_amplitudes;
  std::filesystem::path base_dir;
  nlohmann::json normalized;
};

/// Throws LabError(config_error) naming offending keys (unknown keys are errors).
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// First 12 hex digits of the SHA-256 of the normalized config.
std::string config_hash(const Scenario& scenario);

/// Physical profile forcing F on the scenario grid.
ComplexField build_forcing(const Scenario& scenario, const GridPtr& grid);
/// Gauge data G = -F exp(-i|x|²/8).
ComplexField gauge_forcing(const ComplexField& F);

enum class Stage { solve, localize, evolve };

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 2 non-convergence, 3 other pipeline error
  std::filesystem::path directory;
  nlohmann::json report;
};

/// Output root: explicit value, else $NLSLAB_OUT, else "runs".
std::filesystem::path output_root(const std::optional<std::filesystem::path>& explicit_root);

/// Runs the pipeline up to `last` and writes report.json, timing.json and CSV
/// artifacts into <root>/<name>-<hash>/. Errors after parsing are embedded in
/// the report.
RunOutcome run_scenario(const Scenario& scenario, const std::filesystem::path& root, Stage last = Stage::evolve);

struct SweepRow {
  double amplitude = 0.0;
  double forcing_l2 = 0.0;  // ‖G‖
  double g_h1 = 0.0;
  double support_radius = 0.0;
  double rho_max = 0.0;
  double h1_ratio = 0.0;  // ‖g‖_{H1} / ((R²+1)‖G‖)
  bool converged = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // in ascending amplitude
  double m0_empirical = 0.0;
  bool support_monotone = true;
  bool rho_max_monotone = true;
  bool h1_ratio_bounded = true;
  std::filesystem::path directory;
};

/// Solves and localizes one scenario per amplitude on up to `jobs` threads.
/// Writes sweep.csv and sweep.json. Throws LabError(config_error) on an empty
/// amplitude list.
SweepResult sweep(const Scenario& scenario, const std::filesystem::path& root, unsigned jobs = 1);

/// Writes profile.dat, energy.dat, balance.dat and deviation.dat into `dir`.
/// Throws LabError(missing_artifacts).
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir);

/// True if every number in the document is finite.
bool all_finite(const nlohmann::json& doc);

}  // namespace nlslab
