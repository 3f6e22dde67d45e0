#include "nlslab/scenario.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "nlslab/error.hpp"
#include "nlslab/evolution.hpp"
#include "nlslab/localization.hpp"
#include "nlslab/selfsimilar.hpp"

namespace nlslab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads keys from one JSON object and remembers which ones were consumed.
class Section {
 public:
  Section(const json& node, std::string path, std::vector<std::string>& unknown)
      : node_(node), path_(std::move(path)), unknown_(unknown) {
    if (!node_.is_object()) throw LabError(ErrorKind::config_error, qualified("") + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <class T>
  T require(const std::string& key, std::vector<std::string>& missing) {
    if (!has(key)) {
      missing.push_back(qualified(key));
      return T{};
    }
    return convert<T>(key);
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(node_.contains(key) ? node_.at(key) : empty, qualified(key), unknown_);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  std::string qualified(const std::string& key) const {
    if (path_.empty()) return key;
    return key.empty() ? path_ : path_ + "." + key;
  }

  ~Section() {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) unknown_.push_back(qualified(key));
    }
  }

 private:
  template <class T>
  T convert(const std::string& key) {
    try {
      return node_.at(key).get<T>();
    } catch (const json::exception&) {
      throw LabError(ErrorKind::config_error, "key " + qualified(key) + " has the wrong type");
    }
  }

  const json& node_;
  std::string path_;
  std::vector<std::string>& unknown_;
  std::set<std::string> seen_;
};

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

cplx parse_complex(const json& v, const std::string& key) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw LabError(ErrorKind::config_error, "key " + key + " must be a number or [re, im]");
}

std::string forcing_name(ForcingKind k) {
  switch (k) {
    case ForcingKind::zero: return "zero";
    case ForcingKind::gaussian_bump: return "gaussian-bump";
    case ForcingKind::plateau_bump: return "plateau-bump";
    case ForcingKind::custom_csv: return "custom-csv";
  }
  return "zero";
}

ForcingKind forcing_from_name(const std::string& s) {
  for (auto k : {ForcingKind::zero, ForcingKind::gaussian_bump, ForcingKind::plateau_bump, ForcingKind::custom_csv}) {
    if (forcing_name(k) == s) return k;
  }
  throw LabError(ErrorKind::config_error, "forcing.profile: unknown profile '" + s + "'");
}

void config_check(bool ok, const std::string& msg) {
  if (!ok) throw LabError(ErrorKind::config_error, msg);
}

json field_stats(const ComplexField& f) { return {{"l2", l2_norm(f)}, {"max_abs", f.max_abs()}}; }

void write_json(const fs::path& path, const json& doc) {
  std::ofstream os(path);
  if (!os) throw LabError(ErrorKind::config_error, "cannot write " + path.string());
  os << doc.dump(2) << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

struct PipelineState {
  GridPtr grid;
  ComplexField F;
  ComplexField G;
  ProfileProblem problem;
  ProfileSolution solution;
  ComplexField U;
};

PipelineState solve_stage(const Scenario& sc) {
  const GridPtr grid = Grid::build(sc.grid_kind, sc.raw.dim, sc.raw.radius, sc.nodes);
  ComplexField F = build_forcing(sc, grid);
  ComplexField G = gauge_forcing(F);
  ProfileProblem problem = make_problem(sc.params, G, sc.solver);
  ProfileSolution sol = solve_profile(problem);
  ComplexField U = gauge_backward(sol.g, problem.coeffs.gauge);
  return {grid, std::move(F), std::move(G), std::move(problem), std::move(sol), std::move(U)};
}

LocalizationReport localize_stage(const Scenario& sc, const PipelineState& st, EnergyProfile* centered) {
  const auto& an = sc.analysis;
  const auto& co = st.problem.coeffs;
  const double m = sc.params.m();
  const double R = st.grid->radius();
  const ExponentSet exps = exponent_set(sc.params);

  LocalizationReport rep;
  rep.constants = lemma_constants(sc.params.a(), co.b, co.c, R);

  EnergyProfile prof0 = energy_profile(st.solution.g, st.G, m, 0.0, an.n_radii);
  const InequalityCheck ineq = check_energy_inequality(prof0, rep.constants.L, rep.constants.M);
  rep.inequality_min_margin = ineq.min_margin;
  rep.inequality_tol = ineq.tol_disc;
  rep.inequality_holds = ineq.holds;

  std::vector<double> radii;
  for (double f : an.identity_fractions) radii.push_back(f * R);
  rep.identity_residuals = check_identities(st.solution.g, st.G, sc.params.a(), co.b, co.c, m, radii, 0.0);

  rep.rho0 = an.rho0;
  const double at0[] = {an.rho0};
  const EnergyProfile ball = energy_profile_at(st.solution.g, st.G, m, an.x0, at0);
  const RhoMaxResult rm = rho_max(ball.energy[0], ball.bmass[0], an.rho0, rep.constants.L, rep.constants.M,
                                  an.c_cal, exps);
  rep.rho_max = rm.rho_max;
  rep.tau_star = rm.tau_star;

  std::vector<double> decay_radii;
  for (std::size_t j = 0; j < an.n_radii; ++j) {
    decay_radii.push_back(an.rho1 * static_cast<double>(j) / static_cast<double>(an.n_radii - 1));
  }
  const EnergyProfile decay = energy_profile_at(st.solution.g, st.G, m, an.x0, decay_radii);
  const ForcingDecayMargin tg = thm_g_margin(decay, an.rho0, an.rho1, an.eps_star, exps);
  rep.thm_g_margin = tg.margin;
  rep.thm_g_vanishes_inside = tg.vanishes_inside;

  rep.support_radius = support_radius(st.U, an.support_threshold);
  const ContainmentResult kc = k_eps_containment(st.U, st.F, an.eps, an.support_threshold);
  rep.k_eps_contained = kc.contained;
  rep.k_eps_worst_excess = kc.worst_excess;
  if (centered) *centered = std::move(prof0);
  return rep;
}

json solver_json(const PipelineState& st) {
  const auto& sol = st.solution;
  return {{"converged", sol.converged},
          {"iterations", sol.iterations},
          {"residual", sol.residual_norm},
          {"tol", st.problem.options.tol},
          {"g", field_stats(sol.g)},
          {"g_h1", h1_norm(sol.g)},
          {"forcing_G", field_stats(st.G)},
          {"profile_equation_residual", profile_equation_residual(st.U, st.F, st.problem.params)}};
}

}  // namespace

Scenario parse_scenario(const json& doc, const fs::path& base_dir) {
  Scenario sc;
  sc.base_dir = base_dir;
  std::vector<std::string> unknown;
  std::vector<std::string> missing;
  {
    Section top(doc, "", unknown);
    const std::string schema = top.get<std::string>("schema", scenario_schema);
    config_check(schema == scenario_schema, "schema: unsupported tag '" + schema + "'");
    sc.name = top.require<std::string>("name", missing);
    sc.seed = top.get<std::uint64_t>("seed", 0);

    {
      Section s = top.sub("model");
      sc.raw.m = s.require<double>("m", missing);
      if (s.has("a")) sc.raw.a = parse_complex(s.raw("a"), s.qualified("a"));
      sc.raw.p_imag = s.get<double>("p_imag", 0.0);
      sc.raw.dim = s.get<int>("dim", 1);
    }
    {
      Section s = top.sub("grid");
      const std::string kind = s.get<std::string>("kind", sc.raw.dim == 1 ? "interval" : "radial");
      config_check(kind == "interval" || kind == "radial", "grid.kind: unknown grid kind '" + kind + "'");
      sc.grid_kind = grid_kind_from_string(kind);
      sc.raw.radius = s.require<double>("radius", missing);
      sc.nodes = s.get<std::size_t>("nodes", 2000);
    }
    {
      Section s = top.sub("forcing");
      auto& f = sc.forcing;
      f.kind = forcing_from_name(s.require<std::string>("profile", missing));
      f.amplitude = s.get<double>("amplitude", f.amplitude);
      f.sigma = s.get<double>("sigma", f.sigma);
      f.support = s.get<double>("support", f.support);
      f.radius = s.get<double>("radius", f.radius);
      f.path = s.get<std::string>("path", "");
    }
    {
      Section s = top.sub("solver");
      auto& o = sc.solver;
      o.theta = s.get<double>("theta", o.theta);
      o.tol = s.get<double>("tol", 1e-12);
      o.max_iter = s.get<int>("max_iter", o.max_iter);
      o.continuation_steps = s.get<int>("continuation_steps", o.continuation_steps);
      o.reg_schedule = s.get<std::vector<double>>("reg_schedule", o.reg_schedule);
      o.stage_tol = s.get<double>("stage_tol", o.stage_tol);
      sc.random_guesses = s.get<std::size_t>("random_guesses", 0);
    }
    {
      Section s = top.sub("analysis");
      auto& a = sc.analysis;
      a.x0 = s.get<double>("x0", sc.grid_kind == GridKind::interval ? a.x0 : 0.0);
      a.rho0 = s.get<double>("rho0", a.rho0);
      a.rho1 = s.get<double>("rho1", a.rho1);
      a.eps = s.get<double>("eps", a.eps);
      a.c_cal = s.get<double>("c_cal", a.c_cal);
      a.eps_star = s.get<double>("eps_star", a.eps_star);
      a.support_threshold = s.get<double>("support_threshold", a.support_threshold);
      a.n_radii = s.get<std::size_t>("n_radii", a.n_radii);
      a.identity_fractions = s.get<std::vector<double>>("identity_fractions", a.identity_fractions);
    }
    {
      Section s = top.sub("evolution");
      auto& e = sc.evolution;
      e.enabled = s.get<bool>("enabled", e.enabled);
      e.t0 = s.get<double>("t0", e.t0);
      e.t1 = s.get<double>("t1", e.t1);
      e.steps = s.get<int>("steps", e.steps);
      e.nodes = s.get<std::size_t>("nodes", e.nodes);
      e.snapshot_every = s.get<int>("snapshot_every", e.snapshot_every);
    }
    {
      Section s = top.sub("sweep");
      sc.sweep_amplitudes = s.get<std::vector<double>>("amplitudes", {});
    }
  }
  if (!unknown.empty()) throw LabError(ErrorKind::config_error, "unknown keys: " + join(unknown));
  if (!missing.empty()) throw LabError(ErrorKind::config_error, "missing keys: " + join(missing));

  config_check(!sc.name.empty(), "name: must be non-empty");
  try {
    sc.params = validate_params(sc.raw);
  } catch (const LabError& e) {
    std::string key = "model";
    if (e.kind() == ErrorKind::invalid_exponent) key = "model.m";
    if (e.kind() == ErrorKind::inadmissible_coefficient) key = "model.a";
    if (e.kind() == ErrorKind::invalid_domain) key = "grid.radius/model.dim";
    throw LabError(ErrorKind::config_error, key + ": " + e.what());
  }
  config_check(sc.grid_kind == GridKind::radial || sc.raw.dim == 1, "grid.kind: interval grids require model.dim = 1");
  config_check(sc.nodes >= Grid::min_nodes, "grid.nodes: at least 16 nodes required");

  const double R = sc.raw.radius;
  const auto& f = sc.forcing;
  switch (f.kind) {
    case ForcingKind::zero: break;
    case ForcingKind::gaussian_bump:
      config_check(f.sigma > 0.0, "forcing.sigma: must be positive");
      config_check(f.support > 0.0 && f.support < R, "forcing.support: must lie strictly inside the grid domain");
      break;
    case ForcingKind::plateau_bump:
      config_check(f.radius > 0.0 && f.radius < R, "forcing.radius: must lie strictly inside the grid domain");
      break;
    case ForcingKind::custom_csv: {
      config_check(!f.path.empty(), "forcing.path: required for custom-csv");
      const fs::path p = fs::path(f.path).is_absolute() ? fs::path(f.path) : base_dir / f.path;
      config_check(fs::exists(p), "forcing.path: file not found: " + p.string());
      sc.forcing.path = p.string();
      break;
    }
  }
  config_check(std::isfinite(f.amplitude), "forcing.amplitude: must be finite");

  const auto& o = sc.solver;
  config_check(o.theta > 0.0 && o.theta <= 1.0, "solver.theta: must lie in (0, 1]");
  config_check(o.tol > 0.0, "solver.tol: must be positive");
  config_check(o.max_iter > 0, "solver.max_iter: must be positive");
  config_check(o.continuation_steps >= 1, "solver.continuation_steps: must be >= 1");

  const auto& a = sc.analysis;
  config_check(a.rho0 > 0.0 && a.rho0 < a.rho1, "analysis.rho0/rho1: need 0 < rho0 < rho1");
  config_check(a.eps >= 0.0, "analysis.eps: must be non-negative");
  config_check(a.c_cal > 0.0 && a.eps_star > 0.0, "analysis.c_cal/eps_star: must be positive");
  config_check(a.support_threshold > 0.0 && a.support_threshold < 1.0, "analysis.support_threshold: must lie in (0, 1)");
  config_check(a.n_radii >= 2, "analysis.n_radii: at least 2");
  config_check(sc.grid_kind == GridKind::interval || a.x0 == 0.0, "analysis.x0: radial grids support only x0 = 0");
  for (double fr : a.identity_fractions) config_check(fr > 0.0 && fr <= 1.0, "analysis.identity_fractions: need (0, 1]");

  const auto& e = sc.evolution;
  config_check(e.t0 >= 0.25 && e.t1 > e.t0, "evolution.t0/t1: need 0.25 <= t0 < t1");
  config_check(e.steps >= 1, "evolution.steps: must be positive");
  config_check(e.nodes >= Grid::min_nodes, "evolution.nodes: at least 16 nodes required");
  for (double amp : sc.sweep_amplitudes) config_check(std::isfinite(amp), "sweep.amplitudes: must be finite");

  sc.normalized = {
      {"schema", scenario_schema},
      {"name", sc.name},
      {"seed", sc.seed},
      {"model", {{"m", sc.raw.m}, {"a", {sc.raw.a.real(), sc.raw.a.imag()}}, {"p_imag", sc.raw.p_imag}, {"dim", sc.raw.dim}}},
      {"grid", {{"kind", to_string(sc.grid_kind)}, {"radius", R}, {"nodes", sc.nodes}}},
      {"forcing",
       {{"profile", forcing_name(f.kind)},
        {"amplitude", f.amplitude},
        {"sigma", f.sigma},
        {"support", f.support},
        {"radius", f.radius},
        {"path", f.path}}},
      {"solver",
       {{"theta", o.theta},
        {"tol", o.tol},
        {"max_iter", o.max_iter},
        {"continuation_steps", o.continuation_steps},
        {"reg_schedule", o.reg_schedule},
        {"stage_tol", o.stage_tol},
        {"random_guesses", sc.random_guesses}}},
      {"analysis",
       {{"x0", a.x0},
        {"rho0", a.rho0},
        {"rho1", a.rho1},
        {"eps", a.eps},
        {"c_cal", a.c_cal},
        {"eps_star", a.eps_star},
        {"support_threshold", a.support_threshold},
        {"n_radii", a.n_radii},
        {"identity_fractions", a.identity_fractions}}},
      {"evolution",
       {{"enabled", e.enabled},
        {"t0", e.t0},
        {"t1", e.t1},
        {"steps", e.steps},
        {"nodes", e.nodes},
        {"snapshot_every", e.snapshot_every}}},
      {"sweep", {{"amplitudes", sc.sweep_amplitudes}}},
  };
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw LabError(ErrorKind::config_error, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw LabError(ErrorKind::config_error, std::string("parse error: ") + e.what());
  }
  return parse_scenario(doc, path.parent_path());
}

std::string config_hash(const Scenario& scenario) {
  const std::string text = scenario.normalized.dump();
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), digest);
  std::ostringstream os;
  for (int i = 0; i < 6; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

ComplexField build_forcing(const Scenario& scenario, const GridPtr& grid) {
  const auto& f = scenario.forcing;
  ComplexField F(grid);
  switch (f.kind) {
    case ForcingKind::zero: break;
    case ForcingKind::gaussian_bump:
      for (std::size_t i = 0; i < F.size(); ++i) {
        const double r = grid->abs_coord(i);
        const double cut = std::max(0.0, 1.0 - r * r / (f.support * f.support));
        F[i] = f.amplitude * std::exp(-r * r / (2.0 * f.sigma * f.sigma)) * cut * cut;
      }
      break;
    case ForcingKind::plateau_bump:
      for (std::size_t i = 0; i < F.size(); ++i) {
        const double s = grid->abs_coord(i) / f.radius;
        const double cut = std::max(0.0, 1.0 - s * s * s * s);
        F[i] = f.amplitude * cut * cut;
      }
      break;
    case ForcingKind::custom_csv: {
      const auto samples = read_field_csv(f.path);
      const double R = grid->radius();
      for (const auto& s : samples) {
        if (std::abs(s.value) > 0.0 && std::abs(s.x) >= R) {
          throw LabError(ErrorKind::config_error, "forcing.path: support reaches the domain boundary");
        }
      }
      F = field_from_samples(grid, samples);
      F *= f.amplitude;
      break;
    }
  }
  return F;
}

ComplexField gauge_forcing(const ComplexField& F) {
  ComplexField G = gauge_forward(F);
  G *= -1.0;
  return G;
}

fs::path output_root(const std::optional<fs::path>& explicit_root) {
  if (explicit_root) return *explicit_root;
  if (const char* env = std::getenv("NLSLAB_OUT"); env && *env) return env;
  return "runs";
}

RunOutcome run_scenario(const Scenario& sc, const fs::path& root, Stage last) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  out.directory = root / (sc.name + "-" + config_hash(sc));
  fs::create_directories(out.directory);
  const fs::path& dir = out.directory;

  json& rep = out.report;
  rep["schema"] = report_schema;
  rep["scenario"] = sc.normalized;
  rep["config_hash"] = config_hash(sc);
  const char* stage_names[] = {"solve", "localize", "evolve"};
  rep["last_stage"] = stage_names[static_cast<int>(last)];
  rep["status"] = "ok";
  json timing = json::object();

  try {
    auto t = std::chrono::steady_clock::now();
    PipelineState st = solve_stage(sc);
    timing["solve"] = seconds_since(t);
    write_field_csv((dir / "profile_g.csv").string(), st.solution.g);
    write_field_csv((dir / "profile_U.csv").string(), st.U);
    write_field_csv((dir / "forcing_F.csv").string(), st.F);
    rep["solver"] = solver_json(st);

    if (sc.random_guesses > 0) {
      const double scale = std::max(st.solution.g.max_abs(), 1e-12);
      const auto guesses = random_guesses(st.grid, sc.random_guesses, scale, sc.seed);
      const UniquenessReport ur = uniqueness_probe(st.problem, guesses);
      double dist = ur.max_pairwise_distance;
      for (const auto& s : ur.solutions) dist = std::max(dist, l2_norm(s.g - st.solution.g));
      rep["solver"]["uniqueness"] = {{"guesses", sc.random_guesses},
                                     {"max_pairwise_distance", dist},
                                     {"in_uniqueness_regime", ur.in_uniqueness_regime}};
    }

    if (!st.solution.converged) {
      rep["status"] = "non_convergence";
      rep["error"] = {{"kind", std::string(to_string(ErrorKind::non_convergence))},
                      {"message", "profile solver stopped at residual above tolerance"}};
      out.exit_code = 2;
    } else {
      if (last >= Stage::localize) {
        t = std::chrono::steady_clock::now();
        EnergyProfile prof;
        const LocalizationReport lr = localize_stage(sc, st, &prof);
        timing["localize"] = seconds_since(t);
        write_profile_csv((dir / "energy_profile.csv").string(), prof);
        rep["localization"] = to_json(lr);
      }
      if (last >= Stage::evolve && sc.evolution.enabled) {
        t = std::chrono::steady_clock::now();
        const auto& e = sc.evolution;
        SelfSimilarRunSpec spec;
        spec.t0 = e.t0;
        spec.t1 = e.t1;
        spec.steps = e.steps;
        spec.nodes = e.nodes;
        spec.support_threshold = sc.analysis.support_threshold;
        EvolutionOptions eo;
        eo.snapshot_every = e.snapshot_every;
        const EvolutionRun run = evolve_selfsimilar(st.U, sc.params, st.F, spec, eo);
        timing["evolve"] = seconds_since(t);
        write_diagnostics_csv((dir / "evolution.csv").string(), run);
        for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
          char name[32];
          std::snprintf(name, sizeof name, "snapshot_%03zu.csv", k);
          write_field_csv((dir / name).string(), run.snapshots[k]);
        }
        const auto mb = mass_balance(run);
        double mb_max = 0.0;
        double edge = 0.0;
        int inner = 0;
        for (double v : mb) mb_max = std::max(mb_max, v);
        for (const auto& d : run.diagnostics) {
          edge = std::max(edge, d.edge_max);
          inner = std::max(inner, d.inner_iterations);
        }
        const double supp0 = run.diagnostics.front().support_radius;
        double excess = -std::numeric_limits<double>::infinity();
        for (const auto& d : run.diagnostics) excess = std::max(excess, d.support_radius - std::sqrt(d.t / e.t0) * supp0);
        const bool tracks = excess <= 2.0 * run.grid->spacing();
        rep["evolution"] = {{"t0", e.t0},
                            {"t1", e.t1},
                            {"steps", e.steps},
                            {"domain_radius", run.grid->radius()},
                            {"nodes", run.grid->size()},
                            {"max_deviation", run.max_deviation},
                            {"final_deviation", run.diagnostics.back().deviation},
                            {"max_mass_residual", mb_max},
                            {"max_edge_abs", edge},
                            {"max_inner_iterations", inner},
                            {"initial_support_radius", supp0},
                            {"final_support_radius", run.diagnostics.back().support_radius},
                            {"max_support_excess", excess},
                            {"support_tracks_sqrt_t", tracks}};
      }
    }
  } catch (const LabError& err) {
    rep["status"] = err.kind() == ErrorKind::non_convergence ? "non_convergence" : "error";
    rep["error"] = {{"kind", std::string(to_string(err.kind()))}, {"message", err.what()}};
    out.exit_code = err.kind() == ErrorKind::non_convergence ? 2 : 3;
  }

  if (!all_finite(rep)) {
    rep["status"] = "error";
    rep["error"] = {{"kind", "NonFinite"}, {"message", "report contains non-finite values"}};
    out.exit_code = 3;
  }
  write_json(dir / "report.json", rep);
  timing["total"] = seconds_since(start);
  write_json(dir / "timing.json", {{"wall_clock_seconds", timing}});
  return out;
}

SweepResult sweep(const Scenario& scenario, const fs::path& root, unsigned jobs) {
  if (scenario.sweep_amplitudes.empty()) throw LabError(ErrorKind::config_error, "sweep.amplitudes: empty list");
  std::vector<double> amps = scenario.sweep_amplitudes;
  std::sort(amps.begin(), amps.end());

  SweepResult res;
  res.rows.resize(amps.size());
  std::atomic<std::size_t> next{0};
  const double R = scenario.raw.radius;

  auto worker = [&] {
    for (std::size_t k = next++; k < amps.size(); k = next++) {
      Scenario sc = scenario;
      sc.forcing.amplitude = amps[k];
      SweepRow& row = res.rows[k];
      row.amplitude = amps[k];
      try {
        const PipelineState st = solve_stage(sc);
        row.forcing_l2 = l2_norm(st.G);
        row.g_h1 = h1_norm(st.solution.g);
        row.converged = st.solution.converged;
        row.h1_ratio = row.forcing_l2 > 0.0 ? row.g_h1 / ((R * R + 1.0) * row.forcing_l2) : 0.0;
        const LocalizationReport lr = localize_stage(sc, st, nullptr);
        row.support_radius = lr.support_radius;
        row.rho_max = lr.rho_max;
      } catch (const LabError& e) {
        row.error = e.what();
        row.converged = false;
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(amps.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const double h = (scenario.grid_kind == GridKind::interval ? 2.0 * R : R) / static_cast<double>(scenario.nodes - 1);
  for (const auto& row : res.rows) res.m0_empirical = std::max(res.m0_empirical, row.h1_ratio);
  for (std::size_t k = 1; k < res.rows.size(); ++k) {
    const auto& lo = res.rows[k - 1];
    const auto& hi = res.rows[k];
    if (hi.support_radius < lo.support_radius - h) res.support_monotone = false;
    if (hi.rho_max > lo.rho_max) res.rho_max_monotone = false;
  }
  for (const auto& row : res.rows) {
    if (row.h1_ratio > res.m0_empirical) res.h1_ratio_bounded = false;
  }

  res.directory = root / (scenario.name + "-" + config_hash(scenario) + "-sweep");
  fs::create_directories(res.directory);
  {
    std::ofstream os(res.directory / "sweep.csv");
    os << "amplitude,G_l2,g_h1,support_radius,rho_max,h1_ratio,converged\n" << std::setprecision(17);
    for (const auto& r : res.rows) {
      os << r.amplitude << ',' << r.forcing_l2 << ',' << r.g_h1 << ',' << r.support_radius << ',' << r.rho_max << ','
         << r.h1_ratio << ',' << (r.converged ? 1 : 0) << '\n';
    }
  }
  json rows = json::array();
  for (const auto& r : res.rows) {
    json j = {{"amplitude", r.amplitude}, {"G_l2", r.forcing_l2},     {"g_h1", r.g_h1},
              {"support_radius", r.support_radius}, {"rho_max", r.rho_max}, {"h1_ratio", r.h1_ratio},
              {"converged", r.converged}};
    if (!r.error.empty()) j["error"] = r.error;
    rows.push_back(j);
  }
  write_json(res.directory / "sweep.json", {{"schema", sweep_schema},
                                            {"scenario", scenario.normalized},
                                            {"rows", rows},
                                            {"m0_empirical", res.m0_empirical},
                                            {"assertions",
                                             {{"support_monotone", res.support_monotone},
                                              {"rho_max_monotone", res.rho_max_monotone},
                                              {"h1_ratio_bounded", res.h1_ratio_bounded}}}});
  return res;
}

namespace {

std::vector<std::vector<double>> read_csv_table(const fs::path& path, std::vector<std::string>& header) {
  std::ifstream is(path);
  if (!is) throw LabError(ErrorKind::missing_artifacts, "missing " + path.string());
  std::string line;
  std::getline(is, line);
  header.clear();
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name, const fs::path& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw LabError(ErrorKind::missing_artifacts, path.string() + " lacks column " + name);
  return static_cast<std::size_t>(it - header.begin());
}

fs::path write_dat(const fs::path& path, const std::string& title, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw LabError(ErrorKind::missing_artifacts, "cannot write " + path.string());
  os << "# " << title << '\n';
  for (std::size_t c = 0; c < names.size(); ++c) os << "# column " << c + 1 << ": " << names[c] << '\n';
  os << std::setprecision(17);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? " " : "") << r[c];
    os << '\n';
  }
  return path;
}

}  // namespace

std::vector<fs::path> emit_plots(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw LabError(ErrorKind::missing_artifacts, "no report directory " + dir.string());
  if (!fs::exists(dir / "report.json")) throw LabError(ErrorKind::missing_artifacts, "missing report.json");
  std::vector<fs::path> out;
  std::vector<std::string> hdr;

  {
    const fs::path src = dir / "profile_U.csv";
    const auto t = read_csv_table(src, hdr);
    const auto x = column(hdr, "x", src), re = column(hdr, "re", src), im = column(hdr, "im", src);
    std::vector<std::vector<double>> rows;
    for (const auto& r : t) rows.push_back({r[x], std::hypot(r[re], r[im])});
    out.push_back(write_dat(dir / "profile.dat", "profile modulus", {"x", "|U|"}, rows));
  }
  {
    const fs::path src = dir / "energy_profile.csv";
    const auto t = read_csv_table(src, hdr);
    const std::vector<std::string> names{"rho", "E", "bmass", "l2mass", "wmass", "I", "Jterm", "Gball"};
    std::vector<std::size_t> cols;
    for (const auto& n : names) cols.push_back(column(hdr, n, src));
    std::vector<std::vector<double>> rows;
    for (const auto& r : t) {
      std::vector<double> row;
      for (auto c : cols) row.push_back(r[c]);
      rows.push_back(std::move(row));
    }
    out.push_back(write_dat(dir / "energy.dat", "ball functionals about the origin", names, rows));
  }
  {
    const fs::path src = dir / "evolution.csv";
    const auto t = read_csv_table(src, hdr);
    const auto tc = column(hdr, "t", src), mc = column(hdr, "mass", src), ec = column(hdr, "energy", src),
               rc = column(hdr, "mass_residual", src), dc = column(hdr, "deviation", src);
    std::vector<std::vector<double>> bal, dev;
    for (const auto& r : t) {
      bal.push_back({r[tc], r[mc], r[ec], r[rc]});
      dev.push_back({r[tc], r[dc]});
    }
    out.push_back(write_dat(dir / "balance.dat", "mass and energy along the run", {"t", "mass", "energy", "mass_residual"},
                            bal));
    out.push_back(write_dat(dir / "deviation.dat", "relative L2 deviation from the self-similar solution",
                            {"t", "deviation"}, dev));
  }
  return out;
}

bool all_finite(const json& doc) {
  if (doc.is_number_float()) return std::isfinite(doc.get<double>());
  if (doc.is_structured()) {
    for (const auto& v : doc) {
      if (!all_finite(v)) return false;
    }
  }
  return true;
}

}  // namespace nlslab
