#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlslab/grid.hpp"
#include "nlslab/model.hpp"
#include "nlslab/selfsimilar.hpp"

namespace nlslab {

/// Forcing sampled on the evolution grid at time t. An empty function means f ≡ 0.
using ForcingFn = std::function<ComplexField(double t)>;

struct EvolutionOptions {
  double inner_tol = 1e-10;  // relative sup-norm change of the midpoint iterate
  int inner_max_iter = 200;
  double reg_eps = 1e-10;
  int snapshot_every = 0;  // 0: initial and final state only
};

struct StepResult {
  ComplexField next;
  ComplexField midpoint;
  int inner_iterations = 0;
};

/// Implicit-midpoint integrator for i u_t = -Δu + a|u|^{m-1}u + f:
///   (i/dt)(u⁺ − u) = −Δ_h ū + a N_ε(ū) + f(t + dt/2),  ū = (u + u⁺)/2.
/// The implicit equation for ū is solved by lagged-coefficient iteration
/// warm-started from u.
class MidpointStepper {
 public:
  MidpointStepper(GridPtr grid, cplx a, double m, EvolutionOptions options = {});

  /// Throws LabError(inner_non_convergence).
  StepResult step(const ComplexField& u, double dt, const ComplexField* forcing_mid) const;

  const GridPtr& grid_ptr() const { return grid_; }
  const EvolutionOptions& options() const { return options_; }

 private:
  GridPtr grid_;
  cplx a_;
  double m_;
  EvolutionOptions options_;
  LinearOperator neg_lap_;
};

StepResult step(const ComplexField& u, double t, double dt, const ModelParams& params, const ForcingFn& forcing,
                const EvolutionOptions& options = {});

struct StepDiagnostics {
  double t = 0.0;
  double mass = 0.0;    // ‖u‖²
  double energy = 0.0;  // ½‖∇_h u‖² + Re(a)/(m+1) ‖u‖^{m+1}_{m+1}
  // Midpoint terms of the discrete balance ½ d/dt ‖u‖² = Im(a)‖ū‖^{m+1} + Im⟨f, ū⟩ (unregularized).
  double mass_rate_lhs = 0.0;
  double mass_rate_rhs = 0.0;
  double mass_rate_scale = 0.0;
  double support_radius = 0.0;
  double edge_max = 0.0;   // max |u| on the outer tenth of the domain
  double deviation = 0.0;  // relative L2 distance to the reference solution, if any
  int inner_iterations = 0;
};

struct EvolutionRun {
  ModelParams params;
  GridPtr grid;
  double t0 = 0.0;
  double t1 = 0.0;
  int steps = 0;
  std::vector<StepDiagnostics> diagnostics;  // index 0 is the initial state
  std::vector<double> snapshot_times;
  std::vector<ComplexField> snapshots;
  double max_deviation = 0.0;
};

/// Fixed-step run from u0 at t0 to t1. `reference`, when given, is compared
/// against at every step.
EvolutionRun evolve(const ComplexField& u0, const ModelParams& params, const ForcingFn& forcing, double t0, double t1,
                    int steps, const EvolutionOptions& options = {},
                    const std::function<ComplexField(double)>& reference = {});

struct SelfSimilarRunSpec {
  double t0 = 1.0;
  double t1 = 4.0;
  int steps = 800;
  std::size_t nodes = 2000;
  /// Evolution domain radius; 0 selects 2·sqrt(t1)·(support radius of U).
  double domain_radius = 0.0;
  double support_threshold = 1e-6;
};

/// Evolves u(t0) = t0^{p/2} U(·/√t0) under f(t,x) = t^{(p-2)/2} F(x/√t) and
/// records the deviation from t^{p/2} U(·/√t). Requires t0 > 0.
EvolutionRun evolve_selfsimilar(const ComplexField& U, const ModelParams& params, const ComplexField& F,
                                const SelfSimilarRunSpec& spec, const EvolutionOptions& options = {});

/// Per-step relative residual |lhs − rhs| / scale of the discrete mass balance.
std::vector<double> mass_balance(const EvolutionRun& run);
/// Per-state relative energy drift |E(t_j) − E(t_0)| / |E(t_0)| (absolute if E(t_0) = 0).
std::vector<double> energy_balance(const EvolutionRun& run);

struct ExtinctionReport {
  bool extinct = false;
  bool horizon_reached = false;
  double extinction_time = 0.0;  // first time with ‖u‖ <= threshold·‖u0‖
  double threshold = 1e-10;
  bool strictly_decreasing = true;
  std::vector<double> times;
  std::vector<double> l2;  // ‖u(t)‖
  std::vector<double> balance_residuals;
};

struct ExtinctionSpec {
  double t0 = 0.0;
  double horizon = 10.0;
  double threshold = 1e-10;
  double dt_max = 1e-2;
  /// dt = min(dt_max, cfl · ‖u‖_∞^{1-m} / |a|).
  double cfl = 0.05;
  int max_steps = 200000;
};

/// Unforced run with Im(a) < 0 until ‖u‖ <= threshold·‖u0‖ or the horizon.
/// Throws LabError(domain_error) unless Im(a) < 0.
ExtinctionReport extinction_probe(const ComplexField& u0, const ModelParams& params, const ExtinctionSpec& spec = {},
                                  const EvolutionOptions& options = {});

/// Columns: t,mass,energy,mass_residual,support_radius,deviation.
void write_diagnostics_csv(const std::string& path, const EvolutionRun& run);

}  // namespace nlslab
