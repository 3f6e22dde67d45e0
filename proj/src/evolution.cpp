#include "nlslab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "nlslab/error.hpp"
#include "nlslab/localization.hpp"
#include "nlslab/profile_solver.hpp"

namespace nlslab {

namespace {

double coefficient_weight(cplx z, double m, double eps) {
  const double s = std::norm(z) + eps * eps;
  if (s == 0.0) return 1e150;
  return std::pow(s, 0.5 * (m - 1.0));
}

double sublinear_mass(const ComplexField& u, double m) {
  const auto& grid = u.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += grid.weight(i) * std::pow(std::abs(u[i]), m + 1.0);
  return sum;
}

double discrete_energy(const ComplexField& u, const LinearOperator& neg_lap, cplx a, double m) {
  const double grad = inner(neg_lap.apply(u), u).real();
  return 0.5 * grad + a.real() / (m + 1.0) * sublinear_mass(u, m);
}

double edge_max(const ComplexField& u) {
  const auto& grid = u.grid();
  double out = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (grid.abs_coord(i) >= 0.9 * grid.radius()) out = std::max(out, std::abs(u[i]));
  }
  return out;
}

ComplexField zero_like(const GridPtr& grid) { return ComplexField(grid); }

}  // namespace

MidpointStepper::MidpointStepper(GridPtr grid, cplx a, double m, EvolutionOptions options)
    : grid_(std::move(grid)), a_(a), m_(m), options_(options), neg_lap_(assemble_operator(grid_, 0.0, 0.0)) {
  if (!(options_.reg_eps > 0.0)) throw LabError(ErrorKind::domain_error, "stepper regularization must be positive");
}

StepResult MidpointStepper::step(const ComplexField& u, double dt, const ComplexField* forcing_mid) const {
  if (!(dt > 0.0)) throw LabError(ErrorKind::domain_error, "time step must be positive");
  const cplx shift(0.0, -2.0 / dt);
  // (-Δ_h + a W(ū_k) - 2i/dt) ū = -(2i/dt) u - f
  ComplexField rhs(grid_);
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    rhs[i] = shift * u[i];
    if (forcing_mid) rhs[i] -= (*forcing_mid)[i];
  }
  const LinearOperator base = neg_lap_.affine(1.0, shift);
  std::vector<cplx> w(grid_->size());

  ComplexField mid = u;
  int it = 0;
  for (;;) {
    ++it;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = a_ * coefficient_weight(mid[i], m_, options_.reg_eps);
    ComplexField next = base.shifted(w).solve(rhs);
    double change = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) change = std::max(change, std::abs(next[i] - mid[i]));
    const double scale = next.max_abs();
    mid = std::move(next);
    if (change <= options_.inner_tol * scale || scale == 0.0) break;
    if (it >= options_.inner_max_iter) {
      throw LabError(ErrorKind::inner_non_convergence,
                     "midpoint iteration did not converge in " + std::to_string(it) + " iterations");
    }
  }
  StepResult out;
  out.next = 2.0 * mid - u;
  out.next.apply_dirichlet();
  out.midpoint = std::move(mid);
  out.inner_iterations = it;
  return out;
}

StepResult step(const ComplexField& u, double t, double dt, const ModelParams& params, const ForcingFn& forcing,
                const EvolutionOptions& options) {
  const MidpointStepper stepper(u.grid_ptr(), params.a(), params.m(), options);
  if (forcing) {
    const ComplexField f = forcing(t + 0.5 * dt);
    return stepper.step(u, dt, &f);
  }
  return stepper.step(u, dt, nullptr);
}

EvolutionRun evolve(const ComplexField& u0, const ModelParams& params, const ForcingFn& forcing, double t0, double t1,
                    int steps, const EvolutionOptions& options, const std::function<ComplexField(double)>& reference) {
  if (steps < 1) throw LabError(ErrorKind::domain_error, "at least one step is required");
  if (!(t1 > t0)) throw LabError(ErrorKind::domain_error, "end time must exceed start time");
  const GridPtr& grid = u0.grid_ptr();
  const MidpointStepper stepper(grid, params.a(), params.m(), options);
  const LinearOperator neg_lap = assemble_operator(grid, 0.0, 0.0);
  const double dt = (t1 - t0) / steps;
  const double m = params.m();
  const cplx a = params.a();

  EvolutionRun run{params, grid, t0, t1, steps, {}, {}, {}, 0.0};
  run.diagnostics.reserve(static_cast<std::size_t>(steps) + 1);

  auto record = [&](const ComplexField& u, double t, StepDiagnostics d) {
    d.t = t;
    d.mass = std::pow(l2_norm(u), 2);
    d.energy = discrete_energy(u, neg_lap, a, m);
    d.support_radius = support_radius(u);
    d.edge_max = edge_max(u);
    if (reference) {
      const ComplexField ref = reference(t);
      const double denom = l2_norm(ref);
      const double diff = l2_norm(u - ref);
      d.deviation = denom > 0.0 ? diff / denom : diff;
      run.max_deviation = std::max(run.max_deviation, d.deviation);
    }
    run.diagnostics.push_back(d);
  };

  ComplexField u = u0;
  u.apply_dirichlet();
  record(u, t0, {});
  run.snapshot_times.push_back(t0);
  run.snapshots.push_back(u);

  for (int k = 1; k <= steps; ++k) {
    const double t = t0 + (k - 1) * dt;
    const double t_next = k == steps ? t1 : t0 + k * dt;
    const ComplexField f = forcing ? forcing(t + 0.5 * dt) : zero_like(grid);
    StepResult res = stepper.step(u, dt, forcing ? &f : nullptr);

    StepDiagnostics d;
    const double mass_prev = std::pow(l2_norm(u), 2);
    const double mass_next = std::pow(l2_norm(res.next), 2);
    const double bm = sublinear_mass(res.midpoint, m);
    const cplx fu = inner(f, res.midpoint);
    d.mass_rate_lhs = (mass_next - mass_prev) / (2.0 * dt);
    d.mass_rate_rhs = a.imag() * bm + fu.imag();
    d.mass_rate_scale = std::abs(a) * bm + std::abs(fu);
    d.inner_iterations = res.inner_iterations;

    u = std::move(res.next);
    record(u, t_next, d);
    const bool snap = options.snapshot_every > 0 && k % options.snapshot_every == 0;
    if (snap || k == steps) {
      if (run.snapshot_times.back() != t_next) {
        run.snapshot_times.push_back(t_next);
        run.snapshots.push_back(u);
      }
    }
  }
  return run;
}

EvolutionRun evolve_selfsimilar(const ComplexField& U, const ModelParams& params, const ComplexField& F,
                                const SelfSimilarRunSpec& spec, const EvolutionOptions& options) {
  if (!(spec.t0 > 0.0)) throw LabError(ErrorKind::nonpositive_time, "self-similar runs need t0 > 0");
  if (!(spec.t1 > spec.t0)) throw LabError(ErrorKind::domain_error, "end time must exceed start time");
  double radius = spec.domain_radius;
  if (radius <= 0.0) {
    const double supp = std::max(support_radius(U, spec.support_threshold), 8.0 * U.grid().spacing());
    radius = 2.0 * std::sqrt(spec.t1) * supp;
  }
  const GridPtr grid = Grid::build(U.grid().kind(), U.grid().dim(), radius, spec.nodes);
  const SelfSimilarSolution sol{U, params};
  const SelfSimilarForcing frc{F, params};
  const ComplexField u0 = sample_solution(sol, spec.t0, grid);
  const ForcingFn forcing = [&](double t) { return sample_forcing(frc, t, grid); };
  const auto reference = [&](double t) { return sample_solution(sol, t, grid); };
  return evolve(u0, params, forcing, spec.t0, spec.t1, spec.steps, options, reference);
}

std::vector<double> mass_balance(const EvolutionRun& run) {
  std::vector<double> out;
  for (std::size_t k = 1; k < run.diagnostics.size(); ++k) {
    const auto& d = run.diagnostics[k];
    const double defect = std::abs(d.mass_rate_lhs - d.mass_rate_rhs);
    out.push_back(d.mass_rate_scale > 0.0 ? defect / d.mass_rate_scale : defect);
  }
  return out;
}

std::vector<double> energy_balance(const EvolutionRun& run) {
  std::vector<double> out;
  if (run.diagnostics.empty()) return out;
  const double e0 = run.diagnostics.front().energy;
  for (const auto& d : run.diagnostics) {
    const double drift = std::abs(d.energy - e0);
    out.push_back(e0 != 0.0 ? drift / std::abs(e0) : drift);
  }
  return out;
}

ExtinctionReport extinction_probe(const ComplexField& u0, const ModelParams& params, const ExtinctionSpec& spec,
                                  const EvolutionOptions& options) {
  const cplx a = params.a();
  if (!(a.imag() < 0.0)) throw LabError(ErrorKind::domain_error, "extinction probe needs Im(a) < 0");
  const double m = params.m();
  const MidpointStepper stepper(u0.grid_ptr(), a, m, options);

  ExtinctionReport rep;
  rep.threshold = spec.threshold;
  ComplexField u = u0;
  u.apply_dirichlet();
  const double n0 = l2_norm(u);
  double t = spec.t0;
  double norm = n0;
  rep.times.push_back(t);
  rep.l2.push_back(norm);
  if (n0 == 0.0) {
    rep.extinct = true;
    rep.extinction_time = t;
    return rep;
  }
  const double t_end = spec.t0 + spec.horizon;
  for (int k = 0; k < spec.max_steps; ++k) {
    if (norm <= spec.threshold * n0) {
      rep.extinct = true;
      rep.extinction_time = t;
      return rep;
    }
    if (t >= t_end) break;
    const double peak = u.max_abs();
    double dt = std::min(spec.dt_max, spec.cfl * std::pow(peak, 1.0 - m) / std::abs(a));
    dt = std::min(dt, t_end - t);
    StepResult res = stepper.step(u, dt, nullptr);
    const double next_norm = l2_norm(res.next);
    const double bm = sublinear_mass(res.midpoint, m);
    const double lhs = (next_norm * next_norm - norm * norm) / (2.0 * dt);
    const double rhs = a.imag() * bm;
    const double scale = std::abs(a) * bm;
    rep.balance_residuals.push_back(scale > 0.0 ? std::abs(lhs - rhs) / scale : std::abs(lhs - rhs));
    if (!(next_norm < norm)) rep.strictly_decreasing = false;
    u = std::move(res.next);
    norm = next_norm;
    t += dt;
    rep.times.push_back(t);
    rep.l2.push_back(norm);
  }
  if (norm <= spec.threshold * n0) {
    rep.extinct = true;
    rep.extinction_time = t;
  } else {
    rep.horizon_reached = true;
  }
  return rep;
}

void write_diagnostics_csv(const std::string& path, const EvolutionRun& run) {
  std::ofstream os(path);
  if (!os) throw LabError(ErrorKind::config_error, "cannot write " + path);
  const auto res = mass_balance(run);
  os << "t,mass,energy,mass_residual,support_radius,deviation\n" << std::setprecision(17);
  for (std::size_t k = 0; k < run.diagnostics.size(); ++k) {
    const auto& d = run.diagnostics[k];
    os << d.t << ',' << d.mass << ',' << d.energy << ',' << (k == 0 ? 0.0 : res[k - 1]) << ',' << d.support_radius
       << ',' << d.deviation << '\n';
  }
}

}  // namespace nlslab
